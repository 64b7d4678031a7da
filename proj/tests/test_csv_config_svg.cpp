#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "widthlab/config.hpp"
#include "widthlab/csv.hpp"
#include "widthlab/svg.hpp"

using namespace widthlab;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "widthlab_csv_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

// Coordinates of the first element with the given tag, from its points="..."
// attribute.
std::vector<std::pair<double, double>> first_points(const std::string& svg,
                                                    const std::string& tag) {
  std::size_t at = svg.find("<" + tag);
  REQUIRE(at != std::string::npos);
  std::size_t start = svg.find("points=\"", at);
  REQUIRE(start != std::string::npos);
  start += 8;
  std::size_t end = svg.find('"', start);
  std::vector<std::pair<double, double>> pts;
  std::istringstream in(svg.substr(start, end - start));
  std::string pair;
  while (in >> pair) {
    double x = 0, y = 0;
    REQUIRE(std::sscanf(pair.c_str(), "%lf,%lf", &x, &y) == 2);
    pts.emplace_back(x, y);
  }
  return pts;
}

}  // namespace

TEST_CASE("format_double round-trips doubles exactly") {
  const double cases[] = {0.0,
                          -0.0,
                          1.0,
                          0.1,
                          1.0 / 3.0,
                          std::numbers::pi,
                          1e-300,
                          -1e300,
                          5e-324,
                          std::numeric_limits<double>::max(),
                          std::numeric_limits<double>::infinity(),
                          -std::numeric_limits<double>::infinity()};
  for (double v : cases) {
    CAPTURE(v);
    double back = csv::parse_double(csv::format_double(v));
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
  }
  double nan_back = csv::parse_double(
      csv::format_double(std::numeric_limits<double>::quiet_NaN()));
  CHECK(std::isnan(nan_back));
}

TEST_CASE("parse_double rejects non-numbers") {
  CHECK_THROWS_AS(csv::parse_double(""), std::invalid_argument);
  CHECK_THROWS_AS(csv::parse_double("1.5x"), std::invalid_argument);
  CHECK_THROWS_AS(csv::parse_double("x1.5"), std::invalid_argument);
  CHECK_THROWS_AS(csv::parse_double("1,5"), std::invalid_argument);
  CHECK(csv::parse_double("-2.5e3") == -2500.0);
  CHECK(std::isnan(csv::parse_double("nan")));
  CHECK(std::isinf(csv::parse_double("inf")));
}

TEST_CASE("csv writer and reader round-trip a table") {
  const fs::path path = test_dir() / "roundtrip.csv";
  {
    csv::Writer out(path.string(), {"name", "value", "count"});
    out.write_row({"alpha", csv::format_double(1.0 / 3.0), "3"});
    out.write_row({"beta", csv::format_double(-0.0), "0"});
    CHECK(out.rows_written() == 2);
    out.close();
  }
  const std::string text = slurp(path);
  CHECK(text.front() == 'n');
  CHECK(text.back() == '\n');
  CHECK(count_occurrences(text, "\n") == 3);

  csv::Table table = csv::read_csv(path.string());
  CHECK(table.columns == std::vector<std::string>{"name", "value", "count"});
  REQUIRE(table.rows.size() == 2);
  CHECK(table.cell(0, "name") == "alpha");
  CHECK(table.number(0, "value") == 1.0 / 3.0);
  CHECK(table.numeric_column("count") == std::vector<double>{3.0, 0.0});
  CHECK(table.has_column("value"));
  CHECK(!table.has_column("missing"));
  CHECK_THROWS_AS(table.column_index("missing"), std::out_of_range);
}

TEST_CASE("csv writer validates rows before writing") {
  const fs::path path = test_dir() / "invalid.csv";
  csv::Writer out(path.string(), {"a", "b"});
  CHECK_THROWS_AS(out.write_row({"only one"}), std::invalid_argument);
  CHECK_THROWS_AS(out.write_row({"x,y", "z"}), std::invalid_argument);
  CHECK_THROWS_AS(out.write_row({"x", "quo\"te"}), std::invalid_argument);
  CHECK_THROWS_AS(out.write_row({"x", "line\nbreak"}), std::invalid_argument);
  out.write_row({"x", "y"});
  CHECK(out.rows_written() == 1);
  out.close();
  CHECK_THROWS_AS(out.write_row({"x", "y"}), std::logic_error);
  CHECK_THROWS_AS(csv::Writer((test_dir() / "none.csv").string(),
                              std::vector<std::string>{}),
                  std::invalid_argument);
}

TEST_CASE("csv parse errors carry the origin and line number") {
  CHECK_THROWS_WITH_AS(csv::parse_csv("", "f.csv"),
                       doctest::Contains("f.csv:1"), std::runtime_error);
  // ragged row on line 3
  try {
    csv::parse_csv("a,b\n1,2\n3\n", "f.csv");
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("f.csv:3") != std::string::npos);
    CHECK(std::string(e.what()).find("expected 2 cells, got 1") != std::string::npos);
  }
  CHECK_THROWS_WITH_AS(csv::parse_csv("a,b\r\n1,2\n", "f.csv"),
                       doctest::Contains("f.csv:1"), std::runtime_error);
  // header-only file is a valid empty table
  csv::Table empty = csv::parse_csv("a,b\n");
  CHECK(empty.columns.size() == 2);
  CHECK(empty.rows.empty());
}

TEST_CASE("ini parser handles the documented grammar") {
  const std::string text =
      "# leading comment\n"
      "\n"
      "[experiment]\n"
      "dataset = sine   \n"
      "  widths=125, 500\n"
      "tag = value # with hash kept\n"
      "dataset = two_points\n"
      "empty =\n"
      "[prior]\n"
      "sigma2_w1 = 2.0\r\n";
  ini::Document doc = ini::parse_ini(text, "t.ini");
  CHECK(doc.get_string("experiment", "dataset") == "two_points");  // last wins
  CHECK(doc.get_string("experiment", "tag") == "value # with hash kept");
  CHECK(doc.get_string("experiment", "empty") == "");
  CHECK(doc.get_double("prior", "sigma2_w1", 0.0) == 2.0);
  CHECK(doc.has("experiment", "widths"));
  CHECK(!doc.has("experiment", "absent"));
  CHECK(doc.get_int_list("experiment", "widths", {}) ==
        std::vector<std::int64_t>{125, 500});
}

TEST_CASE("ini parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(ini::parse_ini("key = 1\n", "t.ini"),
                       doctest::Contains("t.ini:1"), std::runtime_error);
  CHECK_THROWS_WITH_AS(ini::parse_ini("[a]\n[broken\n", "t.ini"),
                       doctest::Contains("t.ini:2"), std::runtime_error);
  CHECK_THROWS_WITH_AS(ini::parse_ini("[ ]\n", "t.ini"),
                       doctest::Contains("t.ini:1"), std::runtime_error);
  CHECK_THROWS_WITH_AS(ini::parse_ini("[a]\njust words\n", "t.ini"),
                       doctest::Contains("t.ini:2"), std::runtime_error);
  CHECK_THROWS_WITH_AS(ini::parse_ini("[a]\n= value\n", "t.ini"),
                       doctest::Contains("t.ini:2"), std::runtime_error);
}

TEST_CASE("ini typed getters parse and reject values") {
  ini::Document doc = ini::parse_ini(
      "[s]\n"
      "i = -12\n"
      "u = 18446744073709551615\n"
      "d = 2.5e-3\n"
      "b1 = true\n"
      "b2 = 0\n"
      "bad = maybe\n"
      "list = 1 2,3,  4\n");
  CHECK(doc.get_int("s", "i", 0) == -12);
  CHECK(doc.get_int("s", "missing", 7) == 7);
  CHECK(doc.get_uint64("s", "u", 0) == 18446744073709551615ull);
  CHECK_THROWS_AS(doc.get_uint64("s", "i", 0), std::runtime_error);
  CHECK(doc.get_double("s", "d", 0.0) == 2.5e-3);
  CHECK(doc.get_bool("s", "b1", false));
  CHECK(!doc.get_bool("s", "b2", true));
  CHECK_THROWS_AS(doc.get_bool("s", "bad", false), std::runtime_error);
  CHECK(doc.get_int_list("s", "list", {}) == std::vector<std::int64_t>{1, 2, 3, 4});
  CHECK_THROWS_AS(doc.get_int("s", "d", 0), std::runtime_error);
  CHECK_THROWS_WITH_AS(doc.get_string("s", "missing"), doctest::Contains("s.missing"),
                       std::runtime_error);
}

TEST_CASE("read_ini loads a file") {
  const fs::path path = test_dir() / "cfg.ini";
  std::ofstream(path) << "[experiment]\nseed = 9\n";
  ini::Document doc = ini::read_ini(path.string());
  CHECK(doc.get_uint64("experiment", "seed", 0) == 9);
  CHECK_THROWS_AS(ini::read_ini((test_dir() / "absent.ini").string()),
                  std::runtime_error);
}

TEST_CASE("plot kind names parse") {
  CHECK(svg::plot_kind_from_name("convergence") == svg::PlotKind::kConvergence);
  CHECK(svg::plot_kind_from_name("band") == svg::PlotKind::kBand);
  CHECK(svg::plot_kind_from_name("bars") == svg::PlotKind::kBars);
  CHECK_THROWS_AS(svg::plot_kind_from_name("pie"), std::invalid_argument);
}

TEST_CASE("empty tables render axes-only documents for every kind") {
  csv::Table conv = csv::parse_csv("width,seed,mean_dist\n");
  csv::Table band = csv::parse_csv("x,posterior_mean,posterior_var\n");
  csv::Table bars = csv::parse_csv("width,bin_left,bin_right,count\n");
  for (auto [table, kind] :
       {std::pair{conv, svg::PlotKind::kConvergence},
        std::pair{band, svg::PlotKind::kBand}, std::pair{bars, svg::PlotKind::kBars}}) {
    std::string out = svg::render_plot(table, kind);
    CHECK(out.rfind("<?xml", 0) == 0);
    CHECK(out.find("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\"") !=
          std::string::npos);
    CHECK(out.find("viewBox=\"0 0 800 500\"") != std::string::npos);
    CHECK(out.find("</svg>") != std::string::npos);
    CHECK(count_occurrences(out, "<circle") == 0);
    CHECK(count_occurrences(out, "<polygon") == 0);
  }
}

TEST_CASE("convergence plot draws one marker per width per seed series") {
  csv::Table table = csv::parse_csv(
      "width,seed,mean_dist,ok\n"
      "10,0,3.0,1\n"
      "100,0,2.0,1\n"
      "1000,0,1.0,1\n"
      "10,1,3.5,1\n"
      "100,1,2.5,1\n"
      "1000,1,1.5,1\n"
      "1000,2,9.9,0\n");  // failed row: excluded
  std::string out = svg::render_plot(table, svg::PlotKind::kConvergence);
  CHECK(count_occurrences(out, "<circle") == 6);       // 3 widths x 2 seeds
  CHECK(count_occurrences(out, "<polyline") == 2);     // one line per seed
  CHECK(count_occurrences(out, "seed 2") == 0);
  // log-x: the pixel gap between widths 10 and 100 equals the gap between
  // 100 and 1000
  auto pts = first_points(out, "polyline");
  REQUIRE(pts.size() == 3);
  CHECK(pts[1].first - pts[0].first ==
        doctest::Approx(pts[2].first - pts[1].first).epsilon(1e-6));
  // identical input renders identical bytes
  CHECK(svg::render_plot(table, svg::PlotKind::kConvergence) == out);
}

TEST_CASE("band plot keeps every mean +/- sd vertex inside the frame") {
  csv::Table table = csv::parse_csv(
      "x,f_mean,f_var,g_mean,g_var\n"
      "0,0,4,5,0.25\n"
      "1,10,9,-5,1\n"
      "2,-3,1,0,16\n");
  std::string out = svg::render_plot(table, svg::PlotKind::kBand, "two bands");
  CHECK(count_occurrences(out, "<polygon") == 2);
  CHECK(out.find("two bands") != std::string::npos);
  auto poly = first_points(out, "polygon");
  REQUIRE(poly.size() == 6);  // 3 upper + 3 lower vertices
  for (auto [x, y] : poly) {
    CHECK(y >= 46.0 - 1e-9);   // frame top
    CHECK(y <= 452.0 + 1e-9);  // frame bottom
    CHECK(x >= 70.0 - 1e-9);
    CHECK(x <= 635.0 + 1e-9);
  }
  // the y-range must cover mean+sd = 13 and mean-sd = -6: the extreme
  // vertices sit strictly inside only because of the 5% padding
  double ymin = 1e9, ymax = -1e9;
  for (auto [x, y] : poly) {
    (void)x;
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  CHECK(ymin > 46.0);
  CHECK(ymax < 452.0);
}

TEST_CASE("band plot requires a mean/var column pair") {
  csv::Table table = csv::parse_csv("x,f_mean\n0,1\n");
  CHECK_THROWS_WITH_AS(svg::render_plot(table, svg::PlotKind::kBand),
                       doctest::Contains("_mean"), std::runtime_error);
  csv::Table no_x = csv::parse_csv("f_mean,f_var\n0,1\n");
  CHECK_THROWS_WITH_AS(svg::render_plot(no_x, svg::PlotKind::kBand),
                       doctest::Contains("x"), std::runtime_error);
}

TEST_CASE("bar plot draws one rect per histogram row") {
  csv::Table table = csv::parse_csv(
      "width,bin_left,bin_right,count\n"
      "16,0,0.5,4\n"
      "16,0.5,1,0\n"
      "64,0,0.5,2\n"
      "64,0.5,1,6\n");
  std::string out = svg::render_plot(table, svg::PlotKind::kBars);
  // background + 4 bars + 2 legend swatches
  CHECK(count_occurrences(out, "<rect") == 1 + 4 + 2 + 1);  // + frame
  CHECK(out.find("K=16") != std::string::npos);
  CHECK(out.find("K=64") != std::string::npos);
  CHECK_THROWS_WITH_AS(
      svg::render_plot(csv::parse_csv("width,count\n1,2\n"), svg::PlotKind::kBars),
      doctest::Contains("bin_left"), std::runtime_error);
}

TEST_CASE("write_plot writes the rendered bytes") {
  csv::Table table = csv::parse_csv("width,seed,mean_dist\n8,0,1.25\n");
  const fs::path path = test_dir() / "plot.svg";
  svg::write_plot(path.string(), table, svg::PlotKind::kConvergence);
  CHECK(slurp(path) == svg::render_plot(table, svg::PlotKind::kConvergence));
}
