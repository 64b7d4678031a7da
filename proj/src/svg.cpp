#include "widthlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace widthlab::svg {
namespace {

constexpr double kWidth = 800;
constexpr double kHeight = 500;
// Plot frame in pixel coordinates; the strip right of the frame holds the
// legend.
constexpr double kLeft = 70;
constexpr double kRight = 635;
constexpr double kTop = 46;
constexpr double kBottom = 452;

const char* const kPalette[] = {"#1f6fb4", "#d95f02", "#2a9d57", "#9467bd",
                                "#c23b4b", "#6b6b6b", "#b8860b", "#17a2b8"};
constexpr int kPaletteSize = 8;

std::string escape_xml(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Inclusive value range plus the affine map onto a pixel span.
struct Scale {
  double lo = 0;
  double hi = 1;
  double p0 = 0;
  double p1 = 1;

  double at(double v) const {
    if (hi == lo) return 0.5 * (p0 + p1);
    return p0 + (v - lo) / (hi - lo) * (p1 - p0);
  }
};

void pad_range(double& lo, double& hi) {
  if (hi < lo) std::swap(lo, hi);
  if (hi == lo) {
    double pad = lo == 0 ? 1.0 : 0.1 * std::abs(lo);
    lo -= pad;
    hi += pad;
    return;
  }
  double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
}

// 1-2-5 tick spacing.
std::vector<double> linear_ticks(double lo, double hi, int target = 6) {
  std::vector<double> ticks;
  if (!(hi > lo)) return ticks;
  double raw = (hi - lo) / target;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double norm = raw / mag;
  double step = norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0;
  step *= mag;
  double first = std::ceil(lo / step) * step;
  for (double t = first; t <= hi + 1e-9 * step; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return ticks;
}

class Doc {
 public:
  explicit Doc(const std::string& title) {
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
         << "width=\"" << kWidth << "\" height=\"" << kHeight
         << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
         << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
         << "\" fill=\"#ffffff\"/>\n";
    if (!title.empty()) {
      text(0.5 * (kLeft + kRight), 24, escape_xml(title), "middle", 15);
    }
  }

  void line(double x1, double y1, double x2, double y2, const std::string& color,
            double width = 1.0) {
    out_ << "<line x1=\"" << px(x1) << "\" y1=\"" << px(y1) << "\" x2=\"" << px(x2)
         << "\" y2=\"" << px(y2) << "\" stroke=\"" << color << "\" stroke-width=\""
         << width << "\"/>\n";
  }

  void text(double x, double y, const std::string& escaped, const std::string& anchor,
            int size = 12) {
    out_ << "<text x=\"" << px(x) << "\" y=\"" << px(y)
         << "\" font-family=\"monospace\" font-size=\"" << size
         << "\" text-anchor=\"" << anchor << "\" fill=\"#222222\">" << escaped
         << "</text>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& color, double width = 1.5) {
    if (pts.size() < 2) return;
    out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
         << width << "\" points=\"";
    for (const auto& [x, y] : pts) out_ << px(x) << "," << px(y) << " ";
    out_ << "\"/>\n";
  }

  void polygon(const std::vector<std::pair<double, double>>& pts,
               const std::string& color, double opacity) {
    if (pts.size() < 3) return;
    out_ << "<polygon fill=\"" << color << "\" fill-opacity=\"" << opacity
         << "\" stroke=\"none\" points=\"";
    for (const auto& [x, y] : pts) out_ << px(x) << "," << px(y) << " ";
    out_ << "\"/>\n";
  }

  void circle(double x, double y, double r, const std::string& color) {
    out_ << "<circle cx=\"" << px(x) << "\" cy=\"" << px(y) << "\" r=\"" << r
         << "\" fill=\"" << color << "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& color,
            double opacity) {
    out_ << "<rect x=\"" << px(x) << "\" y=\"" << px(y) << "\" width=\"" << px(w)
         << "\" height=\"" << px(h) << "\" fill=\"" << color << "\" fill-opacity=\""
         << opacity << "\"/>\n";
  }

  void frame() {
    out_ << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\""
         << px(kRight - kLeft) << "\" height=\"" << px(kBottom - kTop)
         << "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
  }

  void x_tick(double xpix, const std::string& label) {
    line(xpix, kBottom, xpix, kBottom + 5, "#222222");
    text(xpix, kBottom + 18, escape_xml(label), "middle", 11);
  }

  void y_tick(double ypix, const std::string& label) {
    line(kLeft - 5, ypix, kLeft, ypix, "#222222");
    text(kLeft - 8, ypix + 4, escape_xml(label), "end", 11);
  }

  void axis_labels(const std::string& x_label, const std::string& y_label) {
    text(0.5 * (kLeft + kRight), kBottom + 38, escape_xml(x_label), "middle");
    out_ << "<text x=\"" << px(18) << "\" y=\"" << px(0.5 * (kTop + kBottom))
         << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\""
         << " fill=\"#222222\" transform=\"rotate(-90 18 "
         << px(0.5 * (kTop + kBottom)) << ")\">" << escape_xml(y_label)
         << "</text>\n";
  }

  void legend_entry(int slot, const std::string& label, const std::string& color) {
    double y = kTop + 10 + 18.0 * slot;
    rect(kRight + 10, y - 9, 12, 12, color, 1.0);
    text(kRight + 27, y + 2, escape_xml(label), "start", 11);
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  std::ostringstream out_;
};

void require_columns(const csv::Table& table, const char* kind,
                     const std::vector<std::string>& names) {
  std::string missing;
  for (const auto& n : names) {
    if (!table.has_column(n)) {
      if (!missing.empty()) missing += ", ";
      missing += n;
    }
  }
  if (!missing.empty()) {
    throw std::runtime_error(std::string("plot '") + kind +
                             "' needs missing column(s): " + missing);
  }
}

std::string render_convergence(const csv::Table& table, const std::string& title) {
  require_columns(table, "convergence", {"width", "seed", "mean_dist"});
  bool has_ok = table.has_column("ok");
  bool has_dataset = table.has_column("dataset");

  // series label -> sorted (width, mean_dist) points
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  std::vector<double> widths;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (has_ok && table.cell(r, "ok") != "1") continue;
    double w = table.number(r, "width");
    double y = table.number(r, "mean_dist");
    if (!(w > 0) || !std::isfinite(y)) continue;
    std::string label = "seed " + table.cell(r, "seed");
    if (has_dataset) label = table.cell(r, "dataset") + " " + label;
    series[label].emplace_back(w, y);
    widths.push_back(w);
  }

  Doc doc(title.empty() ? "posterior-to-prior distance vs width" : title);
  doc.frame();
  doc.axis_labels("width (log scale)", "mean distance");
  if (series.empty()) return doc.finish();

  std::sort(widths.begin(), widths.end());
  widths.erase(std::unique(widths.begin(), widths.end()), widths.end());
  double xlo = std::log(widths.front());
  double xhi = std::log(widths.back());
  if (xhi == xlo) {
    xlo -= 1;
    xhi += 1;
  }
  double ylo = 0;
  double yhi = 0;
  bool first = true;
  for (const auto& [label, pts] : series) {
    for (const auto& [w, y] : pts) {
      ylo = first ? y : std::min(ylo, y);
      yhi = first ? y : std::max(yhi, y);
      first = false;
    }
  }
  pad_range(ylo, yhi);
  Scale sx{xlo, xhi, kLeft, kRight};
  Scale sy{ylo, yhi, kBottom, kTop};

  for (double w : widths) doc.x_tick(sx.at(std::log(w)), short_num(w));
  for (double t : linear_ticks(ylo, yhi)) doc.y_tick(sy.at(t), short_num(t));

  int slot = 0;
  for (auto& [label, pts] : series) {
    std::sort(pts.begin(), pts.end());
    const std::string color = kPalette[slot % kPaletteSize];
    std::vector<std::pair<double, double>> pix;
    pix.reserve(pts.size());
    for (const auto& [w, y] : pts) pix.emplace_back(sx.at(std::log(w)), sy.at(y));
    doc.polyline(pix, color);
    for (const auto& [x, y] : pix) doc.circle(x, y, 3.5, color);
    doc.legend_entry(slot, label, color);
    ++slot;
  }
  return doc.finish();
}

std::string render_band(const csv::Table& table, const std::string& title) {
  require_columns(table, "band", {"x"});
  // Every <name>_mean with a matching <name>_var becomes one band series.
  std::vector<std::string> prefixes;
  for (const auto& col : table.columns) {
    const std::string tail = "_mean";
    if (col.size() > tail.size() &&
        col.compare(col.size() - tail.size(), tail.size(), tail) == 0) {
      std::string prefix = col.substr(0, col.size() - tail.size());
      if (table.has_column(prefix + "_var")) prefixes.push_back(prefix);
    }
  }
  if (prefixes.empty()) {
    throw std::runtime_error(
        "plot 'band' needs at least one <name>_mean/<name>_var column pair");
  }

  Doc doc(title.empty() ? "predictive mean and one-sd band" : title);
  doc.frame();
  doc.axis_labels("x", "f(x)");
  if (table.rows.empty()) return doc.finish();

  struct Band {
    std::string name;
    std::vector<double> x, mean, sd;
  };
  std::vector<Band> bands;
  double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
  bool first = true;
  for (const auto& prefix : prefixes) {
    Band b;
    b.name = prefix;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      double x = table.number(r, "x");
      double m = table.number(r, prefix + "_mean");
      double v = table.number(r, prefix + "_var");
      if (!std::isfinite(x) || !std::isfinite(m) || !std::isfinite(v)) continue;
      double sd = std::sqrt(std::max(v, 0.0));
      b.x.push_back(x);
      b.mean.push_back(m);
      b.sd.push_back(sd);
      if (first) {
        xlo = xhi = x;
        ylo = m - sd;
        yhi = m + sd;
        first = false;
      } else {
        xlo = std::min(xlo, x);
        xhi = std::max(xhi, x);
        ylo = std::min(ylo, m - sd);
        yhi = std::max(yhi, m + sd);
      }
    }
    bands.push_back(std::move(b));
  }
  if (first) return doc.finish();
  pad_range(xlo, xhi);
  pad_range(ylo, yhi);
  Scale sx{xlo, xhi, kLeft, kRight};
  Scale sy{ylo, yhi, kBottom, kTop};
  for (double t : linear_ticks(xlo, xhi)) doc.x_tick(sx.at(t), short_num(t));
  for (double t : linear_ticks(ylo, yhi)) doc.y_tick(sy.at(t), short_num(t));

  int slot = 0;
  for (const auto& b : bands) {
    const std::string color = kPalette[slot % kPaletteSize];
    std::vector<std::pair<double, double>> upper, line;
    for (std::size_t i = 0; i < b.x.size(); ++i) {
      upper.emplace_back(sx.at(b.x[i]), sy.at(b.mean[i] + b.sd[i]));
      line.emplace_back(sx.at(b.x[i]), sy.at(b.mean[i]));
    }
    std::vector<std::pair<double, double>> poly = upper;
    for (std::size_t i = b.x.size(); i-- > 0;) {
      poly.emplace_back(sx.at(b.x[i]), sy.at(b.mean[i] - b.sd[i]));
    }
    doc.polygon(poly, color, 0.22);
    doc.polyline(line, color);
    doc.legend_entry(slot, b.name, color);
    ++slot;
  }
  return doc.finish();
}

std::string render_bars(const csv::Table& table, const std::string& title) {
  require_columns(table, "bars", {"width", "bin_left", "bin_right", "count"});

  Doc doc(title.empty() ? "upcrossing locations" : title);
  doc.frame();
  doc.axis_labels("x", "count");
  if (table.rows.empty()) return doc.finish();

  std::map<double, int> width_slot;
  double xlo = 0, xhi = 0, yhi = 0;
  bool first = true;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    double l = table.number(r, "bin_left");
    double rr = table.number(r, "bin_right");
    double c = table.number(r, "count");
    width_slot.emplace(table.number(r, "width"), 0);
    if (first) {
      xlo = l;
      xhi = rr;
      yhi = c;
      first = false;
    } else {
      xlo = std::min(xlo, l);
      xhi = std::max(xhi, rr);
      yhi = std::max(yhi, c);
    }
  }
  int slot = 0;
  for (auto& [w, s] : width_slot) s = slot++;
  if (yhi <= 0) yhi = 1;
  yhi *= 1.05;
  if (xhi == xlo) pad_range(xlo, xhi);
  Scale sx{xlo, xhi, kLeft, kRight};
  Scale sy{0, yhi, kBottom, kTop};
  for (double t : linear_ticks(xlo, xhi)) doc.x_tick(sx.at(t), short_num(t));
  for (double t : linear_ticks(0, yhi)) doc.y_tick(sy.at(t), short_num(t));

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    double l = table.number(r, "bin_left");
    double rr = table.number(r, "bin_right");
    double c = table.number(r, "count");
    if (!(rr > l) || c < 0) continue;
    const std::string color = kPalette[width_slot[table.number(r, "width")] % kPaletteSize];
    double x = sx.at(l);
    double y = sy.at(c);
    doc.rect(x, y, sx.at(rr) - x, kBottom - y, color, 0.45);
  }
  for (const auto& [w, s] : width_slot) {
    doc.legend_entry(s, "K=" + short_num(w), kPalette[s % kPaletteSize]);
  }
  return doc.finish();
}

}  // namespace

PlotKind plot_kind_from_name(const std::string& name) {
  if (name == "convergence") return PlotKind::kConvergence;
  if (name == "band") return PlotKind::kBand;
  if (name == "bars") return PlotKind::kBars;
  throw std::invalid_argument("unknown plot kind: '" + name +
                              "' (want convergence, band, or bars)");
}

std::string render_plot(const csv::Table& table, PlotKind kind,
                        const std::string& title) {
  switch (kind) {
    case PlotKind::kConvergence: return render_convergence(table, title);
    case PlotKind::kBand: return render_band(table, title);
    case PlotKind::kBars: return render_bars(table, title);
  }
  throw std::logic_error("unreachable plot kind");
}

void write_plot(const std::string& path, const csv::Table& table, PlotKind kind,
                const std::string& title) {
  std::string body = render_plot(table, kind, title);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

}  // namespace widthlab::svg
