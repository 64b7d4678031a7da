#include "widthlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "widthlab/csv.hpp"
#include "widthlab/rng.hpp"

namespace widthlab {
namespace {

namespace fs = std::filesystem;
using rng::derive_seed;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Stream tags for everything the harness seeds.
constexpr std::uint64_t kDatasetStream = 0xd474;
constexpr std::uint64_t kPriorMomentStream = 0x9147;
constexpr std::uint64_t kUpcrossStream = 0x5bc4;
constexpr std::uint64_t kKernelStream = 0x4e75;
constexpr std::uint64_t kEvalStream = 0xe7a1;
constexpr std::uint64_t kPredictiveStream = 0x93d1;
constexpr std::uint64_t kFunctionStream = 0x54f1;
constexpr std::uint64_t kCellWidthStream = 0xce11;
constexpr std::uint64_t kCellSeedStream = 0x5eed;

std::string join_out(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

std::string cell_file(const std::string& stem, int width, std::uint64_t seed) {
  std::ostringstream name;
  name << stem << "_k" << width << "_s" << seed << ".csv";
  return name.str();
}

std::string fmt_int(std::int64_t v) { return std::to_string(v); }
std::string fmt_u64(std::uint64_t v) { return std::to_string(v); }

KernelKind kernel_kind(const ExperimentConfig& cfg) {
  return KernelKind::for_activation(cfg.activation, cfg.nngp_tanh_samples,
                                    derive_seed(cfg.base_seed, kKernelStream));
}

Architecture make_arch(const ExperimentConfig& cfg, const Dataset& data, int width) {
  Architecture arch;
  arch.input_dim = static_cast<int>(data.dim());
  arch.width = width;
  arch.activation = cfg.activation;
  arch.validate();
  return arch;
}

TrainResult train_cell(const ExperimentConfig& cfg, const Dataset& data,
                       const Architecture& arch, std::uint64_t cell) {
  TrainConfig tc = cfg.train;
  tc.seed = cell;
  return train(arch, cfg.prior, data, tc);
}

// Likelihood normalization constants, removed when comparing to C_X.
double gaussian_constants(const Dataset& data, const PriorConfig& prior) {
  return 0.5 * static_cast<double>(data.size()) *
         std::log(2.0 * std::numbers::pi * prior.sigma2_noise);
}

Dataset dataset_from_csv(const std::string& path) {
  csv::Table table = csv::read_csv(path);
  if (table.columns != std::vector<std::string>{"x", "y"}) {
    throw std::runtime_error(path + ": dataset needs exactly the header 'x,y'");
  }
  if (table.rows.empty()) throw std::runtime_error(path + ": dataset has no rows");
  Dataset raw;
  raw.x.resize(static_cast<Eigen::Index>(table.rows.size()), 1);
  raw.y.resize(static_cast<Eigen::Index>(table.rows.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    try {
      raw.x(static_cast<Eigen::Index>(r), 0) = csv::parse_double(table.rows[r][0]);
      raw.y(static_cast<Eigen::Index>(r)) = csv::parse_double(table.rows[r][1]);
    } catch (const std::invalid_argument& e) {
      std::ostringstream msg;
      msg << path << ":" << r + 2 << ": " << e.what();
      throw std::runtime_error(msg.str());
    }
  }
  std::string stem = fs::path(path).stem().string();
  if (stem.empty()) stem = "csv";
  for (char& c : stem) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') c = '_';
  }
  raw.name = stem;
  return raw;
}

struct Cell {
  int width = 0;
  std::uint64_t seed = 0;
};

RunRecord run_cell(const ExperimentConfig& cfg, const Dataset& data,
                   const Eigen::MatrixXd& grid, const Eigen::VectorXd& prior_var,
                   const Cell& cell) {
  RunRecord rec;
  rec.dataset = data.name;
  rec.width = cell.width;
  rec.seed = cell.seed;
  rec.elbo = rec.kl = rec.expected_nll = rec.error_at_params = kNan;
  rec.c_x = rec.mean_dist = rec.var_dist = kNan;
  rec.bound_max = rec.mean_abs_max = kNan;

  Architecture arch = make_arch(cfg, data, cell.width);
  const std::uint64_t cell_base = cell_seed(cfg.base_seed, cell.width, cell.seed);
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  TrainResult trained;
  try {
    trained = train_cell(cfg, data, arch, cell_base);
  } catch (const TrainingDivergence&) {
    rec.ok = false;
    rec.wall_seconds = elapsed();
    return rec;
  }

  ElboBreakdown eval =
      elbo_estimate(trained.params, data, arch, cfg.prior, cfg.eval_mc_samples,
                    derive_seed(cell_base, kEvalStream));
  rec.elbo = eval.elbo;
  rec.kl = eval.kl;
  rec.expected_nll = eval.expected_nll;
  rec.error_at_params = eval.expected_nll - gaussian_constants(data, cfg.prior);
  rec.c_x = c_x(data, arch, cfg.prior);
  rec.loss_premise_holds = rec.error_at_params + rec.kl <= rec.c_x;

  // Deterministic moment paths: the prior predictive mean is exactly zero,
  // so mean_dist is the norm of the posterior mean.
  PosteriorMoments pm = posterior_moments(trained.params, arch, cfg.prior, grid);
  rec.mean_dist = pm.means.norm();
  rec.var_dist = (pm.variances - prior_var).norm();

  if (cfg.activation == Activation::Erf) {
    BoundReport report = bound_check(trained.params, arch, cfg.prior, data, grid,
                                     cfg.bound_mc_samples, cell_base);
    rec.bound_max = report.bound.maxCoeff();
    rec.mean_abs_max = report.mean_abs.maxCoeff();
    rec.bound_pointwise_ok =
        (report.mean_abs.array() <= report.bound.array()).all() ? 1 : 0;
  }
  rec.ok = true;
  rec.wall_seconds = elapsed();
  return rec;
}

std::string flag_cell(bool ok, bool value) {
  if (!ok) return "nan";
  return value ? "1" : "0";
}

}  // namespace

void GridSpec::validate() const {
  if (n_points < 2) throw std::invalid_argument("grid n_points must be >= 2");
  if (!(padding >= 0) || !std::isfinite(padding)) {
    throw std::invalid_argument("grid padding must be finite and >= 0");
  }
}

void ExperimentConfig::validate() const {
  if (dataset != "two_points" && dataset != "sine" &&
      dataset.rfind("csv:", 0) != 0) {
    throw std::invalid_argument("dataset must be two_points, sine, or csv:<path>, got '" + dataset + "'");
  }
  if (dataset.rfind("csv:", 0) == 0 && dataset.size() == 4) {
    throw std::invalid_argument("csv dataset needs a path after 'csv:'");
  }
  if (widths.empty()) throw std::invalid_argument("widths must be non-empty");
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (widths[i] < 1) throw std::invalid_argument("widths must be positive");
    if (i > 0 && widths[i] <= widths[i - 1]) {
      throw std::invalid_argument("widths must be strictly increasing");
    }
  }
  if (seeds.empty()) throw std::invalid_argument("seeds must be non-empty");
  if (out_dir.empty()) throw std::invalid_argument("out_dir must be non-empty");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  if (predictive_samples < 2) throw std::invalid_argument("predictive_samples must be >= 2");
  if (prior_samples < 2) throw std::invalid_argument("prior_samples must be >= 2");
  if (eval_mc_samples < 1) throw std::invalid_argument("eval_mc_samples must be >= 1");
  if (bound_mc_samples < 1) throw std::invalid_argument("bound_mc_samples must be >= 1");
  if (upcross_functions < 1) throw std::invalid_argument("upcross_functions must be >= 1");
  if (upcross_bins < 1) throw std::invalid_argument("upcross_bins must be >= 1");
  if (posterior_sample_functions < 0) {
    throw std::invalid_argument("posterior_sample_functions must be >= 0");
  }
  if (nngp_tanh_samples < 1) throw std::invalid_argument("nngp_tanh_samples must be >= 1");
  if (sine_n < 2) throw std::invalid_argument("sine_n must be >= 2");
  if (!(sine_noise_sd >= 0) || !std::isfinite(sine_noise_sd)) {
    throw std::invalid_argument("sine_noise_sd must be finite and >= 0");
  }
  if (!std::isfinite(sine_frequency)) {
    throw std::invalid_argument("sine_frequency must be finite");
  }
  if (!(prior.sigma2_w1 > 0) || !(prior.sigma2_b1 > 0) || !(prior.sigma2_w2 > 0) ||
      !(prior.sigma2_noise > 0)) {
    throw std::invalid_argument("prior variances must be positive");
  }
  grid.validate();
  TrainConfig probe = train;
  probe.validate();
}

ExperimentConfig config_from_ini(const ini::Document& doc) {
  static const std::map<std::string, std::set<std::string>> known = {
      {"experiment",
       {"dataset", "widths", "seeds", "activation", "seed", "out_dir", "jobs",
        "predictive_samples", "prior_samples", "eval_mc_samples",
        "bound_mc_samples", "upcross_functions", "upcross_bins",
        "posterior_sample_functions", "nngp_tanh_samples", "sine_n",
        "sine_frequency", "sine_noise_sd"}},
      {"prior", {"sigma2_w1", "sigma2_b1", "sigma2_w2", "sigma2_noise"}},
      {"train",
       {"epochs", "learning_rate", "momentum", "mc_samples", "clip_norm",
        "restart_period", "lr_min", "record_every"}},
      {"grid", {"n_points", "padding"}},
  };
  for (const auto& [section, entries] : doc.sections) {
    auto it = known.find(section);
    if (it == known.end()) {
      throw std::runtime_error("config: unknown section [" + section + "]");
    }
    for (const auto& [key, value] : entries) {
      (void)value;
      if (!it->second.count(key)) {
        throw std::runtime_error("config: unknown entry " + section + "." + key);
      }
    }
  }

  ExperimentConfig cfg;
  cfg.dataset = doc.get_string("experiment", "dataset", cfg.dataset);
  {
    std::vector<std::int64_t> fallback(cfg.widths.begin(), cfg.widths.end());
    auto widths = doc.get_int_list("experiment", "widths", fallback);
    cfg.widths.assign(widths.begin(), widths.end());
    for (std::size_t i = 0; i < widths.size(); ++i) {
      if (widths[i] < 1 || widths[i] > std::numeric_limits<int>::max()) {
        throw std::runtime_error("config experiment.widths: width out of range");
      }
    }
  }
  {
    std::vector<std::int64_t> fallback(cfg.seeds.begin(), cfg.seeds.end());
    auto seeds = doc.get_int_list("experiment", "seeds", fallback);
    cfg.seeds.assign(seeds.begin(), seeds.end());
  }
  cfg.activation = activation_from_string(
      doc.get_string("experiment", "activation", to_string(cfg.activation)));
  cfg.base_seed = doc.get_uint64("experiment", "seed", cfg.base_seed);
  cfg.out_dir = doc.get_string("experiment", "out_dir", cfg.out_dir);
  cfg.jobs = static_cast<int>(doc.get_int("experiment", "jobs", cfg.jobs));
  cfg.predictive_samples = static_cast<int>(
      doc.get_int("experiment", "predictive_samples", cfg.predictive_samples));
  cfg.prior_samples =
      static_cast<int>(doc.get_int("experiment", "prior_samples", cfg.prior_samples));
  cfg.eval_mc_samples = static_cast<int>(
      doc.get_int("experiment", "eval_mc_samples", cfg.eval_mc_samples));
  cfg.bound_mc_samples = static_cast<int>(
      doc.get_int("experiment", "bound_mc_samples", cfg.bound_mc_samples));
  cfg.upcross_functions = static_cast<int>(
      doc.get_int("experiment", "upcross_functions", cfg.upcross_functions));
  cfg.upcross_bins =
      static_cast<int>(doc.get_int("experiment", "upcross_bins", cfg.upcross_bins));
  cfg.posterior_sample_functions = static_cast<int>(doc.get_int(
      "experiment", "posterior_sample_functions", cfg.posterior_sample_functions));
  cfg.nngp_tanh_samples = static_cast<int>(
      doc.get_int("experiment", "nngp_tanh_samples", cfg.nngp_tanh_samples));
  cfg.sine_n = static_cast<int>(doc.get_int("experiment", "sine_n", cfg.sine_n));
  cfg.sine_frequency =
      doc.get_double("experiment", "sine_frequency", cfg.sine_frequency);
  cfg.sine_noise_sd =
      doc.get_double("experiment", "sine_noise_sd", cfg.sine_noise_sd);

  cfg.prior.sigma2_w1 = doc.get_double("prior", "sigma2_w1", cfg.prior.sigma2_w1);
  cfg.prior.sigma2_b1 = doc.get_double("prior", "sigma2_b1", cfg.prior.sigma2_b1);
  cfg.prior.sigma2_w2 = doc.get_double("prior", "sigma2_w2", cfg.prior.sigma2_w2);
  cfg.prior.sigma2_noise =
      doc.get_double("prior", "sigma2_noise", cfg.prior.sigma2_noise);

  cfg.train.epochs = static_cast<int>(doc.get_int("train", "epochs", cfg.train.epochs));
  cfg.train.learning_rate =
      doc.get_double("train", "learning_rate", cfg.train.learning_rate);
  cfg.train.momentum = doc.get_double("train", "momentum", cfg.train.momentum);
  cfg.train.mc_samples =
      static_cast<int>(doc.get_int("train", "mc_samples", cfg.train.mc_samples));
  cfg.train.clip_norm = doc.get_double("train", "clip_norm", cfg.train.clip_norm);
  cfg.train.restart_period = static_cast<int>(
      doc.get_int("train", "restart_period", cfg.train.restart_period));
  cfg.train.lr_min = doc.get_double("train", "lr_min", cfg.train.lr_min);
  cfg.train.record_every =
      static_cast<int>(doc.get_int("train", "record_every", cfg.train.record_every));

  cfg.grid.n_points =
      static_cast<int>(doc.get_int("grid", "n_points", cfg.grid.n_points));
  cfg.grid.padding = doc.get_double("grid", "padding", cfg.grid.padding);

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return config_from_ini(ini::read_ini(path));
}

std::uint64_t resolve_seed(const ExperimentConfig& cfg,
                           std::optional<std::uint64_t> flag_seed) {
  if (flag_seed) return *flag_seed;
  if (const char* env = std::getenv("WIDTHLAB_SEED")) {
    std::string text(env);
    errno = 0;
    char* end = nullptr;
    std::uint64_t value;
    if (!text.empty() && text[0] == '-') {
      value = static_cast<std::uint64_t>(std::strtoll(text.c_str(), &end, 10));
    } else {
      value = std::strtoull(text.c_str(), &end, 10);
    }
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
      throw std::runtime_error("WIDTHLAB_SEED must be an integer, got '" + text + "'");
    }
    return value;
  }
  return cfg.base_seed;
}

std::uint64_t cell_seed(std::uint64_t base, int width, std::uint64_t seed) {
  return derive_seed(derive_seed(base, kCellWidthStream, static_cast<std::uint64_t>(width)),
                     kCellSeedStream, seed);
}

Dataset make_dataset(const ExperimentConfig& cfg) {
  Dataset raw;
  if (cfg.dataset == "two_points") {
    raw.name = "two_points";
    raw.x.resize(2, 1);
    raw.x << -1.0, 1.0;
    raw.y.resize(2);
    raw.y << -1.0, 1.0;
  } else if (cfg.dataset == "sine") {
    raw.name = "sine";
    const int n = cfg.sine_n;
    raw.x.resize(n, 1);
    raw.y.resize(n);
    std::mt19937_64 eng(derive_seed(cfg.base_seed, kDatasetStream));
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
      double x = -2.0 + 4.0 * static_cast<double>(i) / (n - 1);
      raw.x(i, 0) = x;
      raw.y(i) = std::sin(cfg.sine_frequency * x) + cfg.sine_noise_sd * noise(eng);
    }
  } else if (cfg.dataset.rfind("csv:", 0) == 0) {
    raw = dataset_from_csv(cfg.dataset.substr(4));
  } else {
    throw std::invalid_argument("unknown dataset spec '" + cfg.dataset + "'");
  }
  return zscore(raw);
}

Eigen::MatrixXd make_grid(const Dataset& data, const GridSpec& grid) {
  grid.validate();
  if (data.dim() != 1) {
    throw std::invalid_argument("the evaluation grid is one-dimensional; dataset has dim " +
                                std::to_string(data.dim()));
  }
  const double lo = data.x.col(0).minCoeff() - grid.padding;
  const double hi = data.x.col(0).maxCoeff() + grid.padding;
  Eigen::MatrixXd xs(grid.n_points, 1);
  for (int i = 0; i < grid.n_points; ++i) {
    xs(i, 0) = lo + (hi - lo) * static_cast<double>(i) / (grid.n_points - 1);
  }
  return xs;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  p = std::clamp(p, 0.0, 1.0);
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

ConvergenceResult run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  ensure_out_dir(cfg.out_dir);
  const Dataset data = make_dataset(cfg);
  const Eigen::MatrixXd grid = make_grid(data, cfg.grid);

  Eigen::VectorXd prior_var(grid.rows());
  {
    Architecture probe = make_arch(cfg, data, cfg.widths.front());
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
      prior_var(i) = prior_predictive_variance(probe, cfg.prior, grid.row(i).transpose());
    }
  }

  // Canonical (width, seed) order; execution order does not matter.
  std::vector<std::uint64_t> seeds = cfg.seeds;
  std::sort(seeds.begin(), seeds.end());
  std::vector<Cell> cells;
  cells.reserve(cfg.widths.size() * seeds.size());
  for (int width : cfg.widths) {
    for (std::uint64_t seed : seeds) cells.push_back({width, seed});
  }

  std::vector<RunRecord> records(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        records[i] = run_cell(cfg, data, grid, prior_var, cells[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  const int pool_size = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), cells.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < pool_size; ++t) pool.emplace_back(worker);
  worker();
  for (auto& thread : pool) thread.join();
  if (first_error) std::rethrow_exception(first_error);

  const std::string data_path = join_out(cfg.out_dir, "convergence.csv");
  const std::string timing_path = join_out(cfg.out_dir, "timing.csv");
  csv::Writer out(data_path,
                  {"dataset", "width", "seed", "ok", "elbo", "kl", "expected_nll",
                   "error_at_params", "c_x", "loss_premise_holds", "mean_dist",
                   "var_dist", "bound_max", "mean_abs_max", "bound_pointwise_ok"});
  csv::Writer timing(timing_path, {"dataset", "width", "seed", "wall_seconds"});
  for (const RunRecord& r : records) {
    out.write_row({r.dataset, fmt_int(r.width), fmt_u64(r.seed), r.ok ? "1" : "0",
                   csv::format_double(r.elbo), csv::format_double(r.kl),
                   csv::format_double(r.expected_nll),
                   csv::format_double(r.error_at_params), csv::format_double(r.c_x),
                   flag_cell(r.ok, r.loss_premise_holds),
                   csv::format_double(r.mean_dist), csv::format_double(r.var_dist),
                   csv::format_double(r.bound_max),
                   csv::format_double(r.mean_abs_max),
                   r.bound_pointwise_ok < 0 ? "nan" : fmt_int(r.bound_pointwise_ok)});
    timing.write_row({r.dataset, fmt_int(r.width), fmt_u64(r.seed),
                      csv::format_double(r.wall_seconds)});
  }
  out.close();
  timing.close();
  return {std::move(records), {data_path, timing_path}};
}

std::vector<std::string> run_prior_check(const ExperimentConfig& cfg) {
  cfg.validate();
  ensure_out_dir(cfg.out_dir);
  const Dataset data = make_dataset(cfg);
  const Eigen::MatrixXd grid = make_grid(data, cfg.grid);
  const KernelKind kind = kernel_kind(cfg);

  const Eigen::VectorXd kernel_diag =
      nngp_kernel_matrix(cfg.prior, grid, kind).diagonal();

  const std::string check_path = join_out(cfg.out_dir, "prior_check.csv");
  const std::string bins_path = join_out(cfg.out_dir, "upcrossings.csv");
  const std::string summary_path = join_out(cfg.out_dir, "upcross_summary.csv");
  csv::Writer check(check_path, {"width", "x", "prior_mean", "prior_var",
                                 "prior_var_se", "nngp_var"});
  csv::Writer bins(bins_path, {"width", "bin_left", "bin_right", "count"});
  csv::Writer summary(summary_path, {"width", "mean_upcrossings"});

  const double lo = grid(0, 0);
  const double hi = grid(grid.rows() - 1, 0);
  for (int width : cfg.widths) {
    Architecture arch = make_arch(cfg, data, width);
    MomentSummary moments = prior_predictive_moments(
        arch, cfg.prior, grid, cfg.prior_samples,
        derive_seed(cfg.base_seed, kPriorMomentStream, static_cast<std::uint64_t>(width)));
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
      check.write_row({fmt_int(width), csv::format_double(grid(i, 0)),
                       csv::format_double(moments.means(i)),
                       csv::format_double(moments.variances(i)),
                       csv::format_double(moments.variance_se(i)),
                       csv::format_double(kernel_diag(i))});
    }

    // Zero-upcrossing locations over sampled prior functions. The prior
    // point of the variational family is the prior itself.
    PosteriorPredictive draws = posterior_predictive(
        VariationalParams::prior_point(arch), arch, cfg.prior, grid,
        cfg.upcross_functions,
        derive_seed(cfg.base_seed, kUpcrossStream, static_cast<std::uint64_t>(width)),
        /*keep_samples=*/true);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(cfg.upcross_bins), 0);
    std::int64_t total = 0;
    const Eigen::VectorXd grid_x = grid.col(0);
    for (Eigen::Index s = 0; s < draws.samples.rows(); ++s) {
      const Eigen::VectorXd f = draws.samples.row(s).transpose();
      for (double x : upcrossings(grid_x, f)) {
        int bin = static_cast<int>((x - lo) / (hi - lo) * cfg.upcross_bins);
        bin = std::clamp(bin, 0, cfg.upcross_bins - 1);
        ++counts[static_cast<std::size_t>(bin)];
        ++total;
      }
    }
    for (int b = 0; b < cfg.upcross_bins; ++b) {
      const double left = lo + (hi - lo) * static_cast<double>(b) / cfg.upcross_bins;
      const double right = lo + (hi - lo) * static_cast<double>(b + 1) / cfg.upcross_bins;
      bins.write_row({fmt_int(width), csv::format_double(left),
                      csv::format_double(right), fmt_int(counts[static_cast<std::size_t>(b)])});
    }
    summary.write_row(
        {fmt_int(width),
         csv::format_double(static_cast<double>(total) / cfg.upcross_functions)});
  }
  check.close();
  bins.close();
  summary.close();
  return {check_path, bins_path, summary_path};
}

std::vector<std::string> run_posterior(const ExperimentConfig& cfg, int width,
                                       std::uint64_t seed) {
  cfg.validate();
  ensure_out_dir(cfg.out_dir);
  const Dataset data = make_dataset(cfg);
  const Eigen::MatrixXd grid = make_grid(data, cfg.grid);
  Architecture arch = make_arch(cfg, data, width);
  const std::uint64_t cell = cell_seed(cfg.base_seed, width, seed);

  TrainResult trained = train_cell(cfg, data, arch, cell);
  PosteriorPredictive posterior = posterior_predictive(
      trained.params, arch, cfg.prior, grid, cfg.predictive_samples,
      derive_seed(cell, kPredictiveStream));

  // Same seed derivation as run_prior_check, so the prior columns agree.
  MomentSummary prior_moments = prior_predictive_moments(
      arch, cfg.prior, grid, cfg.prior_samples,
      derive_seed(cfg.base_seed, kPriorMomentStream, static_cast<std::uint64_t>(width)));

  GpPosterior gp = gp_fit(data.x, data.y, kernel_kind(cfg), cfg.prior);
  GpPrediction nngp = gp_predict(gp, grid);

  const std::string path = join_out(cfg.out_dir, cell_file("posterior", width, seed));
  csv::Writer out(path, {"x", "posterior_mean", "posterior_var", "prior_mean",
                         "prior_var", "nngp_mean", "nngp_var"});
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    out.write_numeric_row({grid(i, 0), posterior.means(i), posterior.variances(i),
                           prior_moments.means(i), prior_moments.variances(i),
                           nngp.means(i), nngp.variances(i)});
  }
  out.close();
  std::vector<std::string> files{path};

  if (cfg.posterior_sample_functions > 0) {
    PosteriorPredictive draws = posterior_predictive(
        trained.params, arch, cfg.prior, grid, cfg.posterior_sample_functions,
        derive_seed(cell, kFunctionStream), /*keep_samples=*/true);
    const std::string sample_path =
        join_out(cfg.out_dir, cell_file("posterior_samples", width, seed));
    csv::Writer samples(sample_path, {"sample", "x", "value"});
    for (Eigen::Index s = 0; s < draws.samples.rows(); ++s) {
      for (Eigen::Index i = 0; i < grid.rows(); ++i) {
        samples.write_row({fmt_int(s), csv::format_double(grid(i, 0)),
                           csv::format_double(draws.samples(s, i))});
      }
    }
    samples.close();
    files.push_back(sample_path);
  }
  return files;
}

std::vector<std::string> run_param_density(const ExperimentConfig& cfg, int width,
                                           std::uint64_t seed) {
  cfg.validate();
  ensure_out_dir(cfg.out_dir);
  const Dataset data = make_dataset(cfg);
  Architecture arch = make_arch(cfg, data, width);
  TrainResult trained = train_cell(cfg, data, arch, cell_seed(cfg.base_seed, width, seed));

  const ParamVector mu = ParamVector::from_flat(arch, trained.params.mu);
  const Eigen::VectorXd sigma2_flat = (2.0 * trained.params.rho.array()).exp();
  const ParamVector sigma2 = ParamVector::from_flat(arch, sigma2_flat);

  auto collect = [](const Eigen::MatrixXd& m) {
    return std::vector<double>(m.data(), m.data() + m.size());
  };
  struct Group {
    const char* name;
    std::vector<double> mu;
    std::vector<double> sigma2;
  };
  std::vector<Group> groups;
  groups.push_back({"w1", collect(mu.w1), collect(sigma2.w1)});
  groups.push_back({"b1", collect(mu.b1), collect(sigma2.b1)});
  groups.push_back({"w2", collect(mu.w2), collect(sigma2.w2)});

  const std::string path =
      join_out(cfg.out_dir, cell_file("param_density", width, seed));
  csv::Writer out(path, {"width", "seed", "group", "quantity", "q01", "q25", "q50",
                         "q75", "q99"});
  const double levels[] = {0.01, 0.25, 0.50, 0.75, 0.99};
  for (const Group& g : groups) {
    for (int which = 0; which < 2; ++which) {
      const std::vector<double>& values = which == 0 ? g.mu : g.sigma2;
      std::vector<std::string> row{fmt_int(width), fmt_u64(seed), g.name,
                                   which == 0 ? "mu" : "sigma2"};
      for (double p : levels) row.push_back(csv::format_double(quantile(values, p)));
      out.write_row(row);
    }
  }
  out.close();
  return {path};
}

std::vector<std::string> run_bound_check(const ExperimentConfig& cfg, int width,
                                         std::uint64_t seed) {
  cfg.validate();
  if (cfg.activation != Activation::Erf) {
    throw std::invalid_argument(
        "the bound check needs the erf activation (closed-form posterior mean)");
  }
  ensure_out_dir(cfg.out_dir);
  const Dataset data = make_dataset(cfg);
  const Eigen::MatrixXd grid = make_grid(data, cfg.grid);
  Architecture arch = make_arch(cfg, data, width);
  const std::uint64_t cell = cell_seed(cfg.base_seed, width, seed);
  TrainResult trained = train_cell(cfg, data, arch, cell);
  BoundReport report = bound_check(trained.params, arch, cfg.prior, data, grid,
                                   cfg.bound_mc_samples, cell);

  const std::string summary_path =
      join_out(cfg.out_dir, cell_file("bound_summary", width, seed));
  csv::Writer summary(summary_path,
                      {"width", "seed", "c_x", "error_at_params", "kl",
                       "loss_at_params", "premise_holds", "budget_w1", "budget_b1",
                       "budget_w2", "budgets_hold", "holds"});
  summary.write_row({fmt_int(width), fmt_u64(seed), csv::format_double(report.c_x),
                     csv::format_double(report.error_at_params),
                     csv::format_double(report.kl),
                     csv::format_double(report.loss_at_params),
                     report.premise_holds ? "1" : "0",
                     csv::format_double(report.budget_w1),
                     csv::format_double(report.budget_b1),
                     csv::format_double(report.budget_w2),
                     report.budgets_hold ? "1" : "0", report.holds ? "1" : "0"});
  summary.close();

  const std::string grid_path =
      join_out(cfg.out_dir, cell_file("bound_grid", width, seed));
  csv::Writer rows(grid_path, {"x", "c_x_xstar", "v_of_x", "bound", "mean_abs"});
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    rows.write_numeric_row({grid(i, 0), report.c_x_xstar(i), report.v_of_x(i),
                            report.bound(i), report.mean_abs(i)});
  }
  rows.close();
  return {summary_path, grid_path};
}

std::vector<std::string> write_dataset_csv(const ExperimentConfig& cfg) {
  cfg.validate();
  ensure_out_dir(cfg.out_dir);
  const Dataset standardized = make_dataset(cfg);
  const Dataset raw = unzscore(standardized);
  const std::string path = join_out(cfg.out_dir, "dataset.csv");
  csv::Writer out(path, {"x_raw", "y_raw", "x", "y"});
  for (Eigen::Index i = 0; i < standardized.size(); ++i) {
    out.write_numeric_row(
        {raw.x(i, 0), raw.y(i), standardized.x(i, 0), standardized.y(i)});
  }
  out.close();
  return {path};
}

}  // namespace widthlab
