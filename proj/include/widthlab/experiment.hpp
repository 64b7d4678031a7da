#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "widthlab/config.hpp"
#include "widthlab/mfvi.hpp"
#include "widthlab/nngp.hpp"
#include "widthlab/prior.hpp"

namespace widthlab {

struct GridSpec {
  int n_points = 50;
  double padding = 1.0;  // in standardized input units

  void validate() const;
};

// Everything a sweep needs, read from an INI file (sections [experiment],
// [prior], [train], [grid]; every key optional, unknown keys rejected).
struct ExperimentConfig {
  // two_points | sine | csv:<path>
  std::string dataset = "two_points";
  std::vector<int> widths = {125, 500, 2000, 8000};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  Activation activation = Activation::Erf;
  PriorConfig prior;
  TrainConfig train;  // train.seed is ignored; cells derive their own
  GridSpec grid;
  std::string out_dir = "out";
  int jobs = 1;
  std::uint64_t base_seed = 0;

  int predictive_samples = 1000;    // MC posterior predictive draws
  int prior_samples = 2000;         // MC prior moment draws
  int eval_mc_samples = 1000;       // final ELBO evaluation draws
  int bound_mc_samples = 20000;     // loss draws inside bound_check
  int upcross_functions = 1000;     // sampled prior functions per width
  int upcross_bins = 40;
  int posterior_sample_functions = 0;  // >0 emits sampled posterior functions
  int nngp_tanh_samples = 200000;      // feature count for the tanh kernel

  // sine dataset generator
  int sine_n = 20;
  double sine_frequency = 3.0;
  double sine_noise_sd = 0.1;

  void validate() const;
};

// Builds and validates a config from a parsed INI document; unknown
// sections or keys are errors.
ExperimentConfig config_from_ini(const ini::Document& doc);
ExperimentConfig load_config(const std::string& path);

// Base-seed precedence: explicit flag > WIDTHLAB_SEED environment variable >
// config file value. Throws when the env var is set but not an integer.
std::uint64_t resolve_seed(const ExperimentConfig& cfg,
                           std::optional<std::uint64_t> flag_seed);

// Training seed for sweep cell (width, seed); decorrelates cells and lets a
// single run reproduce any sweep cell exactly.
std::uint64_t cell_seed(std::uint64_t base, int width, std::uint64_t seed);

// Standardized dataset per cfg.dataset: two_points is the fixed pair
// (-1,-1),(1,1); sine draws y = sin(f x) + noise on a uniform grid over
// [-2,2] with a seed derived from cfg.base_seed; csv:<path> loads an
// "x,y"-headed file. All are z-scored.
Dataset make_dataset(const ExperimentConfig& cfg);

// Uniform 1-D grid of grid.n_points over [min(x) - padding, max(x) +
// padding] in standardized units.
Eigen::MatrixXd make_grid(const Dataset& data, const GridSpec& grid);

// One sweep-cell summary (a convergence.csv row).
struct RunRecord {
  std::string dataset;
  int width = 0;
  std::uint64_t seed = 0;
  bool ok = false;  // false: training diverged, numeric fields are nan
  double elbo = 0;
  double kl = 0;
  double expected_nll = 0;
  double error_at_params = 0;  // expected_nll minus the Gaussian constants
  double c_x = 0;
  bool loss_premise_holds = false;  // error_at_params + kl <= c_x
  double mean_dist = 0;  // L2 over the grid, posterior vs prior mean
  double var_dist = 0;   // L2 over the grid, posterior vs prior variance
  // Erf only; nan otherwise.
  double bound_max = 0;
  double mean_abs_max = 0;
  int bound_pointwise_ok = -1;  // 1/0 for erf, -1 (written as nan) otherwise
  double wall_seconds = 0;      // segregated into timing.csv
};

struct ConvergenceResult {
  std::vector<RunRecord> records;      // canonical (width, seed) order
  std::vector<std::string> files;      // paths written
};

// Trains every (width, seed) cell (cfg.jobs workers), writes
// convergence.csv and timing.csv into cfg.out_dir. Distances use the
// deterministic moment paths, so the CSV is byte-identical across reruns
// and worker counts. A diverged cell becomes an ok=0 row.
ConvergenceResult run_convergence(const ExperimentConfig& cfg);

// prior_check.csv (per width x grid point: MC prior moments + NNGP kernel
// diagonal), upcrossings.csv (binned zero-upcrossing locations over
// cfg.upcross_functions sampled functions), upcross_summary.csv (mean
// upcrossings per function per width). Returns paths written.
std::vector<std::string> run_prior_check(const ExperimentConfig& cfg);

// posterior_k<width>_s<seed>.csv: grid, MC posterior predictive, MC prior
// predictive (same draws as run_prior_check), exact NNGP posterior.
// Optionally posterior_samples_k<width>_s<seed>.csv (long format).
std::vector<std::string> run_posterior(const ExperimentConfig& cfg, int width,
                                       std::uint64_t seed);

// param_density_k<width>_s<seed>.csv: per parameter group (w1, b1, w2) and
// quantity (mu, sigma2), the 1/25/50/75/99% quantiles of the trained
// variational parameters.
std::vector<std::string> run_param_density(const ExperimentConfig& cfg,
                                           int width, std::uint64_t seed);

// bound_summary_k<width>_s<seed>.csv (premise, budgets, verdict) and
// bound_grid_k<width>_s<seed>.csv (per grid point: bound vs closed-form
// |posterior mean|). Erf only.
std::vector<std::string> run_bound_check(const ExperimentConfig& cfg, int width,
                                         std::uint64_t seed);

// dataset.csv: raw and standardized columns side by side.
std::vector<std::string> write_dataset_csv(const ExperimentConfig& cfg);

// Type-7 (linear interpolation) sample quantile; p in [0, 1].
double quantile(std::vector<double> values, double p);

}  // namespace widthlab
