#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <widthlab/prior.hpp>

namespace widthlab {

// Factorized Gaussian over the flat parameter vector. sigma_i = exp(rho_i),
// so every variance stays positive without constraints on rho.
struct VariationalParams {
  Eigen::VectorXd mu;
  Eigen::VectorXd rho;

  static VariationalParams prior_point(const Architecture& arch);

  Eigen::VectorXd sigma() const { return rho.array().exp(); }
  void validate() const;
};

struct TrainConfig {
  int epochs = 20000;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int mc_samples = 64;
  double clip_norm = 10.0;
  int restart_period = 500;
  double lr_min = 0.0;
  std::uint64_t seed = 0;
  int record_every = 100;

  void validate() const;
};

struct ElboBreakdown {
  double expected_nll = 0.0;  // includes the N/2 log(2 pi noise) constant
  double kl = 0.0;
  double elbo = 0.0;          // -(expected_nll + kl)
};

struct TraceRow {
  int epoch = 0;
  double elbo = 0.0;
  double kl = 0.0;
  double expected_nll = 0.0;
  double learning_rate = 0.0;
  double grad_norm = 0.0;
};

using TrainTrace = std::vector<TraceRow>;

class TrainingDivergence : public std::runtime_error {
 public:
  TrainingDivergence(const std::string& what, TrainTrace partial)
      : std::runtime_error(what), trace(std::move(partial)) {}

  TrainTrace trace;
};

// mu ~ N(0,1), sigma^2 ~ InverseGamma(K+1, K): the implied parameter marginal
// has mean 0 and variance 2, and E[sigma^2] = 1.
VariationalParams init_variational(const Architecture& arch,
                                   std::uint64_t seed);

// (1/2) sum_i (mu_i^2 + sigma_i^2 - 1 - log sigma_i^2); zero exactly at the
// standard-normal prior point.
double kl_to_prior(const VariationalParams& vp);

// Reparameterized Monte Carlo estimate with a fixed draw set: theta = mu +
// sigma * eps, squared-error likelihood with variance prior.sigma2_noise.
// An empty dataset contributes no data term (KL only).
ElboBreakdown elbo_estimate(const VariationalParams& vp, const Dataset& data,
                            const Architecture& arch, const PriorConfig& prior,
                            int n_mc, std::uint64_t seed);

// Exact gradient of -elbo_estimate for the same seed (common random
// numbers), flat layout [d/dmu; d/drho]. Optionally reports the breakdown
// evaluated on the shared draws.
Eigen::VectorXd elbo_gradient(const VariationalParams& vp, const Dataset& data,
                              const Architecture& arch,
                              const PriorConfig& prior, int n_mc,
                              std::uint64_t seed,
                              ElboBreakdown* breakdown = nullptr);

struct TrainResult {
  VariationalParams params;
  TrainTrace trace;
};

// Full-batch momentum SGD on -ELBO with cosine-annealed learning rate, warm
// restarts every cfg.restart_period epochs, and global-norm gradient
// clipping. Fresh MC draws each epoch, derived from cfg.seed; fully
// deterministic. Throws TrainingDivergence on non-finite loss or gradient.
TrainResult train(const Architecture& arch, const PriorConfig& prior,
                  const Dataset& data, const TrainConfig& cfg);

struct PosteriorPredictive {
  Eigen::VectorXd means;
  Eigen::VectorXd variances;  // unbiased, over function draws
  Eigen::MatrixXd samples;    // n_samples x xs.rows() when kept, else empty
};

PosteriorPredictive posterior_predictive(const VariationalParams& vp,
                                         const Architecture& arch,
                                         const PriorConfig& prior,
                                         const Eigen::MatrixXd& xs,
                                         int n_samples, std::uint64_t seed,
                                         bool keep_samples = false);

struct PosteriorMoments {
  Eigen::VectorXd means;
  Eigen::VectorXd variances;
};

// Deterministic predictive mean and variance under the factorized Gaussian:
// the hidden-unit preactivations are Gaussian given x, so unit activation
// moments reduce to one-dimensional Gaussian expectations.
PosteriorMoments posterior_moments(const VariationalParams& vp,
                                   const Architecture& arch,
                                   const PriorConfig& prior,
                                   const Eigen::MatrixXd& xs);

// Closed-form predictive mean for the erf activation.
Eigen::VectorXd posterior_mean_exact_erf(const VariationalParams& vp,
                                         const Architecture& arch,
                                         const PriorConfig& prior,
                                         const Eigen::MatrixXd& xs);

struct BoundReport {
  double c_x = 0.0;
  // Data-fit error plus KL with the Gaussian log constants removed, so the
  // value is comparable against c_x.
  double loss_at_params = 0.0;
  double error_at_params = 0.0;
  double kl = 0.0;
  bool premise_holds = false;  // loss_at_params <= c_x

  // (1/2) sum_k mu^2 over each raw parameter block (max over input dims for
  // the input weights); each must stay below c_x whenever the premise holds.
  double budget_w1 = 0.0;
  double budget_b1 = 0.0;
  double budget_w2 = 0.0;
  bool budgets_hold = false;

  Eigen::VectorXd c_x_xstar;
  Eigen::VectorXd v_of_x;
  Eigen::VectorXd bound;
  Eigen::VectorXd mean_abs;
  // The width-collapse implication: either the premise fails, or the exact
  // posterior mean is inside the bound at every grid point.
  bool holds = false;
};

// Erf only (the closed-form mean path). loss_at_params is Monte Carlo with
// n_mc draws at a fixed seed; slack loosens the per-point mean comparison.
BoundReport bound_check(const VariationalParams& vp, const Architecture& arch,
                        const PriorConfig& prior, const Dataset& data,
                        const Eigen::MatrixXd& xs, int n_mc = 20000,
                        std::uint64_t seed = 0, double slack = 0.0);

}  // namespace widthlab
