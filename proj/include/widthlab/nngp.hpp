#pragma once

#include <cstdint>

#include <widthlab/prior.hpp>

namespace widthlab {

// Infinite-width kernel selector. The tanh family has no standard closed
// form, so it carries a fixed Monte Carlo budget and seed: every evaluation
// shares one random-feature draw, which keeps kernel matrices reproducible,
// symmetric, and positive semidefinite by construction.
struct KernelKind {
  enum class Family { ErfAnalytic, ReluArcCosine, TanhMonteCarlo };

  Family family = Family::ErfAnalytic;
  int n_samples = 200000;
  std::uint64_t seed = 0;

  static KernelKind erf_analytic() { return {Family::ErfAnalytic, 0, 0}; }
  static KernelKind relu_arccos() { return {Family::ReluArcCosine, 0, 0}; }
  static KernelKind tanh_mc(int n_samples, std::uint64_t seed) {
    return {Family::TanhMonteCarlo, n_samples, seed};
  }
  static KernelKind for_activation(Activation a, int n_samples = 200000,
                                   std::uint64_t seed = 0);
};

// Covariance of the infinite-width function prior between two inputs.
double nngp_kernel(const PriorConfig& prior, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& x2, const KernelKind& kind);

// Cross-kernel matrix k(xs_i, xs2_j). For TanhMonteCarlo all entries reuse
// one feature draw.
Eigen::MatrixXd nngp_kernel_matrix(const PriorConfig& prior,
                                   const Eigen::MatrixXd& xs,
                                   const Eigen::MatrixXd& xs2,
                                   const KernelKind& kind);

// Square kernel matrix on one input set (symmetric).
Eigen::MatrixXd nngp_kernel_matrix(const PriorConfig& prior,
                                   const Eigen::MatrixXd& xs,
                                   const KernelKind& kind);

struct GpPosterior {
  Eigen::MatrixXd train_inputs;
  Eigen::VectorXd train_targets;
  KernelKind kind;
  PriorConfig prior;
  Eigen::MatrixXd factor;  // lower Cholesky of K + (sigma2_noise + jitter) I
  Eigen::VectorXd alpha;   // (K + (sigma2_noise + jitter) I)^{-1} y
  double jitter_used = 0.0;
};

// Exact GP regression. Cholesky with jitter escalation 0, 1e-10, 1e-8, 1e-6;
// throws std::runtime_error if the factorization still fails at max jitter.
GpPosterior gp_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   const KernelKind& kind, const PriorConfig& prior);

struct GpPrediction {
  Eigen::VectorXd means;
  Eigen::VectorXd variances;
};

// Posterior mean k*^T alpha and variance k** - |L^{-1} k*|^2 per row of xs.
// Variances in [-1e-10, 0) clamp to 0; anything more negative throws.
GpPrediction gp_predict(const GpPosterior& post, const Eigen::MatrixXd& xs);

}  // namespace widthlab
