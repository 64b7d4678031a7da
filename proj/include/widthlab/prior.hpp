#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "widthlab/quadrature.hpp"
#include "widthlab/specfun.hpp"

namespace widthlab {

enum class Activation { Erf, Tanh, Relu };

Activation activation_from_string(std::string_view s);
std::string to_string(Activation a);

// Prior scales for the single-hidden-layer regression network
//   f(x) = sqrt(sigma2_w2 / K) * sum_k w2_k * psi(sqrt(sigma2_w1) w1_k.x
//                                               + sqrt(sigma2_b1) b1_k)
// with all raw parameters i.i.d. N(0,1). sigma2_w2 is the total output-layer
// variance; the 1/K factor keeps the function-space prior width-invariant.
struct PriorConfig {
  double sigma2_w1 = 2.0;
  double sigma2_b1 = 2.0;
  double sigma2_w2 = 2.0;
  double sigma2_noise = 0.01;

  void validate() const;  // throws unless all four are strictly positive
};

struct Architecture {
  int input_dim = 1;
  int width = 1;
  Activation activation = Activation::Erf;

  void validate() const;
  int param_count() const { return width * (input_dim + 2); }
};

// Raw network parameters. Flat layout: w1 row-major (unit-major), then b1,
// then w2. flatten/unflatten round-trip bit-exactly.
struct ParamVector {
  Eigen::MatrixXd w1;  // K x D
  Eigen::VectorXd b1;  // K
  Eigen::VectorXd w2;  // K

  static ParamVector zeros(const Architecture& arch);
  static ParamVector from_flat(const Architecture& arch,
                               const Eigen::VectorXd& flat);
  Eigen::VectorXd to_flat() const;
};

struct Standardization {
  Eigen::VectorXd x_mean;
  Eigen::VectorXd x_scale;
  double y_mean = 0.0;
  double y_scale = 1.0;
};

struct Dataset {
  std::string name;
  Eigen::MatrixXd x;  // N x D
  Eigen::VectorXd y;  // N
  std::optional<Standardization> standardization;

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index dim() const { return x.cols(); }
};

// Z-scores each input column and the targets with population (divide-by-N)
// moments. Throws on an (effectively) zero-variance column; a single-row
// dataset is centered with scales fixed to 1.
Dataset zscore(const Dataset& raw);
// Inverse transform; requires raw.standardization.
Dataset unzscore(const Dataset& standardized);

double activation_apply(Activation a, double z);

double forward(const Architecture& arch, const PriorConfig& prior,
               const ParamVector& params, const Eigen::VectorXd& x);
// forward over the rows of xs.
Eigen::VectorXd forward_batch(const Architecture& arch,
                              const PriorConfig& prior,
                              const ParamVector& params,
                              const Eigen::MatrixXd& xs);

// Mean and second moment of psi(z), z ~ N(mean, variance). Closed forms for
// erf and relu; deterministic scale-adaptive quadrature for tanh.
double expected_activation(Activation a, const specfun::GaussianScalar& z);
double expected_activation_sq(Activation a, const specfun::GaussianScalar& z);

// Pre-activation prior variance s^2 = sigma2_w1 |x|^2 + sigma2_b1.
double preactivation_variance(const PriorConfig& prior,
                              const Eigen::VectorXd& x);

// V(x) = sigma2_w2 * Var[psi(s * eps)], eps ~ N(0,1). Closed form for erf;
// Gauss-Hermite for tanh/relu.
double activation_prior_variance(const Architecture& arch,
                                 const PriorConfig& prior,
                                 const Eigen::VectorXd& x);

// Prior predictive variance of f(x): sigma2_w2 * E[psi(s * eps)^2]. Equals
// activation_prior_variance for odd activations (erf, tanh) but not for relu.
double prior_predictive_variance(const Architecture& arch,
                                 const PriorConfig& prior,
                                 const Eigen::VectorXd& x);

// C_X = (1 / (2 sigma2_noise)) * sum_n (y_n^2 + V(x_n)).
double c_x(const Dataset& data, const Architecture& arch,
           const PriorConfig& prior);

// C_{X,x*} = 2 (D+1) C_X (sigma2_w1 |x*|^2 + sigma2_b1).
double c_x_xstar(double c_x_value, const Eigen::VectorXd& x_star,
                 const PriorConfig& prior);

// Width-K cap on the posterior predictive mean magnitude:
//   sqrt(2 sigma2_w2 C_X) * sqrt(1 - exp(-(4/pi) C_{X,x*} / K)).
double theorem_bound(int width, double c_x_value, double c_x_xstar_value,
                     const PriorConfig& prior);

struct MomentSummary {
  Eigen::VectorXd means;
  Eigen::VectorXd variances;    // unbiased sample variances
  Eigen::VectorXd variance_se;  // from the empirical fourth moment
};

// Monte Carlo prior predictive moments at the rows of xs, deterministic for a
// fixed (n_samples, seed).
MomentSummary prior_predictive_moments(const Architecture& arch,
                                       const PriorConfig& prior,
                                       const Eigen::MatrixXd& xs,
                                       int n_samples, std::uint64_t seed);

// x-locations where the piecewise-linear interpolant of (grid_x, values)
// crosses zero upward: values[i] < 0 and values[i+1] >= 0. grid_x must be
// strictly increasing.
std::vector<double> upcrossings(const Eigen::VectorXd& grid_x,
                                const Eigen::VectorXd& values);

}  // namespace widthlab
