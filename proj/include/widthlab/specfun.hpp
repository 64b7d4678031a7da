#pragma once

#include <Eigen/Core>

#include <span>

namespace widthlab::specfun {

// Scalar Gaussian N(mean, variance), variance >= 0.
struct GaussianScalar {
  double mean = 0.0;
  double variance = 1.0;
};

double erf(double z);
double std_normal_cdf(double z);

// E[Phi(z)] for z ~ N(mean, variance): Phi(mean / sqrt(1 + variance)).
double expected_probit(const GaussianScalar& g);

// E[erf(z)] for z ~ N(mean, variance): erf(mean / sqrt(1 + 2*variance)).
double expected_erf(const GaussianScalar& g);

// Pointwise majorant of erf(z)^2: 1 - exp(-(4/pi) z^2).
double polya_upper_bound(double z);

// Owen's T function T(h, a) = (1/2pi) integral_0^a
// exp(-h^2 (1+x^2)/2) / (1+x^2) dx, for any real h, a.
double owen_t(double h, double a);

// E[erf(z)^2] for z ~ N(mean, variance), exactly:
//   1 - 8 T(h, t0), h = sqrt(2) mean / sqrt(1 + 2 variance),
//   t0 = 1 / sqrt(1 + 4 variance).
double expected_erf_sq(const GaussianScalar& g);

struct BoundPair {
  double lhs = 0.0;
  double rhs = 0.0;
};

// lhs = sum_k exp(-c1 * mu_k^2), rhs = K * exp(-(c1/K) * sum_k mu_k^2).
// Convexity of exp gives lhs >= rhs. Requires c1 > 0 and a nonempty list.
BoundPair jensen_exp_bound(std::span<const double> mus, double c1);

// For a K x M matrix: lhs = sum_k (sum_m a_km)^2, rhs = M * sum_km a_km^2.
// Cauchy-Schwarz across the M columns gives lhs <= rhs.
BoundPair cauchy_group_bound(const Eigen::MatrixXd& a);

}  // namespace widthlab::specfun
