#include "widthlab/specfun.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "widthlab/quadrature.hpp"

namespace widthlab::specfun {

double erf(double z) { return std::erf(z); }

double std_normal_cdf(double z) {
  // erfc keeps full relative accuracy in the lower tail, where
  // 0.5 * (1 + erf(z / sqrt(2))) would cancel.
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double expected_probit(const GaussianScalar& g) {
  if (!(g.variance >= 0.0))
    throw std::invalid_argument("expected_probit: variance must be >= 0");
  return std_normal_cdf(g.mean / std::sqrt(1.0 + g.variance));
}

double expected_erf(const GaussianScalar& g) {
  if (!(g.variance >= 0.0))
    throw std::invalid_argument("expected_erf: variance must be >= 0");
  return std::erf(g.mean / std::sqrt(1.0 + 2.0 * g.variance));
}

double polya_upper_bound(double z) {
  return -std::expm1(-(4.0 / std::numbers::pi) * z * z);
}

namespace {

// 48-point Gauss-Legendre on [0, 1]; plenty for the analytic Owen integrand
// once |a| <= 1 (the |a| > 1 case is folded back by Owen's identity below).
double owen_t_core(double h, double a) {
  static const GaussLegendre rule(48);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes().size(); ++i) {
    const double x = 0.5 * a * (rule.nodes()[i] + 1.0);
    acc += 0.5 * a * rule.weights()[i] *
           std::exp(-0.5 * h * h * (1.0 + x * x)) / (1.0 + x * x);
  }
  return acc / (2.0 * std::numbers::pi);
}

}  // namespace

double owen_t(double h, double a) {
  if (a < 0.0) return -owen_t(h, -a);
  if (h < 0.0) h = -h;
  if (a <= 1.0) return owen_t_core(h, a);
  // Owen's identity for h >= 0, a >= 0:
  //   T(h,a) = 1/2 Phi(h) + 1/2 Phi(ah) - Phi(h) Phi(ah) - T(ah, 1/a).
  const double ph = std_normal_cdf(h);
  const double pah = std_normal_cdf(a * h);
  return 0.5 * ph + 0.5 * pah - ph * pah - owen_t_core(a * h, 1.0 / a);
}

double expected_erf_sq(const GaussianScalar& g) {
  if (!(g.variance >= 0.0))
    throw std::invalid_argument("expected_erf_sq: variance must be >= 0");
  const double h =
      std::numbers::sqrt2 * g.mean / std::sqrt(1.0 + 2.0 * g.variance);
  const double t0 = 1.0 / std::sqrt(1.0 + 4.0 * g.variance);
  return 1.0 - 8.0 * owen_t(h, t0);
}

BoundPair jensen_exp_bound(std::span<const double> mus, double c1) {
  if (mus.empty())
    throw std::invalid_argument("jensen_exp_bound: empty mean list");
  if (!(c1 > 0.0))
    throw std::invalid_argument("jensen_exp_bound: c1 must be > 0");
  const double k = static_cast<double>(mus.size());
  double lhs = 0.0;
  double sum_sq = 0.0;
  for (double mu : mus) {
    lhs += std::exp(-c1 * mu * mu);
    sum_sq += mu * mu;
  }
  return {lhs, k * std::exp(-(c1 / k) * sum_sq)};
}

BoundPair cauchy_group_bound(const Eigen::MatrixXd& a) {
  if (a.size() == 0)
    throw std::invalid_argument("cauchy_group_bound: empty matrix");
  const double m = static_cast<double>(a.cols());
  const double lhs = a.rowwise().sum().squaredNorm();
  const double rhs = m * a.squaredNorm();
  return {lhs, rhs};
}

}  // namespace widthlab::specfun
