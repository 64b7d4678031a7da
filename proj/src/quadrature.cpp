#include "widthlab/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace widthlab {

GaussHermite::GaussHermite(int n) {
  if (n < 1) throw std::invalid_argument("GaussHermite: need n >= 1");

  // Jacobi matrix for (physicists') Hermite polynomials: zero diagonal,
  // off-diagonal sqrt(i/2).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = std::sqrt(0.5 * i);
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("GaussHermite: eigen decomposition failed");

  // Hermite abscissae t_i map to standard-normal points sqrt(2) t_i; the
  // weight mu0 * q_{0i}^2 normalizes to mu0 = sqrt(pi), so after dividing by
  // sqrt(pi) the weights sum to one.
  nodes_ = std::numbers::sqrt2 * es.eigenvalues();
  weights_ = es.eigenvectors().row(0).transpose().array().square();
  weights_ /= weights_.sum();
}

GaussLegendre::GaussLegendre(int n) {
  if (n < 1) throw std::invalid_argument("GaussLegendre: need n >= 1");

  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("GaussLegendre: eigen decomposition failed");

  nodes_ = es.eigenvalues();
  // mu0 = integral of 1 over [-1, 1].
  weights_ = 2.0 * es.eigenvectors().row(0).transpose().array().square();
}

NormalExpectation::NormalExpectation(int panel_nodes) : rule_(panel_nodes) {}

int NormalExpectation::panel_count(double sd) {
  if (!(sd >= 0.0))
    throw std::invalid_argument("NormalExpectation: sd must be >= 0");
  const int panels =
      static_cast<int>(std::ceil(20.0 * std::max(1.0, sd) / 3.0));
  return std::min(std::max(panels, 10), 600);
}

}  // namespace widthlab
