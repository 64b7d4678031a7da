#pragma once

#include <Eigen/Core>

#include <cmath>

namespace widthlab {

// Gauss-Hermite rule expressed against the standard normal weight.
// E[g(eps)] for eps ~ N(0,1) is approximated by sum_i weights[i] * g(nodes[i]);
// the weights are normalized to sum to one. Nodes/weights come from the
// Golub-Welsch eigen decomposition of the Hermite Jacobi matrix, so the rule
// is exact for polynomials up to degree 2n-1.
class GaussHermite {
 public:
  explicit GaussHermite(int n = 64);

  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  template <class F>
  double expect(F&& g) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < nodes_.size(); ++i)
      acc += weights_[i] * g(nodes_[i]);
    return acc;
  }

  // E[g(z)] for z ~ N(mean, sd^2).
  template <class F>
  double expect_affine(double mean, double sd, F&& g) const {
    return expect([&](double t) { return g(mean + sd * t); });
  }

 private:
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
};

// Gauss-Legendre rule on [-1, 1].
class GaussLegendre {
 public:
  explicit GaussLegendre(int n);

  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }

 private:
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
};

// Deterministic E[g(mean + sd * eps)], eps ~ N(0,1), built as composite
// Gauss-Legendre panels over eps in [-10, 10]. The panel count scales with sd
// so that integrands which saturate on an O(1) scale in z = mean + sd * eps
// (tanh and friends) stay resolved; plain Gauss-Hermite loses several digits
// on those once sd is large.
class NormalExpectation {
 public:
  explicit NormalExpectation(int panel_nodes = 12);

  template <class F>
  double expect(double mean, double sd, F&& g) const {
    const double half_range = 10.0;
    const int panels = panel_count(sd);
    const double width = 2.0 * half_range / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double center = -half_range + (p + 0.5) * width;
      const double h = 0.5 * width;
      for (Eigen::Index i = 0; i < rule_.nodes().size(); ++i) {
        const double t = center + h * rule_.nodes()[i];
        acc += h * rule_.weights()[i] * g(mean + sd * t) *
               std::exp(-0.5 * t * t);
      }
    }
    return acc * 0.3989422804014326779;  // 1/sqrt(2 pi)
  }

 private:
  static int panel_count(double sd);
  GaussLegendre rule_;
};

}  // namespace widthlab
