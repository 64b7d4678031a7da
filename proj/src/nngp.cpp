#include <widthlab/nngp.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>

#include <widthlab/rng.hpp>

namespace widthlab {

using rng::derive_seed;
using rng::fill_standard_normal;

namespace {

constexpr std::uint64_t kFeatureStream = 0x7a9c;

double preact_cov(const PriorConfig& prior, const Eigen::VectorXd& a,
                  const Eigen::VectorXd& b) {
  return prior.sigma2_w1 * a.dot(b) + prior.sigma2_b1;
}

double erf_entry(const PriorConfig& prior, double s11, double s22,
                 double s12) {
  const double r = 2.0 * s12 / std::sqrt((1.0 + 2.0 * s11) * (1.0 + 2.0 * s22));
  return prior.sigma2_w2 * (2.0 / std::numbers::pi) *
         std::asin(std::clamp(r, -1.0, 1.0));
}

double relu_entry(const PriorConfig& prior, double s11, double s22,
                  double s12) {
  const double norm = std::sqrt(s11 * s22);
  const double rho = std::clamp(s12 / norm, -1.0, 1.0);
  const double phi = std::acos(rho);
  return prior.sigma2_w2 * norm / (2.0 * std::numbers::pi) *
         (std::sin(phi) + (std::numbers::pi - phi) * std::cos(phi));
}

// Shared random-feature draw for the tanh kernel: M hidden units with the
// Eqs. 2-3 input-layer prior, identical across every evaluation at a fixed
// (seed, input dimension).
struct TanhFeatures {
  Eigen::MatrixXd w;  // M x D
  Eigen::VectorXd b;  // M
};

TanhFeatures tanh_features(const KernelKind& kind, Eigen::Index dim) {
  if (kind.n_samples < 2)
    throw std::invalid_argument("tanh kernel needs at least 2 samples");
  TanhFeatures f;
  f.w.resize(kind.n_samples, dim);
  f.b.resize(kind.n_samples);
  std::mt19937_64 eng(derive_seed(kind.seed, kFeatureStream));
  fill_standard_normal(eng, f.w.data(), f.w.size());
  fill_standard_normal(eng, f.b);
  return f;
}

// M-vector of tanh unit activations at one input.
Eigen::VectorXd tanh_activations(const PriorConfig& prior,
                                 const TanhFeatures& f,
                                 const Eigen::VectorXd& x) {
  return (std::sqrt(prior.sigma2_w1) * (f.w * x) +
          std::sqrt(prior.sigma2_b1) * f.b)
      .array()
      .tanh();
}

Eigen::MatrixXd tanh_activation_matrix(const PriorConfig& prior,
                                       const TanhFeatures& f,
                                       const Eigen::MatrixXd& xs) {
  Eigen::MatrixXd z = std::sqrt(prior.sigma2_w1) * (xs * f.w.transpose());
  z.rowwise() += std::sqrt(prior.sigma2_b1) * f.b.transpose();
  return z.array().tanh();
}

void check_inputs(const PriorConfig& prior, Eigen::Index d1, Eigen::Index d2) {
  prior.validate();
  if (d1 != d2 || d1 == 0)
    throw std::invalid_argument("kernel inputs must share a positive dimension");
}

}  // namespace

KernelKind KernelKind::for_activation(Activation a, int n_samples,
                                      std::uint64_t seed) {
  switch (a) {
    case Activation::Erf:
      return erf_analytic();
    case Activation::Relu:
      return relu_arccos();
    case Activation::Tanh:
      return tanh_mc(n_samples, seed);
  }
  throw std::invalid_argument("unknown activation");
}

double nngp_kernel(const PriorConfig& prior, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& x2, const KernelKind& kind) {
  check_inputs(prior, x.size(), x2.size());
  switch (kind.family) {
    case KernelKind::Family::ErfAnalytic:
      return erf_entry(prior, preact_cov(prior, x, x),
                       preact_cov(prior, x2, x2), preact_cov(prior, x, x2));
    case KernelKind::Family::ReluArcCosine:
      return relu_entry(prior, preact_cov(prior, x, x),
                        preact_cov(prior, x2, x2), preact_cov(prior, x, x2));
    case KernelKind::Family::TanhMonteCarlo: {
      const TanhFeatures f = tanh_features(kind, x.size());
      return prior.sigma2_w2 *
             tanh_activations(prior, f, x).dot(tanh_activations(prior, f, x2)) /
             kind.n_samples;
    }
  }
  throw std::invalid_argument("unknown kernel family");
}

Eigen::MatrixXd nngp_kernel_matrix(const PriorConfig& prior,
                                   const Eigen::MatrixXd& xs,
                                   const Eigen::MatrixXd& xs2,
                                   const KernelKind& kind) {
  check_inputs(prior, xs.cols(), xs2.cols());
  Eigen::MatrixXd k(xs.rows(), xs2.rows());
  if (kind.family == KernelKind::Family::TanhMonteCarlo) {
    const TanhFeatures f = tanh_features(kind, xs.cols());
    const Eigen::MatrixXd a = tanh_activation_matrix(prior, f, xs);
    const Eigen::MatrixXd b = tanh_activation_matrix(prior, f, xs2);
    k.noalias() = (prior.sigma2_w2 / kind.n_samples) * (a * b.transpose());
    return k;
  }
  for (Eigen::Index i = 0; i < xs.rows(); ++i)
    for (Eigen::Index j = 0; j < xs2.rows(); ++j)
      k(i, j) = nngp_kernel(prior, xs.row(i).transpose(),
                            xs2.row(j).transpose(), kind);
  return k;
}

Eigen::MatrixXd nngp_kernel_matrix(const PriorConfig& prior,
                                   const Eigen::MatrixXd& xs,
                                   const KernelKind& kind) {
  check_inputs(prior, xs.cols(), xs.cols());
  if (kind.family == KernelKind::Family::TanhMonteCarlo) {
    const TanhFeatures f = tanh_features(kind, xs.cols());
    const Eigen::MatrixXd a = tanh_activation_matrix(prior, f, xs);
    Eigen::MatrixXd k(xs.rows(), xs.rows());
    k.noalias() = (prior.sigma2_w2 / kind.n_samples) * (a * a.transpose());
    return k;
  }
  Eigen::MatrixXd k(xs.rows(), xs.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i)
    for (Eigen::Index j = i; j < xs.rows(); ++j) {
      k(i, j) = nngp_kernel(prior, xs.row(i).transpose(),
                            xs.row(j).transpose(), kind);
      k(j, i) = k(i, j);
    }
  return k;
}

GpPosterior gp_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   const KernelKind& kind, const PriorConfig& prior) {
  if (x.rows() < 1) throw std::invalid_argument("need at least one point");
  if (x.rows() != y.size())
    throw std::invalid_argument("inputs and targets disagree in length");
  const Eigen::MatrixXd k = nngp_kernel_matrix(prior, x, kind);
  if (!k.allFinite()) throw std::runtime_error("kernel matrix is not finite");

  GpPosterior post;
  post.train_inputs = x;
  post.train_targets = y;
  post.kind = kind;
  post.prior = prior;
  for (const double jitter : {0.0, 1e-10, 1e-8, 1e-6}) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += prior.sigma2_noise + jitter;
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      post.factor = llt.matrixL();
      post.alpha = llt.solve(y);
      post.jitter_used = jitter;
      return post;
    }
  }
  throw std::runtime_error("Cholesky failed at maximum jitter");
}

GpPrediction gp_predict(const GpPosterior& post, const Eigen::MatrixXd& xs) {
  if (xs.cols() != post.train_inputs.cols())
    throw std::invalid_argument("prediction dimension mismatch");
  Eigen::MatrixXd cross;
  Eigen::VectorXd k_diag(xs.rows());
  if (post.kind.family == KernelKind::Family::TanhMonteCarlo) {
    const double scale = post.prior.sigma2_w2 / post.kind.n_samples;
    const TanhFeatures f = tanh_features(post.kind, xs.cols());
    const Eigen::MatrixXd at =
        tanh_activation_matrix(post.prior, f, post.train_inputs);
    const Eigen::MatrixXd axs = tanh_activation_matrix(post.prior, f, xs);
    cross.noalias() = scale * (at * axs.transpose());
    k_diag = scale * axs.rowwise().squaredNorm();
  } else {
    cross = nngp_kernel_matrix(post.prior, post.train_inputs, xs, post.kind);
    for (Eigen::Index i = 0; i < xs.rows(); ++i)
      k_diag[i] = nngp_kernel(post.prior, xs.row(i).transpose(),
                              xs.row(i).transpose(), post.kind);
  }
  GpPrediction out;
  out.means = cross.transpose() * post.alpha;
  out.variances.resize(xs.rows());
  const auto lower = post.factor.triangularView<Eigen::Lower>();
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const Eigen::VectorXd v = lower.solve(cross.col(i));
    double var = k_diag[i] - v.squaredNorm();
    if (var < -1e-10)
      throw std::runtime_error("predictive variance fell below -1e-10");
    out.variances[i] = std::max(var, 0.0);
  }
  return out;
}

}  // namespace widthlab
