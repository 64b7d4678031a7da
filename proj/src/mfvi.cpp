#include <widthlab/mfvi.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include <widthlab/rng.hpp>
#include <widthlab/specfun.hpp>

namespace widthlab {

using rng::derive_seed;
using rng::fill_standard_normal;

namespace {

constexpr std::uint64_t kInitStream = 0x1f17;
constexpr std::uint64_t kDrawStream = 0xe1b0;
constexpr std::uint64_t kEpochStream = 0x3e90;
constexpr std::uint64_t kPredictiveStream = 0x9d1c;
constexpr std::uint64_t kBoundStream = 0xb0bd;

constexpr double kTwoOverSqrtPi = 1.1283791670955126;

// Scratch budget (in doubles) for one MC evaluation block across all of its
// per-sample buffers; keeps peak memory flat however many draws are asked
// for.
constexpr std::ptrdiff_t kDrawChunkDoubles = 8'000'000;

using DynStride = Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>;

// K x S view of the w1 rows for one input dimension. The flat layout stores
// w1 unit-major (row k*D+d), so rows for dimension d sit D apart.
Eigen::Map<const Eigen::MatrixXd, Eigen::Unaligned, DynStride> w1_rows(
    const Eigen::MatrixXd& m, int d, int width, int input_dim) {
  return {m.data() + d, width, m.cols(), DynStride(m.rows(), input_dim)};
}

Eigen::Map<Eigen::VectorXd, Eigen::Unaligned, Eigen::InnerStride<>> w1_coords(
    double* base, int d, int width, int input_dim) {
  return {base + d, static_cast<Eigen::Index>(width),
          Eigen::InnerStride<>(input_dim)};
}

void check_shapes(const VariationalParams& vp, const Dataset& data,
                  const Architecture& arch, const PriorConfig& prior,
                  int n_mc) {
  arch.validate();
  prior.validate();
  vp.validate();
  if (vp.mu.size() != arch.param_count())
    throw std::invalid_argument("variational size does not match architecture");
  if (n_mc < 1) throw std::invalid_argument("n_mc must be at least 1");
  if (data.size() > 0 && data.dim() != arch.input_dim)
    throw std::invalid_argument("dataset dimension does not match architecture");
}

struct EvalBuffers {
  Eigen::MatrixXd eps;
  Eigen::MatrixXd theta;
  std::vector<Eigen::MatrixXd> act;
  std::vector<Eigen::MatrixXd> dact;
  Eigen::MatrixXd preds;
  Eigen::MatrixXd resid;
  Eigen::MatrixXd z;
  Eigen::MatrixXd scratch;
};

// Shared core for elbo_estimate and elbo_gradient: one fixed draw matrix,
// vectorized over units and samples. When grad is non-null it receives the
// gradient of -elbo in [d/dmu; d/drho] layout.
ElboBreakdown evaluate(const VariationalParams& vp, const Dataset& data,
                       const Architecture& arch, const PriorConfig& prior,
                       int n_mc, std::uint64_t seed, Eigen::VectorXd* grad,
                       EvalBuffers& buf) {
  check_shapes(vp, data, arch, prior, n_mc);
  const int P = arch.param_count();
  const int K = arch.width;
  const int D = arch.input_dim;
  const int S = n_mc;
  const Eigen::Index N = data.size();
  const double sw1 = std::sqrt(prior.sigma2_w1);
  const double sb1 = std::sqrt(prior.sigma2_b1);
  const double cscale = std::sqrt(prior.sigma2_w2 / K);
  const Eigen::VectorXd sigma = vp.sigma();

  // Draws are consumed in column blocks so wide networks with large S keep a
  // fixed memory envelope (the unblocked P x S layout is ~7.7 GB at width
  // 8000 with 20000 draws). The engine is read sequentially, so the draw
  // stream is byte-identical to a single P x S fill.
  const std::ptrdiff_t per_column =
      2 * (static_cast<std::ptrdiff_t>(P) + N * K) + 2 * N;
  const int chunk = static_cast<int>(
      std::clamp<std::ptrdiff_t>(kDrawChunkDoubles / per_column, 1, S));
  std::mt19937_64 eng(derive_seed(seed, kDrawStream));
  if (grad != nullptr) grad->setZero(2 * P);
  double error_sum = 0.0;

  for (int s0 = 0; s0 < S; s0 += chunk) {
    const int sc = std::min(chunk, S - s0);
    buf.eps.resize(P, sc);
    fill_standard_normal(eng, buf.eps.data(),
                         static_cast<std::ptrdiff_t>(P) * sc);
    buf.theta.resize(P, sc);
    buf.theta.array() = buf.eps.array().colwise() * sigma.array();
    buf.theta.colwise() += vp.mu;

    const auto b1_theta = buf.theta.middleRows(K * D, K);
    const auto w2_theta = buf.theta.middleRows(K * D + K, K);
    if (N == 0) continue;

    buf.preds.resize(N, sc);
    buf.act.resize(static_cast<std::size_t>(N));
    if (grad != nullptr) buf.dact.resize(static_cast<std::size_t>(N));
    for (Eigen::Index n = 0; n < N; ++n) {
      buf.z.noalias() = sb1 * b1_theta;
      for (int d = 0; d < D; ++d)
        buf.z.noalias() += (sw1 * data.x(n, d)) * w1_rows(buf.theta, d, K, D);

      Eigen::MatrixXd& a = buf.act[static_cast<std::size_t>(n)];
      a.resize(K, sc);
      switch (arch.activation) {
        case Activation::Erf:
          a = buf.z.unaryExpr([](double t) { return std::erf(t); });
          if (grad != nullptr)
            buf.dact[static_cast<std::size_t>(n)] =
                kTwoOverSqrtPi * (-buf.z.array().square()).exp();
          break;
        case Activation::Tanh:
          a = buf.z.array().tanh();
          if (grad != nullptr)
            buf.dact[static_cast<std::size_t>(n)] = 1.0 - a.array().square();
          break;
        case Activation::Relu:
          a = buf.z.array().max(0.0);
          if (grad != nullptr)
            buf.dact[static_cast<std::size_t>(n)] =
                (buf.z.array() > 0.0).cast<double>();
          break;
      }
      buf.preds.row(n) =
          cscale * (w2_theta.array() * a.array()).colwise().sum();
    }
    buf.resid = (-buf.preds).colwise() + data.y;
    error_sum += buf.resid.squaredNorm();

    if (grad != nullptr) {
      const auto b1_eps = buf.eps.middleRows(K * D, K);
      const auto w2_eps = buf.eps.middleRows(K * D + K, K);
      const double w = 1.0 / (prior.sigma2_noise * S);
      for (Eigen::Index n = 0; n < N; ++n) {
        const std::size_t un = static_cast<std::size_t>(n);
        const Eigen::RowVectorXd gf = -w * buf.resid.row(n);

        buf.scratch = buf.act[un].array().rowwise() * gf.array();
        grad->segment(K * D + K, K) += cscale * buf.scratch.rowwise().sum();
        grad->segment(P + K * D + K, K) +=
            cscale *
            (buf.scratch.array() * w2_eps.array()).rowwise().sum().matrix();

        buf.scratch =
            cscale * ((w2_theta.array() * buf.dact[un].array()).rowwise() *
                      gf.array());
        const Eigen::VectorXd row_sum = buf.scratch.rowwise().sum();
        grad->segment(K * D, K) += sb1 * row_sum;
        grad->segment(P + K * D, K) +=
            sb1 * (buf.scratch.array() * b1_eps.array()).rowwise().sum().matrix();
        for (int d = 0; d < D; ++d) {
          w1_coords(grad->data(), d, K, D) += (sw1 * data.x(n, d)) * row_sum;
          w1_coords(grad->data() + P, d, K, D) +=
              (sw1 * data.x(n, d)) *
              (buf.scratch.array() * w1_rows(buf.eps, d, K, D).array())
                  .rowwise()
                  .sum()
                  .matrix();
        }
      }
    }
  }

  ElboBreakdown out;
  out.kl = kl_to_prior(vp);
  out.expected_nll =
      error_sum / (2.0 * prior.sigma2_noise * S) +
      static_cast<double>(N) * 0.5 *
          std::log(2.0 * std::numbers::pi * prior.sigma2_noise);
  out.elbo = -(out.expected_nll + out.kl);

  if (grad != nullptr) {
    grad->tail(P).array() *= sigma.array();
    grad->head(P) += vp.mu;
    grad->tail(P).array() += sigma.array().square() - 1.0;
  }
  return out;
}

}  // namespace

VariationalParams VariationalParams::prior_point(const Architecture& arch) {
  arch.validate();
  VariationalParams vp;
  vp.mu = Eigen::VectorXd::Zero(arch.param_count());
  vp.rho = Eigen::VectorXd::Zero(arch.param_count());
  return vp;
}

void VariationalParams::validate() const {
  if (mu.size() != rho.size() || mu.size() == 0)
    throw std::invalid_argument("mu and rho must be non-empty, equal length");
}

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (learning_rate <= 0.0)
    throw std::invalid_argument("learning_rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0)
    throw std::invalid_argument("momentum must lie in [0, 1)");
  if (mc_samples < 1)
    throw std::invalid_argument("mc_samples must be positive");
  if (clip_norm <= 0.0)
    throw std::invalid_argument("clip_norm must be positive");
  if (restart_period < 1)
    throw std::invalid_argument("restart_period must be positive");
  if (lr_min < 0.0 || lr_min > learning_rate)
    throw std::invalid_argument("lr_min must lie in [0, learning_rate]");
  if (record_every < 1)
    throw std::invalid_argument("record_every must be positive");
}

VariationalParams init_variational(const Architecture& arch,
                                   std::uint64_t seed) {
  arch.validate();
  const int P = arch.param_count();
  VariationalParams vp;
  vp.mu.resize(P);
  vp.rho.resize(P);
  std::mt19937_64 eng(derive_seed(seed, kInitStream));
  fill_standard_normal(eng, vp.mu);
  // sigma^2 ~ InverseGamma(nu + 1, nu) with nu = width, drawn as nu over a
  // Gamma(nu + 1, 1) variate; E[sigma^2] = 1 for every width.
  const double nu = static_cast<double>(arch.width);
  std::gamma_distribution<double> gamma(nu + 1.0, 1.0);
  for (int i = 0; i < P; ++i) vp.rho[i] = 0.5 * std::log(nu / gamma(eng));
  return vp;
}

double kl_to_prior(const VariationalParams& vp) {
  vp.validate();
  const double s2_sum = (2.0 * vp.rho.array()).exp().sum();
  return 0.5 * (vp.mu.squaredNorm() + s2_sum -
                static_cast<double>(vp.mu.size()) - 2.0 * vp.rho.sum());
}

ElboBreakdown elbo_estimate(const VariationalParams& vp, const Dataset& data,
                            const Architecture& arch, const PriorConfig& prior,
                            int n_mc, std::uint64_t seed) {
  EvalBuffers buf;
  return evaluate(vp, data, arch, prior, n_mc, seed, nullptr, buf);
}

Eigen::VectorXd elbo_gradient(const VariationalParams& vp, const Dataset& data,
                              const Architecture& arch,
                              const PriorConfig& prior, int n_mc,
                              std::uint64_t seed, ElboBreakdown* breakdown) {
  EvalBuffers buf;
  Eigen::VectorXd grad;
  const ElboBreakdown bd =
      evaluate(vp, data, arch, prior, n_mc, seed, &grad, buf);
  if (breakdown != nullptr) *breakdown = bd;
  return grad;
}

TrainResult train(const Architecture& arch, const PriorConfig& prior,
                  const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  VariationalParams vp = init_variational(arch, cfg.seed);
  const int P = arch.param_count();
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(2 * P);
  Eigen::VectorXd grad;
  EvalBuffers buf;
  TrainTrace trace;
  for (int t = 0; t < cfg.epochs; ++t) {
    const std::uint64_t epoch_seed =
        derive_seed(cfg.seed, kEpochStream, static_cast<std::uint64_t>(t));
    const ElboBreakdown bd =
        evaluate(vp, data, arch, prior, cfg.mc_samples, epoch_seed, &grad, buf);
    const double grad_norm = grad.norm();
    if (!std::isfinite(bd.elbo) || !std::isfinite(grad_norm))
      throw TrainingDivergence(
          "training diverged at epoch " + std::to_string(t), std::move(trace));

    const double phase =
        static_cast<double>(t % cfg.restart_period) / cfg.restart_period;
    const double lr = cfg.lr_min +
                      0.5 * (cfg.learning_rate - cfg.lr_min) *
                          (1.0 + std::cos(std::numbers::pi * phase));
    if (t % cfg.record_every == 0 || t + 1 == cfg.epochs)
      trace.push_back({t, bd.elbo, bd.kl, bd.expected_nll, lr, grad_norm});

    if (grad_norm > cfg.clip_norm) grad *= cfg.clip_norm / grad_norm;
    velocity = cfg.momentum * velocity + grad;
    vp.mu -= lr * velocity.head(P);
    vp.rho -= lr * velocity.tail(P);
  }
  return {std::move(vp), std::move(trace)};
}

PosteriorPredictive posterior_predictive(const VariationalParams& vp,
                                         const Architecture& arch,
                                         const PriorConfig& prior,
                                         const Eigen::MatrixXd& xs,
                                         int n_samples, std::uint64_t seed,
                                         bool keep_samples) {
  arch.validate();
  prior.validate();
  vp.validate();
  if (vp.mu.size() != arch.param_count())
    throw std::invalid_argument("variational size does not match architecture");
  if (n_samples < 2) throw std::invalid_argument("need at least 2 samples");
  if (xs.cols() != arch.input_dim)
    throw std::invalid_argument("xs dimension does not match architecture");

  const int P = arch.param_count();
  const Eigen::VectorXd sigma = vp.sigma();
  std::mt19937_64 eng(derive_seed(seed, kPredictiveStream));
  Eigen::VectorXd flat(P);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(xs.rows());
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(xs.rows());
  PosteriorPredictive out;
  if (keep_samples) out.samples.resize(n_samples, xs.rows());
  for (int s = 0; s < n_samples; ++s) {
    fill_standard_normal(eng, flat);
    flat.array() = vp.mu.array() + sigma.array() * flat.array();
    const Eigen::VectorXd f =
        forward_batch(arch, prior, ParamVector::from_flat(arch, flat), xs);
    sum += f;
    sum_sq += f.cwiseProduct(f);
    if (keep_samples) out.samples.row(s) = f;
  }
  out.means = sum / n_samples;
  out.variances = ((sum_sq - sum.cwiseProduct(sum) / n_samples) /
                   (n_samples - 1.0))
                      .cwiseMax(0.0);
  return out;
}

PosteriorMoments posterior_moments(const VariationalParams& vp,
                                   const Architecture& arch,
                                   const PriorConfig& prior,
                                   const Eigen::MatrixXd& xs) {
  arch.validate();
  prior.validate();
  vp.validate();
  if (vp.mu.size() != arch.param_count())
    throw std::invalid_argument("variational size does not match architecture");
  if (xs.cols() != arch.input_dim)
    throw std::invalid_argument("xs dimension does not match architecture");

  const int K = arch.width;
  const int D = arch.input_dim;
  const double sw1 = std::sqrt(prior.sigma2_w1);
  const double sb1 = std::sqrt(prior.sigma2_b1);
  const double cscale = std::sqrt(prior.sigma2_w2 / K);
  const Eigen::VectorXd sig2 = (2.0 * vp.rho.array()).exp();

  PosteriorMoments out;
  out.means.resize(xs.rows());
  out.variances.resize(xs.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    double mean = 0.0;
    double var = 0.0;
    for (int k = 0; k < K; ++k) {
      double mhat = sb1 * vp.mu[K * D + k];
      double s2hat = prior.sigma2_b1 * sig2[K * D + k];
      for (int d = 0; d < D; ++d) {
        mhat += sw1 * vp.mu[k * D + d] * xs(i, d);
        s2hat += prior.sigma2_w1 * sig2[k * D + d] * xs(i, d) * xs(i, d);
      }
      const specfun::GaussianScalar z{mhat, s2hat};
      const double m1 = expected_activation(arch.activation, z);
      const double m2 = expected_activation_sq(arch.activation, z);
      const double mv = vp.mu[K * D + K + k];
      const double sv2 = sig2[K * D + K + k];
      mean += mv * m1;
      var += (mv * mv + sv2) * m2 - mv * mv * m1 * m1;
    }
    out.means[i] = cscale * mean;
    out.variances[i] = cscale * cscale * var;
  }
  return out;
}

Eigen::VectorXd posterior_mean_exact_erf(const VariationalParams& vp,
                                         const Architecture& arch,
                                         const PriorConfig& prior,
                                         const Eigen::MatrixXd& xs) {
  if (arch.activation != Activation::Erf)
    throw std::invalid_argument("closed-form mean requires erf activation");
  arch.validate();
  prior.validate();
  vp.validate();
  if (vp.mu.size() != arch.param_count())
    throw std::invalid_argument("variational size does not match architecture");
  if (xs.cols() != arch.input_dim)
    throw std::invalid_argument("xs dimension does not match architecture");

  const int K = arch.width;
  const int D = arch.input_dim;
  const double sw1 = std::sqrt(prior.sigma2_w1);
  const double sb1 = std::sqrt(prior.sigma2_b1);
  const double cscale = std::sqrt(prior.sigma2_w2 / K);
  const Eigen::VectorXd sig2 = (2.0 * vp.rho.array()).exp();

  Eigen::VectorXd means(xs.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    double mean = 0.0;
    for (int k = 0; k < K; ++k) {
      double mhat = sb1 * vp.mu[K * D + k];
      double s2hat = prior.sigma2_b1 * sig2[K * D + k];
      for (int d = 0; d < D; ++d) {
        mhat += sw1 * vp.mu[k * D + d] * xs(i, d);
        s2hat += prior.sigma2_w1 * sig2[k * D + d] * xs(i, d) * xs(i, d);
      }
      mean += vp.mu[K * D + K + k] * specfun::expected_erf({mhat, s2hat});
    }
    means[i] = cscale * mean;
  }
  return means;
}

BoundReport bound_check(const VariationalParams& vp, const Architecture& arch,
                        const PriorConfig& prior, const Dataset& data,
                        const Eigen::MatrixXd& xs, int n_mc,
                        std::uint64_t seed, double slack) {
  if (arch.activation != Activation::Erf)
    throw std::invalid_argument("bound_check requires erf activation");
  if (data.size() == 0) throw std::invalid_argument("dataset is empty");

  BoundReport r;
  r.c_x = c_x(data, arch, prior);
  const ElboBreakdown bd = elbo_estimate(vp, data, arch, prior, n_mc,
                                         derive_seed(seed, kBoundStream));
  const double log_const =
      static_cast<double>(data.size()) * 0.5 *
      std::log(2.0 * std::numbers::pi * prior.sigma2_noise);
  r.kl = bd.kl;
  r.error_at_params = bd.expected_nll - log_const;
  r.loss_at_params = r.error_at_params + r.kl;
  r.premise_holds = r.loss_at_params <= r.c_x;

  const int K = arch.width;
  const int D = arch.input_dim;
  r.budget_w1 = 0.0;
  for (int d = 0; d < D; ++d) {
    double s = 0.0;
    for (int k = 0; k < K; ++k) s += vp.mu[k * D + d] * vp.mu[k * D + d];
    r.budget_w1 = std::max(r.budget_w1, 0.5 * s);
  }
  r.budget_b1 = 0.5 * vp.mu.segment(K * D, K).squaredNorm();
  r.budget_w2 = 0.5 * vp.mu.segment(K * D + K, K).squaredNorm();
  r.budgets_hold = r.budget_w1 <= r.c_x && r.budget_b1 <= r.c_x &&
                   r.budget_w2 <= r.c_x;

  r.mean_abs = posterior_mean_exact_erf(vp, arch, prior, xs).cwiseAbs();
  r.c_x_xstar.resize(xs.rows());
  r.v_of_x.resize(xs.rows());
  r.bound.resize(xs.rows());
  bool inside = true;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const Eigen::VectorXd x = xs.row(i).transpose();
    r.c_x_xstar[i] = c_x_xstar(r.c_x, x, prior);
    r.v_of_x[i] = prior_predictive_variance(arch, prior, x);
    r.bound[i] = theorem_bound(arch.width, r.c_x, r.c_x_xstar[i], prior);
    inside = inside && r.mean_abs[i] <= r.bound[i] + slack;
  }
  r.holds = !r.premise_holds || inside;
  return r;
}

}  // namespace widthlab
