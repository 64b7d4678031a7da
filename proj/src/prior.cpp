#include "widthlab/prior.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "widthlab/rng.hpp"

namespace widthlab {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double normal_pdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

void apply_activation(Activation a, Eigen::ArrayXXd& z) {
  switch (a) {
    case Activation::Erf:
      z = z.unaryExpr([](double v) { return std::erf(v); });
      break;
    case Activation::Tanh:
      z = z.tanh();
      break;
    case Activation::Relu:
      z = z.max(0.0);
      break;
  }
}

const NormalExpectation& shared_quad() {
  static const NormalExpectation quad(12);
  return quad;
}

}  // namespace

Activation activation_from_string(std::string_view s) {
  if (s == "erf") return Activation::Erf;
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  throw std::invalid_argument("unknown activation: " + std::string(s));
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Erf:
      return "erf";
    case Activation::Tanh:
      return "tanh";
    case Activation::Relu:
      return "relu";
  }
  throw std::logic_error("unreachable");
}

void PriorConfig::validate() const {
  if (!(sigma2_w1 > 0.0 && sigma2_b1 > 0.0 && sigma2_w2 > 0.0 &&
        sigma2_noise > 0.0))
    throw std::invalid_argument(
        "PriorConfig: all variances must be strictly positive");
}

void Architecture::validate() const {
  if (input_dim < 1) throw std::invalid_argument("Architecture: input_dim < 1");
  if (width < 1) throw std::invalid_argument("Architecture: width < 1");
}

ParamVector ParamVector::zeros(const Architecture& arch) {
  arch.validate();
  ParamVector p;
  p.w1 = Eigen::MatrixXd::Zero(arch.width, arch.input_dim);
  p.b1 = Eigen::VectorXd::Zero(arch.width);
  p.w2 = Eigen::VectorXd::Zero(arch.width);
  return p;
}

ParamVector ParamVector::from_flat(const Architecture& arch,
                                   const Eigen::VectorXd& flat) {
  arch.validate();
  if (flat.size() != arch.param_count())
    throw std::invalid_argument("ParamVector::from_flat: wrong length");
  const int k = arch.width;
  const int d = arch.input_dim;
  ParamVector p;
  p.w1.resize(k, d);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < d; ++j) p.w1(i, j) = flat[i * d + j];
  p.b1 = flat.segment(k * d, k);
  p.w2 = flat.segment(k * d + k, k);
  return p;
}

Eigen::VectorXd ParamVector::to_flat() const {
  const Eigen::Index k = w1.rows();
  const Eigen::Index d = w1.cols();
  Eigen::VectorXd flat(k * (d + 2));
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < d; ++j) flat[i * d + j] = w1(i, j);
  flat.segment(k * d, k) = b1;
  flat.segment(k * d + k, k) = w2;
  return flat;
}

Dataset zscore(const Dataset& raw) {
  if (raw.size() < 1) throw std::invalid_argument("zscore: empty dataset");
  const Eigen::Index n = raw.size();
  const Eigen::Index d = raw.dim();

  Standardization st;
  st.x_mean = raw.x.colwise().mean();
  st.x_scale = Eigen::VectorXd::Ones(d);
  st.y_mean = raw.y.mean();
  st.y_scale = 1.0;

  if (n > 1) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double var =
          (raw.x.col(j).array() - st.x_mean[j]).square().mean();
      const double sd = std::sqrt(var);
      if (sd <= 1e-12 * (1.0 + std::abs(st.x_mean[j])))
        throw std::invalid_argument("zscore: input column " +
                                    std::to_string(j) + " has zero variance");
      st.x_scale[j] = sd;
    }
    const double y_var = (raw.y.array() - st.y_mean).square().mean();
    const double y_sd = std::sqrt(y_var);
    if (y_sd <= 1e-12 * (1.0 + std::abs(st.y_mean)))
      throw std::invalid_argument("zscore: targets have zero variance");
    st.y_scale = y_sd;
  }

  Dataset out;
  out.name = raw.name;
  out.x = (raw.x.rowwise() - st.x_mean.transpose()).array().rowwise() /
          st.x_scale.transpose().array();
  out.y = (raw.y.array() - st.y_mean) / st.y_scale;
  out.standardization = st;
  return out;
}

Dataset unzscore(const Dataset& standardized) {
  if (!standardized.standardization)
    throw std::invalid_argument("unzscore: no standardization record");
  const Standardization& st = *standardized.standardization;
  Dataset out;
  out.name = standardized.name;
  out.x = (standardized.x.array().rowwise() * st.x_scale.transpose().array())
              .rowwise() +
          st.x_mean.transpose().array();
  out.y = standardized.y.array() * st.y_scale + st.y_mean;
  return out;
}

double activation_apply(Activation a, double z) {
  switch (a) {
    case Activation::Erf:
      return std::erf(z);
    case Activation::Tanh:
      return std::tanh(z);
    case Activation::Relu:
      return z > 0.0 ? z : 0.0;
  }
  throw std::logic_error("unreachable");
}

double forward(const Architecture& arch, const PriorConfig& prior,
               const ParamVector& params, const Eigen::VectorXd& x) {
  if (x.size() != arch.input_dim)
    throw std::invalid_argument("forward: x has wrong dimension");
  const double sw1 = std::sqrt(prior.sigma2_w1);
  const double sb1 = std::sqrt(prior.sigma2_b1);
  const double scale = std::sqrt(prior.sigma2_w2 / arch.width);
  double acc = 0.0;
  for (int k = 0; k < arch.width; ++k) {
    const double z = sw1 * params.w1.row(k).dot(x) + sb1 * params.b1[k];
    acc += params.w2[k] * activation_apply(arch.activation, z);
  }
  return scale * acc;
}

Eigen::VectorXd forward_batch(const Architecture& arch,
                              const PriorConfig& prior,
                              const ParamVector& params,
                              const Eigen::MatrixXd& xs) {
  if (xs.cols() != arch.input_dim)
    throw std::invalid_argument("forward_batch: xs has wrong dimension");
  const double sw1 = std::sqrt(prior.sigma2_w1);
  const double sb1 = std::sqrt(prior.sigma2_b1);
  const double scale = std::sqrt(prior.sigma2_w2 / arch.width);
  Eigen::MatrixXd zm = sw1 * (params.w1 * xs.transpose());
  zm.colwise() += sb1 * params.b1;
  Eigen::ArrayXXd z = zm.array();
  apply_activation(arch.activation, z);
  return scale * (z.matrix().transpose() * params.w2);
}

double expected_activation(Activation a, const specfun::GaussianScalar& z) {
  if (!(z.variance >= 0.0))
    throw std::invalid_argument("expected_activation: variance must be >= 0");
  const double sd = std::sqrt(z.variance);
  switch (a) {
    case Activation::Erf:
      return specfun::expected_erf(z);
    case Activation::Tanh:
      return shared_quad().expect(z.mean, sd,
                                  [](double t) { return std::tanh(t); });
    case Activation::Relu: {
      if (sd == 0.0) return z.mean > 0.0 ? z.mean : 0.0;
      const double r = z.mean / sd;
      return z.mean * specfun::std_normal_cdf(r) + sd * normal_pdf(r);
    }
  }
  throw std::logic_error("unreachable");
}

double expected_activation_sq(Activation a, const specfun::GaussianScalar& z) {
  if (!(z.variance >= 0.0))
    throw std::invalid_argument(
        "expected_activation_sq: variance must be >= 0");
  const double sd = std::sqrt(z.variance);
  switch (a) {
    case Activation::Erf:
      return specfun::expected_erf_sq(z);
    case Activation::Tanh:
      return shared_quad().expect(z.mean, sd, [](double t) {
        const double e = std::tanh(t);
        return e * e;
      });
    case Activation::Relu: {
      if (sd == 0.0) {
        const double r = z.mean > 0.0 ? z.mean : 0.0;
        return r * r;
      }
      const double r = z.mean / sd;
      return (z.mean * z.mean + sd * sd) * specfun::std_normal_cdf(r) +
             z.mean * sd * normal_pdf(r);
    }
  }
  throw std::logic_error("unreachable");
}

double preactivation_variance(const PriorConfig& prior,
                              const Eigen::VectorXd& x) {
  return prior.sigma2_w1 * x.squaredNorm() + prior.sigma2_b1;
}

double activation_prior_variance(const Architecture& arch,
                                 const PriorConfig& prior,
                                 const Eigen::VectorXd& x) {
  if (x.size() != arch.input_dim)
    throw std::invalid_argument(
        "activation_prior_variance: x has wrong dimension");
  const double s2 = preactivation_variance(prior, x);
  switch (arch.activation) {
    case Activation::Erf:
      // E[erf(s eps)^2] with E[erf(s eps)] = 0.
      return prior.sigma2_w2 * (2.0 / std::numbers::pi) *
             std::asin(2.0 * s2 / (1.0 + 2.0 * s2));
    case Activation::Tanh: {
      const specfun::GaussianScalar g{0.0, s2};
      const double m2 = expected_activation_sq(Activation::Tanh, g);
      return prior.sigma2_w2 * m2;  // odd activation: zero mean
    }
    case Activation::Relu: {
      // Var[relu(s eps)] = s^2 (1/2 - 1/(2 pi)).
      return prior.sigma2_w2 * s2 *
             (0.5 - 1.0 / (2.0 * std::numbers::pi));
    }
  }
  throw std::logic_error("unreachable");
}

double prior_predictive_variance(const Architecture& arch,
                                 const PriorConfig& prior,
                                 const Eigen::VectorXd& x) {
  if (arch.activation != Activation::Relu)
    return activation_prior_variance(arch, prior, x);
  const double s2 = preactivation_variance(prior, x);
  return prior.sigma2_w2 * 0.5 * s2;  // E[relu(s eps)^2] = s^2 / 2
}

double c_x(const Dataset& data, const Architecture& arch,
           const PriorConfig& prior) {
  prior.validate();
  if (data.size() < 1) throw std::invalid_argument("c_x: empty dataset");
  if (data.dim() != arch.input_dim)
    throw std::invalid_argument("c_x: dataset dimension mismatch");
  double acc = 0.0;
  for (Eigen::Index n = 0; n < data.size(); ++n) {
    const double v =
        activation_prior_variance(arch, prior, data.x.row(n).transpose());
    acc += data.y[n] * data.y[n] + v;
  }
  return acc / (2.0 * prior.sigma2_noise);
}

double c_x_xstar(double c_x_value, const Eigen::VectorXd& x_star,
                 const PriorConfig& prior) {
  if (!(c_x_value >= 0.0))
    throw std::invalid_argument("c_x_xstar: c_x must be >= 0");
  const double d = static_cast<double>(x_star.size());
  return 2.0 * (d + 1.0) * c_x_value *
         (prior.sigma2_w1 * x_star.squaredNorm() + prior.sigma2_b1);
}

double theorem_bound(int width, double c_x_value, double c_x_xstar_value,
                     const PriorConfig& prior) {
  if (width < 1) throw std::invalid_argument("theorem_bound: width < 1");
  if (!(c_x_value >= 0.0 && c_x_xstar_value >= 0.0))
    throw std::invalid_argument("theorem_bound: constants must be >= 0");
  const double shrink =
      -std::expm1(-(4.0 / std::numbers::pi) * c_x_xstar_value / width);
  return std::sqrt(2.0 * prior.sigma2_w2 * c_x_value) * std::sqrt(shrink);
}

MomentSummary prior_predictive_moments(const Architecture& arch,
                                       const PriorConfig& prior,
                                       const Eigen::MatrixXd& xs,
                                       int n_samples, std::uint64_t seed) {
  arch.validate();
  prior.validate();
  if (n_samples < 2)
    throw std::invalid_argument("prior_predictive_moments: n_samples < 2");
  const Eigen::Index t = xs.rows();

  std::mt19937_64 eng(rng::derive_seed(seed, /*stream=*/0x9a1));
  Eigen::VectorXd flat(arch.param_count());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(t);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(t);
  Eigen::VectorXd sum_cube = Eigen::VectorXd::Zero(t);
  Eigen::VectorXd sum_quad = Eigen::VectorXd::Zero(t);
  for (int s = 0; s < n_samples; ++s) {
    rng::fill_standard_normal(eng, flat);
    const Eigen::VectorXd f =
        forward_batch(arch, prior, ParamVector::from_flat(arch, flat), xs);
    const Eigen::VectorXd f2 = f.cwiseProduct(f);
    sum += f;
    sum_sq += f2;
    sum_cube += f2.cwiseProduct(f);
    sum_quad += f2.cwiseProduct(f2);
  }
  MomentSummary out;
  const double n = n_samples;
  out.means = sum / n;
  out.variances =
      (sum_sq - n * out.means.cwiseProduct(out.means)) / (n - 1.0);
  // Standard error of the sample variance from the empirical central fourth
  // moment (the predictive is non-Gaussian at narrow widths).
  out.variance_se.resize(t);
  for (Eigen::Index i = 0; i < t; ++i) {
    const double m = out.means[i];
    const double m4 = sum_quad[i] / n - 4.0 * m * sum_cube[i] / n +
                      6.0 * m * m * sum_sq[i] / n - 3.0 * m * m * m * m;
    const double s2 = out.variances[i];
    out.variance_se[i] =
        std::sqrt(std::max((m4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n, 0.0));
  }
  return out;
}

std::vector<double> upcrossings(const Eigen::VectorXd& grid_x,
                                const Eigen::VectorXd& values) {
  if (grid_x.size() != values.size())
    throw std::invalid_argument("upcrossings: length mismatch");
  for (Eigen::Index i = 0; i + 1 < grid_x.size(); ++i)
    if (!(grid_x[i] < grid_x[i + 1]))
      throw std::invalid_argument("upcrossings: grid must strictly increase");
  std::vector<double> locs;
  for (Eigen::Index i = 0; i + 1 < values.size(); ++i) {
    if (values[i] < 0.0 && values[i + 1] >= 0.0) {
      const double t = -values[i] / (values[i + 1] - values[i]);
      locs.push_back(grid_x[i] + t * (grid_x[i + 1] - grid_x[i]));
    }
  }
  return locs;
}

}  // namespace widthlab
