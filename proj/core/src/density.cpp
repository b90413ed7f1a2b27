#include "geogauss/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "geogauss/errors.hpp"
#include "geogauss/io.hpp"
#include "geogauss/normal.hpp"

namespace geogauss {

namespace {

constexpr double kSigmas = 8.0;

void require_spd(const Matrix& cov, const std::string& what) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) throw InvalidArgument(what + ": covariance must be square");
  const double scale = cov.cwiseAbs().maxCoeff();
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument(what + ": covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw NotPositiveDefinite(what + ": covariance is not positive definite", eig.eigenvalues());
  }
}

double log_sum_exp(const std::vector<double>& terms) {
  const double m = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

double param(const nlohmann::json& params, const char* key) {
  if (!params.contains(key) || !params[key].is_number()) {
    throw ConfigError(std::string("params.") + key, "missing or not a number");
  }
  return params[key].get<double>();
}

std::vector<double> param_list(const nlohmann::json& params, const char* key) {
  if (!params.contains(key)) throw ConfigError(std::string("params.") + key, "missing");
  const Vector v = vector_from_json(params[key], std::string("params.") + key);
  return {v.data(), v.data() + v.size()};
}

void check_weights(const std::vector<double>& w) {
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw InvalidArgument("mixture weights must be non-negative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-10) throw InvalidArgument("mixture weights must sum to 1");
}

// Picks a component index from one uniform draw.
std::size_t pick(const std::vector<double>& w, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    acc += w[k];
    if (u < acc) return k;
  }
  return w.size() - 1;
}

Density make_gaussian(const Gaussian& g, nlohmann::json spec) {
  Density d = gaussian_density(g);
  d.set_spec(std::move(spec));
  return d;
}

Density make_gmm1d(const nlohmann::json& params) {
  const auto w = param_list(params, "weights");
  const auto mu = param_list(params, "means");
  const auto sd = param_list(params, "sds");
  if (w.size() != mu.size() || w.size() != sd.size()) {
    throw InvalidArgument("gmm1d: weights, means and sds must have equal length");
  }
  check_weights(w);
  for (double s : sd)
    if (!(s > 0.0)) throw InvalidArgument("gmm1d: sds must be positive");

  const double max_sd = *std::max_element(sd.begin(), sd.end());
  const Bracket support{*std::min_element(mu.begin(), mu.end()) - kSigmas * max_sd,
                        *std::max_element(mu.begin(), mu.end()) + kSigmas * max_sd};

  auto component_logs = [w, mu, sd](double x) {
    std::vector<double> t(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double z = (x - mu[k]) / sd[k];
      t[k] = std::log(w[k]) - 0.5 * z * z - std::log(sd[k]) - kLogSqrt2Pi;
    }
    return t;
  };
  Density d(1, [component_logs](const VectorRef& x) { return log_sum_exp(component_logs(x[0])); },
            {support}, true);
  d.set_gradient([component_logs, mu, sd](const VectorRef& x) {
    const auto t = component_logs(x[0]);
    const double lse = log_sum_exp(t);
    double g = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) g += std::exp(t[k] - lse) * (mu[k] - x[0]) / (sd[k] * sd[k]);
    return Vector::Constant(1, g);
  });
  d.set_sampler([w, mu, sd](CounterRng& rng) {
    const std::size_t k = pick(w, rng.uniform());
    return Vector::Constant(1, mu[k] + sd[k] * rng.normal());
  });
  d.set_spec({{"family", "gmm1d"}, {"params", params}});
  return d;
}

Density make_gmm2d(const nlohmann::json& params) {
  const auto w = param_list(params, "weights");
  check_weights(w);
  if (!params.contains("means") || !params.contains("covs") || !params["means"].is_array() ||
      !params["covs"].is_array()) {
    throw ConfigError("params.means", "gmm2d needs 'means' and 'covs' arrays");
  }
  if (params["means"].size() != w.size() || params["covs"].size() != w.size()) {
    throw InvalidArgument("gmm2d: weights, means and covs must have equal length");
  }
  std::vector<Gaussian> comps;
  for (std::size_t k = 0; k < w.size(); ++k) {
    Vector m = vector_from_json(params["means"][k], "params.means");
    Matrix c = matrix_from_json(params["covs"][k], "params.covs");
    if (m.size() != 2 || c.rows() != 2) throw InvalidArgument("gmm2d: components must be 2-dimensional");
    comps.emplace_back(std::move(m), std::move(c));
  }
  std::vector<Bracket> support(2);
  for (int i = 0; i < 2; ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double max_sd = 0.0;
    for (const auto& g : comps) {
      lo = std::min(lo, g.mean()[i]);
      hi = std::max(hi, g.mean()[i]);
      max_sd = std::max(max_sd, std::sqrt(g.cov()(i, i)));
    }
    support[static_cast<std::size_t>(i)] = {lo - kSigmas * max_sd, hi + kSigmas * max_sd};
  }
  auto terms = [w, comps](const VectorRef& x) {
    std::vector<double> t(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) t[k] = std::log(w[k]) + comps[k].log_pdf(x);
    return t;
  };
  Density d(2, [terms](const VectorRef& x) { return log_sum_exp(terms(x)); }, support, true);
  d.set_gradient([terms, comps](const VectorRef& x) {
    const auto t = terms(x);
    const double lse = log_sum_exp(t);
    Vector g = Vector::Zero(2);
    for (std::size_t k = 0; k < t.size(); ++k) {
      g += std::exp(t[k] - lse) * comps[k].cov().ldlt().solve(comps[k].mean() - x);
    }
    return g;
  });
  d.set_sampler([w, comps](CounterRng& rng) { return comps[pick(w, rng.uniform())].draw(rng); });
  d.set_spec({{"family", "gmm2d"}, {"params", params}});
  return d;
}

Density make_banana(const nlohmann::json& params) {
  const double a = param(params, "a");
  const double b = param(params, "b");
  if (!(a > 0.0)) throw InvalidArgument("banana: a must be positive");
  const double shift_lo = std::min(-b * a * a, b * (kSigmas * kSigmas - 1.0) * a * a);
  const double shift_hi = std::max(-b * a * a, b * (kSigmas * kSigmas - 1.0) * a * a);
  const std::vector<Bracket> support{{-kSigmas * a, kSigmas * a},
                                     {shift_lo - kSigmas, shift_hi + kSigmas}};
  Density d(
      2,
      [a, b](const VectorRef& x) {
        const double z1 = x[0] / a;
        const double r = x[1] - b * (x[0] * x[0] - a * a);
        return -0.5 * z1 * z1 - std::log(a) - 0.5 * r * r - 2.0 * kLogSqrt2Pi;
      },
      support, true);
  d.set_gradient([a, b](const VectorRef& x) {
    const double r = x[1] - b * (x[0] * x[0] - a * a);
    Vector g(2);
    g[0] = -x[0] / (a * a) + r * 2.0 * b * x[0];
    g[1] = -r;
    return g;
  });
  d.set_sampler([a, b](CounterRng& rng) {
    Vector x(2);
    x[0] = a * rng.normal();
    x[1] = b * (x[0] * x[0] - a * a) + rng.normal();
    return x;
  });
  d.set_spec({{"family", "banana"}, {"params", params}});
  return d;
}

}  // namespace

// ---------------------------------------------------------------- Gaussian

Gaussian::Gaussian(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (cov_.rows() != mean_.size()) throw InvalidArgument("Gaussian: mean and covariance sizes differ");
  require_spd(cov_, "Gaussian");
  cov_ = 0.5 * (cov_ + cov_.transpose());
  llt_.compute(cov_);
  if (llt_.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov_, Eigen::EigenvaluesOnly);
    throw NotPositiveDefinite("Gaussian: Cholesky factorisation failed", eig.eigenvalues());
  }
  factor_ = llt_.matrixL();
  log_norm_ = -factor_.diagonal().array().log().sum() - dim() * kLogSqrt2Pi;
}

Gaussian::Gaussian(Vector mean, Matrix cov, Matrix factor) : Gaussian(std::move(mean), std::move(cov)) {
  factor_ = std::move(factor);
}

Gaussian Gaussian::from_factor(Vector mean, Matrix factor) {
  if (factor.rows() != factor.cols() || factor.rows() != mean.size()) {
    throw InvalidArgument("Gaussian: factor must be square and match the mean");
  }
  Matrix cov = factor * factor.transpose();
  cov = 0.5 * (cov + cov.transpose());
  return Gaussian(std::move(mean), std::move(cov), std::move(factor));
}

Gaussian Gaussian::standard(int dim) { return Gaussian(Vector::Zero(dim), Matrix::Identity(dim, dim)); }

double Gaussian::log_pdf(const VectorRef& x) const {
  const Vector z = llt_.matrixL().solve(x - mean_);
  return log_norm_ - 0.5 * z.squaredNorm();
}

Vector Gaussian::draw(CounterRng& rng) const { return mean_ + factor_ * standard_normal_vector(rng, dim()); }

// ----------------------------------------------------------------- Density

Density::Density(int dim, LogPdf log_pdf, std::vector<Bracket> support_hint, bool normalised)
    : dim_(dim), log_pdf_(std::move(log_pdf)), support_(std::move(support_hint)), normalised_(normalised) {
  if (dim_ < 1) throw InvalidArgument("Density: dimension must be positive");
  if (static_cast<int>(support_.size()) != dim_) throw InvalidArgument("Density: support_hint needs one bracket per axis");
  for (const auto& b : support_)
    if (!(b.lo < b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi))
      throw InvalidArgument("Density: support_hint brackets must be finite with lo < hi");
}

Density& Density::set_gradient(Gradient grad) {
  grad_ = std::move(grad);
  return *this;
}

Density& Density::set_sampler(Sampler sampler) {
  sampler_ = std::move(sampler);
  return *this;
}

Density& Density::set_spec(nlohmann::json spec) {
  spec_ = std::move(spec);
  return *this;
}

double Density::pdf(const VectorRef& x) const { return std::exp(log_pdf_(x)); }

Vector Density::draw(CounterRng& rng) const {
  if (!sampler_) throw InvalidArgument("density has no exact sampler");
  return sampler_(rng);
}

Vector fd_grad_log_pdf(const Density& density, const VectorRef& x) {
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = base * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double fp = density.log_pdf(probe);
    probe[i] = x[i] - h;
    const double fm = density.log_pdf(probe);
    probe[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Vector grad_log_pdf(const Density& density, const VectorRef& x) {
  if (density.has_gradient()) return density.analytic_gradient()(x);
  return fd_grad_log_pdf(density, x);
}

Density gaussian_density(const Gaussian& g) {
  std::vector<Bracket> support;
  for (int i = 0; i < g.dim(); ++i) {
    const double sd = std::sqrt(g.cov()(i, i));
    support.push_back({g.mean()[i] - kSigmas * sd, g.mean()[i] + kSigmas * sd});
  }
  Density d(g.dim(), [g](const VectorRef& x) { return g.log_pdf(x); }, support, true);
  const Eigen::LDLT<Matrix> ldlt(g.cov());
  d.set_gradient([g, ldlt](const VectorRef& x) -> Vector { return ldlt.solve(g.mean() - x); });
  d.set_sampler([g](CounterRng& rng) { return g.draw(rng); });
  d.set_spec({{"family", "gaussian"},
              {"params", {{"mean", vector_to_json(g.mean())}, {"cov", matrix_to_json(g.cov())}}}});
  return d;
}

Density make_builtin(std::string_view name, const nlohmann::json& params) {
  if (name == "standard_normal") {
    int dim = 1;
    if (params.is_number_integer()) dim = params.get<int>();
    else if (params.is_object() && params.contains("dim")) dim = params["dim"].get<int>();
    if (dim < 1) throw InvalidArgument("standard_normal: dim must be positive");
    Density d = gaussian_density(Gaussian::standard(dim));
    d.set_spec({{"family", "standard_normal"}, {"params", {{"dim", dim}}}});
    return d;
  }
  if (name == "gaussian") {
    if (!params.contains("mean") || !params.contains("cov")) throw ConfigError("params.mean", "gaussian needs 'mean' and 'cov'");
    Gaussian g(vector_from_json(params["mean"], "params.mean"), matrix_from_json(params["cov"], "params.cov"));
    return make_gaussian(g, {{"family", "gaussian"}, {"params", params}});
  }
  if (name == "corr_gaussian2d") {
    const double rho = param(params, "rho");
    if (!(std::abs(rho) < 1.0)) throw InvalidArgument("corr_gaussian2d: |rho| must be < 1");
    Matrix cov(2, 2);
    cov << 1.0, rho, rho, 1.0;
    return make_gaussian(Gaussian(Vector::Zero(2), cov), {{"family", "corr_gaussian2d"}, {"params", params}});
  }
  if (name == "gmm1d") return make_gmm1d(params);
  if (name == "gmm2d") return make_gmm2d(params);
  if (name == "banana") return make_banana(params);
  throw InvalidArgument("unknown density family '" + std::string(name) + "'");
}

}  // namespace geogauss
