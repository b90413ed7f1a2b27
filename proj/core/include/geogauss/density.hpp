#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <nlohmann/json.hpp>

#include "geogauss/random.hpp"
#include "geogauss/types.hpp"

namespace geogauss {

/// Multivariate normal N(mean, cov).
///
/// Sampling uses a square-root factor S with S S^T = cov. By default S is the
/// lower Cholesky factor; from_factor() pins an explicit S so that two
/// Gaussians related by a linear map can share draws row for row.
class Gaussian {
 public:
  Gaussian(Vector mean, Matrix cov);
  static Gaussian from_factor(Vector mean, Matrix factor);
  static Gaussian standard(int dim);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  const Matrix& factor() const { return factor_; }

  double log_pdf(const VectorRef& x) const;
  Vector draw(CounterRng& rng) const;

 private:
  Gaussian(Vector mean, Matrix cov, Matrix factor);

  Vector mean_;
  Matrix cov_;
  Matrix factor_;
  Eigen::LLT<Matrix> llt_;
  double log_norm_ = 0.0;
};

/// A (possibly unnormalised) probability density on R^d given by its log.
///
/// log_pdf must be finite for every finite input. support_hint brackets each
/// axis so that at least 1 - 1e-10 of the mass lies inside the box; numerical
/// integration never looks outside it.
class Density {
 public:
  using LogPdf = std::function<double(const VectorRef&)>;
  using Gradient = std::function<Vector(const VectorRef&)>;
  using Sampler = std::function<Vector(CounterRng&)>;

  Density(int dim, LogPdf log_pdf, std::vector<Bracket> support_hint, bool normalised);

  Density& set_gradient(Gradient grad);
  Density& set_sampler(Sampler sampler);
  Density& set_spec(nlohmann::json spec);

  int dim() const { return dim_; }
  bool normalised() const { return normalised_; }
  const std::vector<Bracket>& support_hint() const { return support_; }
  const nlohmann::json& spec() const { return spec_; }

  double log_pdf(const VectorRef& x) const { return log_pdf_(x); }
  double pdf(const VectorRef& x) const;

  bool has_gradient() const { return static_cast<bool>(grad_); }
  const Gradient& analytic_gradient() const { return grad_; }

  bool has_sampler() const { return static_cast<bool>(sampler_); }
  /// One exact draw; throws InvalidArgument when the family cannot sample.
  Vector draw(CounterRng& rng) const;

 private:
  int dim_;
  LogPdf log_pdf_;
  std::vector<Bracket> support_;
  bool normalised_;
  Gradient grad_;
  Sampler sampler_;
  nlohmann::json spec_;
};

/// Gradient of log_pdf: analytic when the family provides one, otherwise
/// central differences with step eps^(1/3) * max(1, |x_i|).
Vector grad_log_pdf(const Density& density, const VectorRef& x);

/// Same central-difference gradient, available regardless of the family.
Vector fd_grad_log_pdf(const Density& density, const VectorRef& x);

/// Built-in test targets:
///   standard_normal {"dim"}
///   gaussian        {"mean", "cov"}        (scalars accepted in 1D)
///   gmm1d           {"weights", "means", "sds"}
///   gmm2d           {"weights", "means", "covs"}
///   banana          {"a", "b"}  N(x1; 0, a^2) N(x2 - b (x1^2 - a^2); 0, 1)
///   corr_gaussian2d {"rho"}
Density make_builtin(std::string_view name, const nlohmann::json& params);

Density gaussian_density(const Gaussian& g);

}  // namespace geogauss
