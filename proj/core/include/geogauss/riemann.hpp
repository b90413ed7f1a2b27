#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "geogauss/density.hpp"
#include "geogauss/diffeo.hpp"

namespace geogauss {

enum class MetricProvenance { euclidean, pullback, custom };

/// Riemannian metric on R^d given pointwise as an SPD matrix field.
///
/// Flatness is tracked by provenance: euclidean and pullback metrics of g_e
/// are flat by construction; custom metrics are never assumed flat.
class MetricField {
 public:
  using Field = std::function<Matrix(const VectorRef&)>;

  MetricField(int dim, Field g, MetricProvenance provenance,
              std::shared_ptr<const Diffeomorphism> source = nullptr);

  int dim() const { return dim_; }
  MetricProvenance provenance() const { return provenance_; }
  /// The diffeomorphism phi for a pullback metric (phi^{-1})^* g_e, else null.
  const std::shared_ptr<const Diffeomorphism>& source() const { return source_; }

  Matrix operator()(const VectorRef& x) const { return g_(x); }

 private:
  int dim_;
  Field g_;
  MetricProvenance provenance_;
  std::shared_ptr<const Diffeomorphism> source_;
};

MetricField euclidean_metric(int dim);
/// (phi^{-1})^* g_e: g(y) = J^T J with J = D_y phi^{-1}. phi is an isometry
/// from (R^d, g_e) onto (R^d, g).
MetricField pullback_metric(const Diffeomorphism& map);
MetricField custom_metric(int dim, MetricField::Field g);

/// Christoffel symbols of the second kind, stored as gamma(k, i, j).
class Christoffel {
 public:
  explicit Christoffel(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim * dim * dim), 0.0) {}

  int dim() const { return dim_; }
  double& operator()(int k, int i, int j) { return data_[index(k, i, j)]; }
  double operator()(int k, int i, int j) const { return data_[index(k, i, j)]; }

 private:
  std::size_t index(int k, int i, int j) const {
    return static_cast<std::size_t>((k * dim_ + i) * dim_ + j);
  }
  int dim_;
  std::vector<double> data_;
};

/// Default finite-difference step for metric derivatives: 1e-4 max(1, |x|).
double christoffel_step(const VectorRef& x);

/// Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij), central
/// differences with step h.
Christoffel christoffel(const MetricField& metric, const VectorRef& x, double h);
Christoffel christoffel(const MetricField& metric, const VectorRef& x);

/// Endpoint at time t_end of the geodesic from (x0, v): classical RK4 on
/// x'' = -Gamma(x)(x', x') with `steps` fixed steps. exp_x0(v) is t_end = 1.
/// Throws NumericalError on a non-finite state or when g(x)(x', x') drifts by
/// more than 1e-2 relative (blow-up or steps too coarse).
Vector geodesic_shoot(const MetricField& metric, const VectorRef& x0, const VectorRef& v,
                      int steps = 1000, double t_end = 1.0);

/// Closed-form exponential map of (phi^{-1})^* g_e: geodesics are images of
/// straight lines, exp_y(v) = phi(phi^{-1}(y) + D_y phi^{-1} v).
Vector exp_map_closed(const Diffeomorphism& map, const VectorRef& y, const VectorRef& v);

/// Riemannian Gaussian approximation: the law of exp_{base}(V), V ~ tangent.
struct RiemannGA {
  MetricField metric;
  Vector base_point;
  Gaussian tangent;  // zero mean on T_base R^d

  RiemannGA(MetricField metric, Vector base_point, Gaussian tangent);
  const Matrix& tangent_cov() const { return tangent.cov(); }
};

/// phi_* N(mu, Sigma) as exp_{phi(mu)*} N(0, J Sigma J^T), J = D_mu phi, under
/// (phi^{-1})^* g_e. The tangent Gaussian keeps J S as its sampling factor so
/// draws correspond row for row with the ReparamGA.
RiemannGA riemann_ga_from_reparam(const ReparamGA& ga);

/// For a flat (euclidean or pullback) metric, exp_mu is a diffeomorphism and
/// the RiemannGA is the ReparamGA (exp_mu)_* N(0, Sigma). Custom metrics are
/// rejected since their flatness cannot be certified.
ReparamGA reparam_from_riemann(const RiemannGA& ga);

enum class ExpIntegrator { closed, ode };

/// Tangent draws use the same counter-seeded scheme as sample(ReparamGA).
Matrix riemann_ga_sample(const RiemannGA& ga, int n, std::uint64_t seed,
                         ExpIntegrator integrator = ExpIntegrator::closed, int steps = 1000);

/// Closed-form or ODE exponential map for a RiemannGA's metric.
Vector riemann_exp(const MetricField& metric, const VectorRef& y, const VectorRef& v,
                   ExpIntegrator integrator, int steps = 1000);

}  // namespace geogauss
