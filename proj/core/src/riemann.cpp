#include "geogauss/riemann.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "geogauss/errors.hpp"
#include "geogauss/parallel.hpp"

namespace geogauss {

MetricField::MetricField(int dim, Field g, MetricProvenance provenance, std::shared_ptr<const Diffeomorphism> source)
    : dim_(dim), g_(std::move(g)), provenance_(provenance), source_(std::move(source)) {
  if (dim_ < 1) throw InvalidArgument("metric dimension must be positive");
  if (provenance_ == MetricProvenance::pullback && !source_) {
    throw InvalidArgument("pullback metric requires its diffeomorphism");
  }
}

MetricField euclidean_metric(int dim) {
  return MetricField(dim, [dim](const VectorRef&) -> Matrix { return Matrix::Identity(dim, dim); },
                     MetricProvenance::euclidean);
}

MetricField pullback_metric(const Diffeomorphism& map) {
  auto phi = std::make_shared<const Diffeomorphism>(map);
  return MetricField(
      map.dim(),
      [phi](const VectorRef& y) -> Matrix {
        const Matrix j = phi->inverse_jacobian(y);
        return j.transpose() * j;
      },
      MetricProvenance::pullback, phi);
}

MetricField custom_metric(int dim, MetricField::Field g) {
  return MetricField(dim, std::move(g), MetricProvenance::custom);
}

double christoffel_step(const VectorRef& x) { return 1e-4 * std::max(1.0, x.norm()); }

Christoffel christoffel(const MetricField& metric, const VectorRef& x) {
  return christoffel(metric, x, christoffel_step(x));
}

Christoffel christoffel(const MetricField& metric, const VectorRef& x, double h) {
  if (!(h > 0.0)) throw InvalidArgument("christoffel: step must be positive");
  const int d = metric.dim();
  if (x.size() != d) throw InvalidArgument("christoffel: point has the wrong dimension");

  // dg[l](i, j) = d g_ij / d x_l
  std::vector<Matrix> dg(static_cast<std::size_t>(d));
  Vector p = x;
  for (int l = 0; l < d; ++l) {
    p[l] = x[l] + h;
    const Matrix gp = metric(p);
    p[l] = x[l] - h;
    const Matrix gm = metric(p);
    p[l] = x[l];
    dg[static_cast<std::size_t>(l)] = (gp - gm) / (2.0 * h);
  }
  const Eigen::LDLT<Matrix> ldlt(metric(x));
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericalError("christoffel: metric is not invertible at the evaluation point");
  }
  const Matrix g_inv = ldlt.solve(Matrix::Identity(d, d));
  if (!g_inv.allFinite()) throw NumericalError("christoffel: metric is not invertible at the evaluation point");

  Christoffel gamma(d);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      // first kind: Gamma_{l,ij} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
      Vector first(d);
      for (int l = 0; l < d; ++l) {
        first[l] = 0.5 * (dg[static_cast<std::size_t>(i)](j, l) + dg[static_cast<std::size_t>(j)](i, l) -
                          dg[static_cast<std::size_t>(l)](i, j));
      }
      const Vector second = g_inv * first;
      for (int k = 0; k < d; ++k) {
        gamma(k, i, j) = second[k];
        gamma(k, j, i) = second[k];
      }
    }
  }
  return gamma;
}

namespace {

// State (x, v) packed as [x; v]; returns (v, -Gamma(v, v)).
Vector geodesic_rhs(const MetricField& metric, const Vector& state) {
  const int d = metric.dim();
  const Vector x = state.head(d);
  const Vector v = state.tail(d);
  const Christoffel gamma = christoffel(metric, x);
  Vector out(2 * d);
  out.head(d) = v;
  for (int k = 0; k < d; ++k) {
    double acc = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) acc += gamma(k, i, j) * v[i] * v[j];
    out[d + k] = -acc;
  }
  return out;
}

}  // namespace

namespace {
constexpr double kEnergyTol = 1e-2;
}  // namespace

Vector geodesic_shoot(const MetricField& metric, const VectorRef& x0, const VectorRef& v, int steps, double t_end) {
  if (steps < 100) throw InvalidArgument("geodesic_shoot: steps must be at least 100");
  const int d = metric.dim();
  if (x0.size() != d || v.size() != d) throw InvalidArgument("geodesic_shoot: dimension mismatch");
  if (metric.provenance() == MetricProvenance::euclidean) return x0 + t_end * v;

  Vector state(2 * d);
  state << x0, v;
  const double energy0 = v.dot(metric(x0) * v);
  const double h = t_end / steps;
  for (int s = 0; s < steps; ++s) {
    const Vector k1 = geodesic_rhs(metric, state);
    const Vector k2 = geodesic_rhs(metric, state + 0.5 * h * k1);
    const Vector k3 = geodesic_rhs(metric, state + 0.5 * h * k2);
    const Vector k4 = geodesic_rhs(metric, state + h * k3);
    state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!state.allFinite()) {
      throw NumericalError("geodesic_shoot: non-finite state at step " + std::to_string(s + 1));
    }
  }
  const Vector vel = state.tail(d);
  const double energy1 = vel.dot(metric(state.head(d)) * vel);
  if (!(std::abs(energy1 - energy0) <= kEnergyTol * std::max(energy0, 1e-300))) {
    std::ostringstream msg;
    msg << "geodesic_shoot: speed not conserved (relative drift " << std::abs(energy1 - energy0) / std::max(energy0, 1e-300)
        << "); the geodesic leaves the regular region or steps are too coarse";
    throw NumericalError(msg.str());
  }
  return state.head(d);
}

Vector exp_map_closed(const Diffeomorphism& map, const VectorRef& y, const VectorRef& v) {
  const Vector x = map.inverse(y);
  if (!x.allFinite()) throw InvalidArgument("exp_map_closed: base point lies outside the image of the map");
  return map.forward(x + map.inverse_jacobian(y) * v);
}

RiemannGA::RiemannGA(MetricField m, Vector base, Gaussian t)
    : metric(std::move(m)), base_point(std::move(base)), tangent(std::move(t)) {
  if (metric.dim() != base_point.size() || tangent.dim() != base_point.size()) {
    throw InvalidArgument("RiemannGA: dimension mismatch");
  }
}

RiemannGA riemann_ga_from_reparam(const ReparamGA& ga) {
  const Vector& mu = ga.base.mean();
  const Matrix j = ga.map.jacobian(mu);
  return RiemannGA(pullback_metric(ga.map), ga.map.forward(mu),
                   Gaussian::from_factor(Vector::Zero(mu.size()), j * ga.base.factor()));
}

ReparamGA reparam_from_riemann(const RiemannGA& ga) {
  const int d = ga.metric.dim();
  switch (ga.metric.provenance()) {
    case MetricProvenance::euclidean:
      return ReparamGA(make_affine(Matrix::Identity(d, d), ga.base_point), ga.tangent);
    case MetricProvenance::pullback: {
      // exp_y(v) = phi(phi^{-1}(y) + D_y phi^{-1} v): an affine map followed by phi.
      const Diffeomorphism& phi = *ga.metric.source();
      const Vector x = phi.inverse(ga.base_point);
      if (!x.allFinite()) throw InvalidArgument("reparam_from_riemann: base point outside the image of the map");
      return ReparamGA(compose({phi, make_affine(phi.inverse_jacobian(ga.base_point), x)}), ga.tangent);
    }
    case MetricProvenance::custom:
      break;
  }
  throw InvalidArgument("reparam_from_riemann: flatness of a custom metric cannot be certified");
}

Vector riemann_exp(const MetricField& metric, const VectorRef& y, const VectorRef& v, ExpIntegrator integrator,
                   int steps) {
  if (integrator == ExpIntegrator::ode) return geodesic_shoot(metric, y, v, steps);
  switch (metric.provenance()) {
    case MetricProvenance::euclidean: return y + v;
    case MetricProvenance::pullback: return exp_map_closed(*metric.source(), y, v);
    case MetricProvenance::custom: break;
  }
  throw InvalidArgument("closed-form exponential map requires a euclidean or pullback metric");
}

Matrix riemann_ga_sample(const RiemannGA& ga, int n, std::uint64_t seed, ExpIntegrator integrator, int steps) {
  if (n < 1) throw InvalidArgument("riemann_ga_sample: n must be at least 1");
  if (integrator == ExpIntegrator::closed && ga.metric.provenance() == MetricProvenance::custom) {
    throw InvalidArgument("riemann_ga_sample: closed integrator requires a pullback metric");
  }
  Matrix out(n, ga.metric.dim());
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      CounterRng rng(seed, r);
      const Vector v = ga.tangent.draw(rng);
      out.row(static_cast<Eigen::Index>(r)) = riemann_exp(ga.metric, ga.base_point, v, integrator, steps).transpose();
    }
  });
  return out;
}

}  // namespace geogauss
