#include "geogauss/diffeo.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "geogauss/errors.hpp"
#include "geogauss/io.hpp"
#include "geogauss/parallel.hpp"

namespace geogauss {

namespace {

constexpr double kSingularDet = 1e-12;

double fd_step(double x) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(x));
}

/// Componentwise monotone map built from a scalar function, its inverse and
/// derivative.
struct Scalar {
  std::function<double(double)> f, finv, df;
};

Diffeomorphism componentwise(int dim, Scalar s, nlohmann::json spec) {
  if (dim < 1) throw InvalidArgument("diffeomorphism dimension must be positive");
  auto fwd = [s](const VectorRef& x) -> Vector { return x.unaryExpr(s.f); };
  auto inv = [s](const VectorRef& y) -> Vector { return y.unaryExpr(s.finv); };
  auto jac = [s](const VectorRef& x) -> Matrix { return x.unaryExpr(s.df).asDiagonal(); };
  Diffeomorphism d(dim, DiffeoKind::componentwise, fwd, inv, jac, std::move(spec));
  d.set_log_abs_det([s](const VectorRef& x) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) acc += std::log(std::abs(s.df(x[i])));
    return acc;
  });
  return d;
}

}  // namespace

std::string_view to_string(DiffeoKind kind) {
  switch (kind) {
    case DiffeoKind::affine: return "affine";
    case DiffeoKind::componentwise: return "componentwise";
    case DiffeoKind::triangular: return "triangular";
    case DiffeoKind::composite: return "composite";
  }
  return "unknown";
}

Diffeomorphism::Diffeomorphism(int dim, DiffeoKind kind, Map forward, Map inverse, JacobianFn jacobian,
                               nlohmann::json spec)
    : dim_(dim),
      kind_(kind),
      forward_(std::move(forward)),
      inverse_(std::move(inverse)),
      jacobian_(std::move(jacobian)),
      spec_(std::move(spec)) {
  if (dim_ < 1) throw InvalidArgument("diffeomorphism dimension must be positive");
  if (!forward_ || !inverse_) throw InvalidArgument("diffeomorphism needs forward and inverse maps");
}

Diffeomorphism& Diffeomorphism::set_log_abs_det(LogDetFn fn) {
  log_det_ = std::move(fn);
  return *this;
}

Matrix Diffeomorphism::jacobian(const VectorRef& x) const {
  if (jacobian_) return jacobian_(x);
  return fd_jacobian(forward_, x);
}

Matrix Diffeomorphism::inverse_jacobian(const VectorRef& y) const {
  const Vector x = inverse(y);
  if (!x.allFinite()) throw NumericalError("point lies outside the image of the diffeomorphism");
  const Matrix j = jacobian(x);
  Eigen::FullPivLU<Matrix> lu(j);
  if (!lu.isInvertible() || std::abs(lu.determinant()) < kSingularDet) {
    throw NumericalError("Jacobian is numerically singular");
  }
  return lu.inverse();
}

double Diffeomorphism::log_abs_det_jacobian(const VectorRef& x) const {
  if (log_det_) return log_det_(x);
  return std::log(std::abs(jacobian(x).determinant()));
}

Matrix fd_jacobian(const Diffeomorphism::Map& f, const VectorRef& x) {
  const Eigen::Index d = x.size();
  Vector probe = x;
  Matrix j;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double h = fd_step(x[i]);
    probe[i] = x[i] + h;
    const Vector fp = f(probe);
    probe[i] = x[i] - h;
    const Vector fm = f(probe);
    probe[i] = x[i];
    if (i == 0) j.resize(fp.size(), d);
    j.col(i) = (fp - fm) / (2.0 * h);
  }
  return j;
}

Diffeomorphism make_identity(int dim) {
  Diffeomorphism d(
      dim, DiffeoKind::affine, [](const VectorRef& x) -> Vector { return x; },
      [](const VectorRef& y) -> Vector { return y; },
      [dim](const VectorRef&) -> Matrix { return Matrix::Identity(dim, dim); },
      {{"kind", "identity"}, {"dim", dim}});
  d.set_log_abs_det([](const VectorRef&) { return 0.0; });
  return d;
}

Diffeomorphism make_affine(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size() || a.rows() == 0) {
    throw InvalidArgument("affine: A must be square and match b");
  }
  const Eigen::FullPivLU<Matrix> lu(a);
  const double det = lu.determinant();
  if (!(std::abs(det) > kSingularDet)) throw InvalidArgument("affine: A is singular");
  const Matrix a_inv = lu.inverse();
  const double log_det = std::log(std::abs(det));
  Diffeomorphism d(
      static_cast<int>(a.rows()), DiffeoKind::affine,
      [a, b](const VectorRef& x) -> Vector { return a * x + b; },
      [a_inv, b](const VectorRef& y) -> Vector { return a_inv * (y - b); },
      [a](const VectorRef&) -> Matrix { return a; },
      {{"kind", "affine"}, {"A", matrix_to_json(a)}, {"b", vector_to_json(b)}});
  d.set_log_abs_det([log_det](const VectorRef&) { return log_det; });
  return d;
}

Diffeomorphism make_exp(int dim) {
  return componentwise(
      dim,
      {[](double x) { return std::exp(x); },
       [](double y) { return y > 0.0 ? std::log(y) : std::numeric_limits<double>::quiet_NaN(); },
       [](double x) { return std::exp(x); }},
      {{"kind", "exp"}, {"dim", dim}});
}

Diffeomorphism make_sinh_arcsinh(int dim, double s, double t) {
  if (!(t > 0.0)) throw InvalidArgument("sinh_arcsinh: t must be positive");
  return componentwise(
      dim,
      {[s, t](double x) { return std::sinh(t * std::asinh(x) - s); },
       [s, t](double y) { return std::sinh((std::asinh(y) + s) / t); },
       [s, t](double x) { return std::cosh(t * std::asinh(x) - s) * t / std::sqrt(1.0 + x * x); }},
      {{"kind", "sinh_arcsinh"}, {"s", s}, {"t", t}, {"dim", dim}});
}

Diffeomorphism compose(std::vector<Diffeomorphism> maps) {
  if (maps.empty()) throw InvalidArgument("compose: empty composition");
  const int dim = maps.front().dim();
  nlohmann::json parts = nlohmann::json::array();
  bool serialisable = true;
  for (const auto& m : maps) {
    if (m.dim() != dim) throw InvalidArgument("compose: dimension mismatch");
    if (m.spec().is_null()) serialisable = false;
    parts.push_back(m.spec());
  }
  if (maps.size() == 1) return maps.front();
  auto chain = std::make_shared<const std::vector<Diffeomorphism>>(std::move(maps));
  auto fwd = [chain](const VectorRef& x) -> Vector {
    Vector y = x;
    for (auto it = chain->rbegin(); it != chain->rend(); ++it) y = it->forward(y);
    return y;
  };
  auto inv = [chain](const VectorRef& y) -> Vector {
    Vector x = y;
    for (const auto& m : *chain) x = m.inverse(x);
    return x;
  };
  auto jac = [chain, dim](const VectorRef& x) -> Matrix {
    Matrix j = Matrix::Identity(dim, dim);
    Vector p = x;
    for (auto it = chain->rbegin(); it != chain->rend(); ++it) {
      j = it->jacobian(p) * j;
      p = it->forward(p);
    }
    return j;
  };
  Diffeomorphism d(dim, DiffeoKind::composite, fwd, inv, jac,
                   serialisable ? nlohmann::json{{"kind", "compose"}, {"maps", parts}} : nlohmann::json());
  d.set_log_abs_det([chain](const VectorRef& x) {
    double acc = 0.0;
    Vector p = x;
    for (auto it = chain->rbegin(); it != chain->rend(); ++it) {
      acc += it->log_abs_det_jacobian(p);
      p = it->forward(p);
    }
    return acc;
  });
  return d;
}

// -------------------------------------------------------------- ReparamGA

ReparamGA::ReparamGA(Diffeomorphism m, Gaussian b) : map(std::move(m)), base(std::move(b)) {
  if (map.dim() != base.dim()) throw InvalidArgument("ReparamGA: map and base dimensions differ");
}

double pushforward_log_pdf(const ReparamGA& ga, const VectorRef& y) {
  const Vector x = ga.map.inverse(y);
  if (!x.allFinite()) return -std::numeric_limits<double>::infinity();
  const double log_det = ga.map.log_abs_det_jacobian(x);
  if (!std::isfinite(log_det) || log_det < std::log(std::numeric_limits<double>::min())) {
    throw NumericalError("Jacobian numerically singular at the evaluation point");
  }
  return ga.base.log_pdf(x) - log_det;
}

Matrix sample(const ReparamGA& ga, int n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample: n must be at least 1");
  Matrix out(n, ga.map.dim());
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      CounterRng rng(seed, r);
      out.row(static_cast<Eigen::Index>(r)) = ga.map.forward(ga.base.draw(rng)).transpose();
    }
  });
  return out;
}

Density pushforward_density(const ReparamGA& ga) {
  const int d = ga.map.dim();
  Vector lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    const double sd = std::sqrt(ga.base.cov()(i, i));
    lo[i] = ga.base.mean()[i] - 8.0 * sd;
    hi[i] = ga.base.mean()[i] + 8.0 * sd;
  }
  Vector box_lo = Vector::Constant(d, std::numeric_limits<double>::infinity());
  Vector box_hi = -box_lo;
  for (unsigned corner = 0; corner < (1u << d); ++corner) {
    Vector c(d);
    for (int i = 0; i < d; ++i) c[i] = (corner >> i) & 1u ? hi[i] : lo[i];
    const Vector y = ga.map.forward(c);
    box_lo = box_lo.cwiseMin(y);
    box_hi = box_hi.cwiseMax(y);
  }
  std::vector<Bracket> support;
  for (int i = 0; i < d; ++i) support.push_back({box_lo[i], box_hi[i]});
  Density out(d, [ga](const VectorRef& y) { return pushforward_log_pdf(ga, y); }, support, true);
  out.set_sampler([ga](CounterRng& rng) { return ga.map.forward(ga.base.draw(rng)); });
  return out;
}

Density pullback_density(const Density& target, const Diffeomorphism& map) {
  if (target.dim() != map.dim()) throw InvalidArgument("pullback_density: dimension mismatch");
  const int d = map.dim();
  Vector box_lo = Vector::Constant(d, std::numeric_limits<double>::infinity());
  Vector box_hi = -box_lo;
  const auto& s = target.support_hint();
  for (unsigned corner = 0; corner < (1u << d); ++corner) {
    Vector c(d);
    for (int i = 0; i < d; ++i) c[i] = (corner >> i) & 1u ? s[i].hi : s[i].lo;
    const Vector z = map.inverse(c);
    if (!z.allFinite()) continue;
    box_lo = box_lo.cwiseMin(z);
    box_hi = box_hi.cwiseMax(z);
  }
  std::vector<Bracket> support;
  for (int i = 0; i < d; ++i) {
    if (!std::isfinite(box_lo[i]) || !(box_lo[i] < box_hi[i])) {
      throw NumericalError("pullback_density: support hint does not map back through the diffeomorphism");
    }
    support.push_back({box_lo[i], box_hi[i]});
  }
  Density out(
      d, [target, map](const VectorRef& z) { return target.log_pdf(map.forward(z)) + map.log_abs_det_jacobian(z); },
      support, target.normalised());
  if (target.has_sampler()) {
    out.set_sampler([target, map](CounterRng& rng) { return map.inverse(target.draw(rng)); });
  }
  return out;
}

}  // namespace geogauss
