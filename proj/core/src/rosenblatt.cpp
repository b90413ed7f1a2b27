#include "geogauss/rosenblatt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "geogauss/errors.hpp"
#include "geogauss/normal.hpp"
#include "geogauss/quadrature.hpp"

namespace geogauss {

namespace {

constexpr double kMinMass = 1e-300;

double hermite(double fa, double fb, double da, double db, double h, double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * fa + (t3 - 2 * t2 + t) * h * da + (-2 * t3 + 3 * t2) * fb +
         (t3 - t2) * h * db;
}

double hermite_derivative(double fa, double fb, double da, double db, double h, double t) {
  const double t2 = t * t;
  return (6 * t2 - 6 * t) / h * fa + (3 * t2 - 4 * t + 1) * da + (-6 * t2 + 6 * t) / h * fb +
         (3 * t2 - 2 * t) * db;
}

// Fritsch-Carlson: shrink node slopes so each cubic piece stays monotone.
void limit_slopes(const std::vector<double>& x, const std::vector<double>& f, std::vector<double>& d) {
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    const double delta = (f[k + 1] - f[k]) / (x[k + 1] - x[k]);
    if (delta <= 0.0) {
      d[k] = 0.0;
      d[k + 1] = 0.0;
      continue;
    }
    const double a = d[k] / delta;
    const double b = d[k + 1] / delta;
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double tau = 3.0 / std::sqrt(r);
      d[k] = tau * a * delta;
      d[k + 1] = tau * b * delta;
    }
  }
}

double prefix_step(double x) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(x));
}

}  // namespace

// ---------------------------------------------------------------- CdfTable

double CdfTable::eval_cdf(double x) const {
  if (!(x > nodes.front())) return 0.0;
  if (!(x < nodes.back())) return 1.0;
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - nodes.begin()) - 1;
  const double h = nodes[k + 1] - nodes[k];
  const double v = hermite(cdf[k], cdf[k + 1], slope[k], slope[k + 1], h, (x - nodes[k]) / h);
  return std::clamp(v, cdf[k], cdf[k + 1]);
}

double CdfTable::eval_pdf(double x) const {
  if (x < nodes.front() || x > nodes.back()) return 0.0;
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  if (it == nodes.end()) --it;
  const std::size_t k = static_cast<std::size_t>(it - nodes.begin()) - 1;
  const double h = nodes[k + 1] - nodes[k];
  return std::max(0.0, hermite_derivative(cdf[k], cdf[k + 1], slope[k], slope[k + 1], h, (x - nodes[k]) / h));
}

double CdfTable::quantile(double u) const {
  if (u <= cdf.front()) return nodes.front();
  if (u >= cdf.back()) return nodes.back();
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  const std::size_t k = static_cast<std::size_t>(it - cdf.begin()) - 1;
  double a = nodes[k];
  double b = nodes[k + 1];
  const double h = b - a;
  auto g = [&](double x) {
    return hermite(cdf[k], cdf[k + 1], slope[k], slope[k + 1], h, (x - nodes[k]) / h) - u;
  };
  // Start from the secant, then safeguarded Newton with bisection fallback.
  const double span = cdf[k + 1] - cdf[k];
  double x = span > 0.0 ? a + h * (u - cdf[k]) / span : 0.5 * (a + b);
  for (int iter = 0; iter < 200; ++iter) {
    const double gx = g(x);
    if (gx == 0.0) return x;
    if (gx > 0.0) b = x;
    else a = x;
    const double dg = hermite_derivative(cdf[k], cdf[k + 1], slope[k], slope[k + 1], h, (x - nodes[k]) / h);
    double next = dg > 0.0 ? x - gx / dg : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

// ---------------------------------------------------------- RosenblattMap

RosenblattMap::RosenblattMap(Density target, RosenblattSettings settings)
    : target_(std::move(target)), settings_(std::move(settings)) {
  const int d = target_.dim();
  if (d > settings_.dim_cap) {
    throw InvalidArgument("rosenblatt: dimension " + std::to_string(d) + " exceeds the dimension guard " +
                          std::to_string(settings_.dim_cap));
  }
  if (settings_.table_nodes < 3) throw InvalidArgument("rosenblatt: table_nodes must be at least 3");
  if (!(settings_.rel_tol > 0.0) || !(settings_.interp_tol > 0.0) || !(settings_.position_tol >= 0.0)) {
    throw InvalidArgument("rosenblatt: tolerances must be positive");
  }
  order_ = settings_.order;
  if (order_.empty()) {
    order_.resize(static_cast<std::size_t>(d));
    std::iota(order_.begin(), order_.end(), 0);
  }
  std::vector<int> sorted = order_;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(sorted.size()) != d || sorted[static_cast<std::size_t>(i)] != i) {
      throw InvalidArgument("rosenblatt: order must be a permutation of 0..d-1");
    }
  }
  cache_.resize(static_cast<std::size_t>(d));
  table(0, {});  // the unconditional first axis is always needed
}

void RosenblattMap::check_axis(int axis, std::span<const double> prefix) const {
  if (axis < 0 || axis >= dim()) throw InvalidArgument("rosenblatt: axis out of range");
  if (static_cast<int>(prefix.size()) != axis) throw InvalidArgument("rosenblatt: prefix length must equal the axis index");
  for (double p : prefix)
    if (!std::isfinite(p)) throw InvalidArgument("rosenblatt: prefix must be finite");
}

double RosenblattMap::marginal(int axis, Vector& point) const {
  if (axis == dim() - 1) return std::exp(target_.log_pdf(point));
  const int next = order_[static_cast<std::size_t>(axis + 1)];
  const Bracket b = target_.support_hint()[static_cast<std::size_t>(next)];
  const auto res = integrate_adaptive(
      [&](double t) {
        point[next] = t;
        return marginal(axis + 1, point);
      },
      b.lo, b.hi, settings_.rel_tol);
  return res.value;
}

std::shared_ptr<const CdfTable> RosenblattMap::build_table(int axis, std::span<const double> prefix) const {
  const int coord = order_[static_cast<std::size_t>(axis)];
  const Bracket bracket = target_.support_hint()[static_cast<std::size_t>(coord)];
  Vector point = Vector::Zero(dim());
  for (std::size_t j = 0; j < prefix.size(); ++j) point[order_[j]] = prefix[j];

  auto table = std::make_shared<CdfTable>();
  long evals = 0;
  auto m = [&](double t) {
    ++evals;
    point[coord] = t;
    return marginal(axis, point);
  };

  // Segment k spans [nodes[k], nodes[k+1]] and carries 4-point Gauss integrals
  // over its two halves and over the whole segment.
  struct Segment {
    double left, right, whole;
  };
  const int n0 = settings_.table_nodes;
  std::vector<double> nodes(static_cast<std::size_t>(n0));
  std::vector<double> mvals(nodes.size());
  for (int k = 0; k < n0; ++k) {
    nodes[static_cast<std::size_t>(k)] =
        k + 1 == n0 ? bracket.hi : bracket.lo + bracket.width() * k / (n0 - 1);
  }
  for (std::size_t k = 0; k < nodes.size(); ++k) mvals[k] = m(nodes[k]);
  auto halves = [&](double a, double b, double whole) {
    const double mid = 0.5 * (a + b);
    return Segment{gauss_legendre4(m, a, mid), gauss_legendre4(m, mid, b), whole};
  };
  std::vector<Segment> segs;
  segs.reserve(nodes.size() - 1);
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    segs.push_back(halves(nodes[k], nodes[k + 1], gauss_legendre4(m, nodes[k], nodes[k + 1])));
  }

  double total = 0.0;
  double quad_err = 0.0;
  double interp_err = 0.0;
  while (true) {
    total = 0.0;
    quad_err = 0.0;
    for (const auto& s : segs) {
      total += s.left + s.right;
      quad_err += std::abs(s.left + s.right - s.whole);
    }
    if (!(total > kMinMass)) {
      throw NumericalError("rosenblatt: conditional mass below 1e-300; support_hint does not cover the density");
    }
    const bool quad_ok = quad_err <= settings_.rel_tol * total;
    const double seg_quad_tol = settings_.rel_tol * total / static_cast<double>(segs.size());

    std::vector<char> split(segs.size(), 0);
    bool any = false;
    double cum = 0.0;
    interp_err = 0.0;
    for (std::size_t k = 0; k < segs.size(); ++k) {
      const auto& s = segs[k];
      const double h = nodes[k + 1] - nodes[k];
      const double at_mid = hermite(cum, cum + s.left + s.right, mvals[k], mvals[k + 1], h, 0.5);
      const double err = std::abs(at_mid - (cum + s.left)) / total;
      interp_err = std::max(interp_err, err);
      const double tol = std::max(settings_.interp_tol,
                                  settings_.position_tol * std::min(mvals[k], mvals[k + 1]) / total);
      if (err > tol || (!quad_ok && std::abs(s.left + s.right - s.whole) > seg_quad_tol)) {
        split[k] = 1;
        any = true;
      }
      cum += s.left + s.right;
    }
    const auto n_split = static_cast<std::size_t>(std::count(split.begin(), split.end(), 1));
    if (!any || static_cast<int>(nodes.size() + n_split) > settings_.max_table_nodes) break;

    std::vector<double> new_nodes;
    std::vector<double> new_m;
    std::vector<Segment> new_segs;
    new_nodes.reserve(nodes.size() + n_split);
    new_m.reserve(nodes.size() + n_split);
    new_segs.reserve(segs.size() + n_split);
    for (std::size_t k = 0; k < segs.size(); ++k) {
      new_nodes.push_back(nodes[k]);
      new_m.push_back(mvals[k]);
      if (!split[k]) {
        new_segs.push_back(segs[k]);
        continue;
      }
      const double a = nodes[k];
      const double b = nodes[k + 1];
      const double mid = 0.5 * (a + b);
      new_nodes.push_back(mid);
      new_m.push_back(m(mid));
      new_segs.push_back(halves(a, mid, segs[k].left));
      new_segs.push_back(halves(mid, b, segs[k].right));
    }
    new_nodes.push_back(nodes.back());
    new_m.push_back(mvals.back());
    nodes = std::move(new_nodes);
    mvals = std::move(new_m);
    segs = std::move(new_segs);
  }

  table->nodes = nodes;
  table->cdf.resize(nodes.size());
  table->slope.resize(nodes.size());
  double cum = 0.0;
  table->cdf[0] = 0.0;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    cum += segs[k].left + segs[k].right;
    table->cdf[k + 1] = cum / total;
  }
  table->cdf.back() = 1.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) table->slope[k] = mvals[k] / total;
  limit_slopes(table->nodes, table->cdf, table->slope);
  table->total = total;
  table->quad_error = quad_err / total;
  table->interp_error = interp_err;
  table->evaluations = evals;
  return table;
}

std::shared_ptr<const CdfTable> RosenblattMap::table(int axis, std::span<const double> prefix) const {
  check_axis(axis, prefix);
  std::vector<double> key(prefix.begin(), prefix.end());
  auto& cache = cache_[static_cast<std::size_t>(axis)];
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache.tables.find(key); it != cache.tables.end()) return it->second;
  }
  auto built = build_table(axis, prefix);
  std::lock_guard lock(mutex_);
  diagnostics_.tables_built += 1;
  diagnostics_.density_evaluations += built->evaluations;
  diagnostics_.max_quad_error = std::max(diagnostics_.max_quad_error, built->quad_error);
  diagnostics_.max_interp_error = std::max(diagnostics_.max_interp_error, built->interp_error);
  diagnostics_.max_nodes = std::max(diagnostics_.max_nodes, built->nodes.size());
  if (!frozen_ && settings_.cache_capacity > 0) {
    if (cache.tables.size() >= settings_.cache_capacity) {
      cache.tables.erase(cache.fifo.front());
      cache.fifo.pop_front();
    }
    if (cache.tables.emplace(key, built).second) cache.fifo.push_back(std::move(key));
  }
  return built;
}

double RosenblattMap::conditional_cdf(int axis, std::span<const double> prefix, double x) const {
  return std::clamp(table(axis, prefix)->eval_cdf(x), kCdfClamp, 1.0 - kCdfClamp);
}

double RosenblattMap::conditional_cdf_exact(int axis, std::span<const double> prefix, double x) const {
  check_axis(axis, prefix);
  const int coord = order_[static_cast<std::size_t>(axis)];
  const Bracket b = target_.support_hint()[static_cast<std::size_t>(coord)];
  Vector point = Vector::Zero(dim());
  for (std::size_t j = 0; j < prefix.size(); ++j) point[order_[j]] = prefix[j];
  auto m = [&](double t) {
    point[coord] = t;
    return marginal(axis, point);
  };
  const double den = integrate_adaptive(m, b.lo, b.hi, settings_.rel_tol).value;
  if (!(den > kMinMass)) {
    throw NumericalError("rosenblatt: conditional mass below 1e-300; support_hint does not cover the density");
  }
  const double upper = std::clamp(x, b.lo, b.hi);
  const double num = upper > b.lo ? integrate_adaptive(m, b.lo, upper, settings_.rel_tol).value : 0.0;
  return std::clamp(num / den, kCdfClamp, 1.0 - kCdfClamp);
}

double RosenblattMap::conditional_pdf(int axis, std::span<const double> prefix, double x) const {
  return table(axis, prefix)->eval_pdf(x);
}

double RosenblattMap::conditional_quantile(int axis, std::span<const double> prefix, double u) const {
  if (!(u >= kCdfClamp && u <= 1.0 - kCdfClamp)) {
    throw NumericalError("rosenblatt: quantile level outside the clamped range [1e-15, 1 - 1e-15]");
  }
  const auto t = table(axis, prefix);
  if (u < t->cdf.front() || u > t->cdf.back()) throw NumericalError("rosenblatt: quantile bracket failure");
  return t->quantile(u);
}

Vector RosenblattMap::to_uniform(const VectorRef& x) const {
  if (x.size() != dim()) throw InvalidArgument("rosenblatt: point has the wrong dimension");
  Vector u(dim());
  std::vector<double> prefix;
  for (int k = 0; k < dim(); ++k) {
    const double xk = x[order_[static_cast<std::size_t>(k)]];
    u[k] = conditional_cdf(k, prefix, xk);
    prefix.push_back(xk);
  }
  return u;
}

Vector RosenblattMap::from_uniform(const VectorRef& u) const {
  if (u.size() != dim()) throw InvalidArgument("rosenblatt: point has the wrong dimension");
  Vector x(dim());
  std::vector<double> prefix;
  for (int k = 0; k < dim(); ++k) {
    const double xk = conditional_quantile(k, prefix, u[k]);
    x[order_[static_cast<std::size_t>(k)]] = xk;
    prefix.push_back(xk);
  }
  return x;
}

Matrix RosenblattMap::to_uniform_jacobian(const VectorRef& x) const {
  if (x.size() != dim()) throw InvalidArgument("rosenblatt: point has the wrong dimension");
  Matrix jac = Matrix::Zero(dim(), dim());
  std::vector<double> prefix;
  for (int k = 0; k < dim(); ++k) {
    const double xk = x[order_[static_cast<std::size_t>(k)]];
    jac(k, order_[static_cast<std::size_t>(k)]) = conditional_pdf(k, prefix, xk);
    for (int j = 0; j < k; ++j) {
      std::vector<double> p = prefix;
      const double h = prefix_step(prefix[static_cast<std::size_t>(j)]);
      p[static_cast<std::size_t>(j)] = prefix[static_cast<std::size_t>(j)] + h;
      const double up = table(k, p)->eval_cdf(xk);
      p[static_cast<std::size_t>(j)] = prefix[static_cast<std::size_t>(j)] - h;
      const double dn = table(k, p)->eval_cdf(xk);
      jac(k, order_[static_cast<std::size_t>(j)]) = (up - dn) / (2.0 * h);
    }
    prefix.push_back(xk);
  }
  return jac;
}

void RosenblattMap::freeze() {
  std::lock_guard lock(mutex_);
  frozen_ = true;
}

bool RosenblattMap::frozen() const {
  std::lock_guard lock(mutex_);
  return frozen_;
}

RosenblattDiagnostics RosenblattMap::diagnostics() const {
  std::lock_guard lock(mutex_);
  return diagnostics_;
}

// ------------------------------------------------------- universal map

Diffeomorphism build_universal_map(std::shared_ptr<RosenblattMap> map) {
  if (!map) throw InvalidArgument("build_universal_map: null map");
  map->freeze();
  std::shared_ptr<const RosenblattMap> m = std::move(map);
  const int d = m->dim();
  auto to_levels = [](const VectorRef& z) -> Vector {
    return z.unaryExpr([](double v) { return std::clamp(std_normal_cdf(v), kCdfClamp, 1.0 - kCdfClamp); });
  };
  auto forward = [m, to_levels](const VectorRef& z) -> Vector { return m->from_uniform(to_levels(z)); };
  auto inverse = [m](const VectorRef& x) -> Vector {
    if (!x.allFinite()) return Vector::Constant(x.size(), std::numeric_limits<double>::quiet_NaN());
    return m->to_uniform(x).unaryExpr([](double u) { return std_normal_quantile(u); });
  };
  auto jacobian = [m, forward](const VectorRef& z) -> Matrix {
    const Vector x = forward(z);
    const Matrix dt = m->to_uniform_jacobian(x);
    Vector phi(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) phi[i] = std_normal_pdf(z[i]);
    return dt.fullPivLu().solve(Matrix(phi.asDiagonal()));
  };
  nlohmann::json spec;
  if (!m->target().spec().is_null()) spec = {{"kind", "rosenblatt"}, {"density", m->target().spec()}};
  Diffeomorphism out(d, DiffeoKind::triangular, forward, inverse, jacobian, spec);
  out.set_log_abs_det([m, forward](const VectorRef& z) {
    // det D_z phi = prod phi(z_k) / prod f_k(x_k | x_<k); D to_uniform is
    // triangular up to the axis permutation.
    const Vector x = forward(z);
    double acc = 0.0;
    std::vector<double> prefix;
    for (int k = 0; k < m->dim(); ++k) {
      const double xk = x[m->order()[static_cast<std::size_t>(k)]];
      acc += std_normal_log_pdf(z[k]) - std::log(m->conditional_pdf(k, prefix, xk));
      prefix.push_back(xk);
    }
    return acc;
  });
  return out;
}

Diffeomorphism build_universal_map(const Density& target, RosenblattSettings settings) {
  return build_universal_map(std::make_shared<RosenblattMap>(target, std::move(settings)));
}

}  // namespace geogauss
