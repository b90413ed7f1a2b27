#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "geogauss/density.hpp"
#include "geogauss/diffeo.hpp"

namespace geogauss {

/// Conditional CDFs are clamped into [kCdfClamp, 1 - kCdfClamp] so that
/// composing with the normal quantile never produces infinities.
inline constexpr double kCdfClamp = 1e-15;

struct RosenblattSettings {
  /// Initial uniform grid per conditional CDF table.
  int table_nodes = 257;
  /// Upper bound on nodes after on-demand refinement.
  int max_table_nodes = 16385;
  /// Relative tolerance of the adaptive Gauss-Legendre quadrature.
  double rel_tol = 1e-8;
  /// A segment is bisected while the monotone cubic interpolant misses the
  /// integrated CDF at its midpoint by more than
  /// max(interp_tol, position_tol * local conditional density), i.e. by more
  /// than position_tol in x wherever the density is not negligible.
  double interp_tol = 1e-11;
  double position_tol = 1e-7;
  /// Nested quadrature costs O(nodes^d); refuse larger dimensions.
  int dim_cap = 3;
  /// Axis ordering of the triangular construction; empty means 0..d-1.
  std::vector<int> order;
  /// Per-axis prefix cache size (tables are evicted first-in first-out).
  std::size_t cache_capacity = 4096;
};

/// Tabulated CDF of one conditional: nodes on the support bracket, normalised
/// cumulative mass, and density at every node. Between nodes the CDF is the
/// Fritsch-Carlson monotone cubic Hermite interpolant.
struct CdfTable {
  std::vector<double> nodes;
  std::vector<double> cdf;
  std::vector<double> slope;  // limited derivative used by the interpolant
  double total = 0.0;         // unnormalised mass inside the bracket
  double quad_error = 0.0;    // estimated absolute quadrature error / total
  double interp_error = 0.0;  // largest midpoint interpolation discrepancy seen
  long evaluations = 0;       // marginal density evaluations used to build

  double eval_cdf(double x) const;
  double eval_pdf(double x) const;
  /// x with eval_cdf(x) = u; u must lie in [cdf.front(), cdf.back()].
  double quantile(double u) const;
};

struct RosenblattDiagnostics {
  long tables_built = 0;
  long density_evaluations = 0;
  double max_quad_error = 0.0;
  double max_interp_error = 0.0;
  std::size_t max_nodes = 0;
};

/// Triangular map sending the target to Uniform(0,1)^d through successive
/// conditional CDFs F(x_k | x_<k), k in construction order.
///
/// Axes are 0-based positions in the construction order; a prefix holds the
/// coordinates of the preceding axes in that order. Tables are cached per
/// prefix. Before freeze() the cache grows (single writer); afterwards lookups
/// that miss are computed but not stored, so the map is safely shared.
class RosenblattMap {
 public:
  explicit RosenblattMap(Density target, RosenblattSettings settings = {});

  RosenblattMap(const RosenblattMap&) = delete;
  RosenblattMap& operator=(const RosenblattMap&) = delete;

  int dim() const { return target_.dim(); }
  const Density& target() const { return target_; }
  const RosenblattSettings& settings() const { return settings_; }
  const std::vector<int>& order() const { return order_; }

  /// Cached path: tabulated conditional CDF, clamped.
  double conditional_cdf(int axis, std::span<const double> prefix, double x) const;
  /// Slow path: nested adaptive quadrature of numerator and denominator.
  double conditional_cdf_exact(int axis, std::span<const double> prefix, double x) const;
  /// Derivative of the cached conditional CDF in x.
  double conditional_pdf(int axis, std::span<const double> prefix, double x) const;
  /// Inverse of conditional_cdf in x, for u in [kCdfClamp, 1 - kCdfClamp].
  double conditional_quantile(int axis, std::span<const double> prefix, double u) const;

  /// x (original coordinates) -> u in (0,1)^d (construction order).
  Vector to_uniform(const VectorRef& x) const;
  /// Inverse of to_uniform.
  Vector from_uniform(const VectorRef& u) const;
  /// D_x to_uniform; lower triangular in construction order. Off-diagonal
  /// entries are central differences in the prefix.
  Matrix to_uniform_jacobian(const VectorRef& x) const;

  void freeze();
  bool frozen() const;
  RosenblattDiagnostics diagnostics() const;

  /// Builds (or fetches) the table for one conditional.
  std::shared_ptr<const CdfTable> table(int axis, std::span<const double> prefix) const;

 private:
  std::shared_ptr<const CdfTable> build_table(int axis, std::span<const double> prefix) const;
  double marginal(int axis, Vector& point) const;
  void check_axis(int axis, std::span<const double> prefix) const;

  Density target_;
  RosenblattSettings settings_;
  std::vector<int> order_;

  struct AxisCache {
    std::map<std::vector<double>, std::shared_ptr<const CdfTable>> tables;
    std::deque<std::vector<double>> fifo;
  };
  mutable std::mutex mutex_;
  mutable std::vector<AxisCache> cache_;
  mutable RosenblattDiagnostics diagnostics_;
  bool frozen_ = false;
};

/// phi = to_uniform^{-1} o (componentwise standard normal CDF), so that
/// phi_* N(0, I) equals the target. The inverse is the componentwise normal
/// quantile of to_uniform. The map is frozen before being wrapped.
Diffeomorphism build_universal_map(std::shared_ptr<RosenblattMap> map);
Diffeomorphism build_universal_map(const Density& target, RosenblattSettings settings = {});

}  // namespace geogauss
