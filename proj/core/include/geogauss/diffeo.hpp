#pragma once

#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "geogauss/density.hpp"
#include "geogauss/types.hpp"

namespace geogauss {

enum class DiffeoKind { affine, componentwise, triangular, composite };

std::string_view to_string(DiffeoKind kind);

/// A diffeomorphism of R^d with forward, inverse and Jacobian evaluators.
///
/// Points outside the image of forward (e.g. y <= 0 for exp) make inverse
/// return non-finite coordinates rather than throw.
class Diffeomorphism {
 public:
  using Map = std::function<Vector(const VectorRef&)>;
  using JacobianFn = std::function<Matrix(const VectorRef&)>;
  using LogDetFn = std::function<double(const VectorRef&)>;

  /// An empty jacobian falls back to central differences of forward.
  Diffeomorphism(int dim, DiffeoKind kind, Map forward, Map inverse, JacobianFn jacobian = {},
                 nlohmann::json spec = nullptr);

  Diffeomorphism& set_log_abs_det(LogDetFn fn);

  int dim() const { return dim_; }
  DiffeoKind kind() const { return kind_; }
  /// JSON description this map was built from (null when not serialisable).
  const nlohmann::json& spec() const { return spec_; }

  Vector forward(const VectorRef& x) const { return forward_(x); }
  Vector inverse(const VectorRef& y) const { return inverse_(y); }
  /// D_x forward.
  Matrix jacobian(const VectorRef& x) const;
  /// D_y inverse = (D_{inverse(y)} forward)^{-1}.
  Matrix inverse_jacobian(const VectorRef& y) const;
  double log_abs_det_jacobian(const VectorRef& x) const;

 private:
  int dim_;
  DiffeoKind kind_;
  Map forward_;
  Map inverse_;
  JacobianFn jacobian_;
  LogDetFn log_det_;
  nlohmann::json spec_;
};

Diffeomorphism make_identity(int dim);
Diffeomorphism make_affine(const Matrix& a, const Vector& b);
/// Componentwise x -> e^x.
Diffeomorphism make_exp(int dim);
/// Componentwise x -> sinh(t asinh(x) - s), t > 0.
Diffeomorphism make_sinh_arcsinh(int dim, double s, double t);
/// compose({f, g, h}) = f o g o h: the last map is applied first.
Diffeomorphism compose(std::vector<Diffeomorphism> maps);

/// Central-difference Jacobian of an arbitrary map, step eps^(1/3) max(1,|x_i|).
Matrix fd_jacobian(const Diffeomorphism::Map& f, const VectorRef& x);

/// Reparametrised Gaussian approximation: the law of map(X), X ~ base.
struct ReparamGA {
  Diffeomorphism map;
  Gaussian base;

  ReparamGA(Diffeomorphism map, Gaussian base);
};

/// log N(inverse(y); mean, cov) + log |det D_y inverse|. Returns -inf when
/// y lies outside the image of the map.
double pushforward_log_pdf(const ReparamGA& ga, const VectorRef& y);

/// Rows are map(mean + S z_r) with z_r drawn from CounterRng(seed, r).
/// Identical (seed, n) give identical matrices.
Matrix sample(const ReparamGA& ga, int n, std::uint64_t seed);

/// The pushforward as a Density (exact sampler attached). The support hint is
/// the bounding box of the images of the corners of the base's 8-sigma box.
Density pushforward_density(const ReparamGA& ga);

/// (map^{-1})_* p: log p(map(z)) + log |det D_z map|.
Density pullback_density(const Density& target, const Diffeomorphism& map);

}  // namespace geogauss
