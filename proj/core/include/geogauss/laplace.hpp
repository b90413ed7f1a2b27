#pragma once

#include <optional>

#include "geogauss/density.hpp"
#include "geogauss/diffeo.hpp"

namespace geogauss {

struct ModeSearch {
  Vector mode;
  bool converged = false;
  int iterations = 0;
  double grad_inf_norm = 0.0;
};

/// Local maximiser of log_pdf from x0. Newton steps on a finite-difference
/// Hessian; whenever the Newton direction is not an ascent direction the step
/// falls back to gradient ascent. Both use backtracking (Armijo) line search.
/// Converged means ||grad log_pdf||_inf <= tol within max_iter iterations.
ModeSearch find_map(const Density& density, const VectorRef& x0, double tol = 1e-8,
                    int max_iter = 200);

/// Central finite-difference Hessian of -log_pdf, step eps^(1/4) max(1,|x_i|),
/// symmetrised.
Matrix neg_log_hessian(const Density& density, const VectorRef& x);

struct LaplaceResult {
  /// N(mode, H^{-1}); empty only when the search did not converge and H is
  /// not positive definite at the last iterate.
  std::optional<Gaussian> approx;
  Vector mode;
  Matrix neg_log_hessian;
  int iterations = 0;
  bool converged = false;
  double grad_inf_norm = 0.0;
};

/// Laplace approximation around the mode reached from x0 (basin-local).
/// Throws NotPositiveDefinite, carrying H's eigenvalues, when the search
/// converged to a point where H is not SPD.
LaplaceResult laplace_approx(const Density& density, const VectorRef& x0, double tol = 1e-8,
                             int max_iter = 200);

struct ReparamLaplaceResult {
  LaplaceResult latent;  // Laplace fit of the pulled-back density, in map^{-1} coordinates
  std::optional<ReparamGA> approx;
};

/// Laplace-approximates (map^{-1})_* p and pushes the result forward through
/// map. x0 is given in the original coordinates.
ReparamLaplaceResult reparam_laplace(const Density& target, const Diffeomorphism& map,
                                     const VectorRef& x0, double tol = 1e-8, int max_iter = 200);

}  // namespace geogauss
