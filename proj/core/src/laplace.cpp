#include "geogauss/laplace.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "geogauss/errors.hpp"

namespace geogauss {

namespace {

double hessian_step(double x) {
  return std::pow(std::numeric_limits<double>::epsilon(), 0.25) * std::max(1.0, std::abs(x));
}

}  // namespace

Matrix neg_log_hessian(const Density& density, const VectorRef& x) {
  const Eigen::Index d = x.size();
  Matrix h(d, d);
  Vector p = x;
  const double f0 = density.log_pdf(x);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double hi = hessian_step(x[i]);
    p[i] = x[i] + hi;
    const double fp = density.log_pdf(p);
    p[i] = x[i] - hi;
    const double fm = density.log_pdf(p);
    p[i] = x[i];
    h(i, i) = -(fp - 2.0 * f0 + fm) / (hi * hi);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double hj = hessian_step(x[j]);
      double acc = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          p[i] = x[i] + si * hi;
          p[j] = x[j] + sj * hj;
          acc += si * sj * density.log_pdf(p);
        }
      }
      p[i] = x[i];
      p[j] = x[j];
      h(i, j) = h(j, i) = -acc / (4.0 * hi * hj);
    }
  }
  return 0.5 * (h + h.transpose());
}

ModeSearch find_map(const Density& density, const VectorRef& x0, double tol, int max_iter) {
  if (!x0.allFinite()) throw InvalidArgument("find_map: x0 must be finite");
  if (x0.size() != density.dim()) throw InvalidArgument("find_map: x0 has the wrong dimension");
  if (!(tol > 0.0)) throw InvalidArgument("find_map: tol must be positive");

  ModeSearch out;
  Vector x = x0;
  double fx = density.log_pdf(x);
  Vector g = grad_log_pdf(density, x);
  for (int it = 0;; ++it) {
    out.iterations = it;
    out.grad_inf_norm = g.cwiseAbs().maxCoeff();
    if (out.grad_inf_norm <= tol) {
      out.converged = true;
      break;
    }
    if (it >= max_iter) break;

    // Newton direction on -log p: solve H p = g with H = -Hess log p.
    const Matrix h = neg_log_hessian(density, x);
    Vector step = h.ldlt().solve(g);
    double slope = g.dot(step);
    const bool newton_ok = step.allFinite() && slope > 0.0 &&
                           Eigen::SelfAdjointEigenSolver<Matrix>(h, Eigen::EigenvaluesOnly)
                                   .eigenvalues()
                                   .minCoeff() > 0.0;
    if (!newton_ok) {
      step = g;
      slope = g.squaredNorm();
    }

    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      const Vector trial = x + alpha * step;
      const double ft = density.log_pdf(trial);
      if (std::isfinite(ft) && ft >= fx + 1e-4 * alpha * slope) {
        x = trial;
        fx = ft;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // No measurable ascent left along the step; accept the point as is and
      // let the gradient test decide.
      out.iterations = it + 1;
      g = grad_log_pdf(density, x);
      out.grad_inf_norm = g.cwiseAbs().maxCoeff();
      out.converged = out.grad_inf_norm <= tol;
      break;
    }
    g = grad_log_pdf(density, x);
  }
  out.mode = x;
  return out;
}

LaplaceResult laplace_approx(const Density& density, const VectorRef& x0, double tol, int max_iter) {
  const ModeSearch search = find_map(density, x0, tol, max_iter);
  LaplaceResult out;
  out.mode = search.mode;
  out.iterations = search.iterations;
  out.converged = search.converged;
  out.grad_inf_norm = search.grad_inf_norm;
  out.neg_log_hessian = neg_log_hessian(density, search.mode);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(out.neg_log_hessian);
  const Vector spectrum = eig.eigenvalues();
  if (!(spectrum.minCoeff() > 0.0)) {
    if (out.converged) {
      throw NotPositiveDefinite("Laplace: Hessian of -log p at the mode is not positive definite", spectrum);
    }
    return out;
  }
  const Vector inv_vals = spectrum.cwiseInverse();
  Matrix cov = eig.eigenvectors() * inv_vals.asDiagonal() * eig.eigenvectors().transpose();
  cov = 0.5 * (cov + cov.transpose());
  out.approx.emplace(out.mode, cov);
  return out;
}

ReparamLaplaceResult reparam_laplace(const Density& target, const Diffeomorphism& map, const VectorRef& x0,
                                     double tol, int max_iter) {
  const Vector z0 = map.inverse(x0);
  if (!z0.allFinite()) throw InvalidArgument("reparam_laplace: x0 lies outside the image of the map");
  ReparamLaplaceResult out;
  out.latent = laplace_approx(pullback_density(target, map), z0, tol, max_iter);
  if (out.latent.approx) out.approx.emplace(map, *out.latent.approx);
  return out;
}

}  // namespace geogauss
