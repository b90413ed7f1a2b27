#pragma once

#include <functional>

namespace geogauss {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  long evaluations = 0;
};

/// Fixed 8-point Gauss-Legendre rule on [a, b].
double gauss_legendre8(const std::function<double(double)>& f, double a, double b);
/// Fixed 4-point Gauss-Legendre rule on [a, b].
double gauss_legendre4(const std::function<double(double)>& f, double a, double b);

/// Globally adaptive Gauss-Legendre quadrature. The interval is cut into
/// initial_panels panels; the panel with the largest |G8(panel) - G8(halves)|
/// is bisected until the summed estimate is within rel_tol * |value| (or
/// abs_tol), or max_panels is reached.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double rel_tol = 1e-8, double abs_tol = 0.0,
                              int initial_panels = 8, int max_panels = 4000);

}  // namespace geogauss
