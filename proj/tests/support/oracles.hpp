#pragma once

// Reference computations for tests. Deliberately naive and independent of the
// library code paths they check.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline double normal_pdf(double x, double mu = 0.0, double sigma = 1.0) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

inline double normal_cdf(double x, double mu = 0.0, double sigma = 1.0) {
  return 0.5 * (1.0 + std::erf((x - mu) / (sigma * std::numbers::sqrt2)));
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

inline double simpson2d(const std::function<double(double, double)>& f, double ax, double bx, double ay,
                        double by, int n = 400) {
  return simpson([&](double x) { return simpson([&](double y) { return f(x, y); }, ay, by, n); }, ax, bx, n);
}

/// Root of an increasing-through-zero function on [lo, hi] by plain bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct Mixture1d {
  std::vector<double> w, mu, sd;

  double pdf(double x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * normal_pdf(x, mu[k], sd[k]);
    return s;
  }
  double cdf(double x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * normal_cdf(x, mu[k], sd[k]);
    return s;
  }
  /// d/dx log pdf.
  double score(double x) const {
    double num = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) num += -w[k] * normal_pdf(x, mu[k], sd[k]) * (x - mu[k]) / (sd[k] * sd[k]);
    return num / pdf(x);
  }
};

/// KL(N(m1, s1^2) || N(m2, s2^2)).
inline double gaussian_kl(double m1, double s1, double m2, double s2) {
  return std::log(s2 / s1) + (s1 * s1 + (m1 - m2) * (m1 - m2)) / (2.0 * s2 * s2) - 0.5;
}

/// Rosenblatt-type map N(0, I) -> N(0, [[1, rho], [rho, 1]]).
inline std::pair<double, double> bivariate_normal_map(double z1, double z2, double rho) {
  return {z1, rho * z1 + std::sqrt(1.0 - rho * rho) * z2};
}

/// Five-point central difference.
inline double derivative(const std::function<double(double)>& f, double x, double h = 1e-3) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

}  // namespace oracle
