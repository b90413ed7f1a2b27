#pragma once

namespace geogauss {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double std_normal_pdf(double x);
double std_normal_log_pdf(double x);
double std_normal_cdf(double x);
/// Inverse of std_normal_cdf on (0, 1).
double std_normal_quantile(double p);

}  // namespace geogauss
