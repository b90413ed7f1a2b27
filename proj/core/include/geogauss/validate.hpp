#pragma once

#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace geogauss {

struct KSReport {
  double statistic = 0.0;
  long n = 0;
  double critical_05 = 0.0;  // 1.36 / sqrt(n)
  double critical_01 = 0.0;  // 1.63 / sqrt(n)
  double alpha = 0.01;
  double allowance = 0.0;    // added when the tested map is numerically built
  bool pass = false;

  double threshold() const { return (alpha <= 0.01 ? critical_01 : critical_05) + allowance; }
};

/// One-sample Kolmogorov-Smirnov statistic sup_x |F_n(x) - F(x)|, evaluated
/// exactly at the sorted samples. alpha selects 0.05 or 0.01 critical values.
/// Throws InvalidArgument for n < 10 or when cdf is not nondecreasing on the
/// sorted samples.
KSReport ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf,
                       double alpha = 0.01, double allowance = 0.0);

/// KS against Uniform(0, 1).
KSReport ks_uniform(std::span<const double> samples, double alpha = 0.01, double allowance = 0.0);

struct KLEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long n = 0;
};

/// Monte-Carlo KL(p || q) = mean(log p - log q) over samples from p, with the
/// sample standard error. Non-finite log q (support mismatch) throws.
KLEstimate kl_mc(std::span<const double> logp, std::span<const double> logq);

template <class Point>
KLEstimate kl_mc(const std::function<double(const Point&)>& logp,
                 const std::function<double(const Point&)>& logq,
                 const std::vector<Point>& samples_from_p) {
  std::vector<double> lp, lq;
  lp.reserve(samples_from_p.size());
  lq.reserve(samples_from_p.size());
  for (const auto& x : samples_from_p) {
    lp.push_back(logp(x));
    lq.push_back(logq(x));
  }
  return kl_mc(lp, lq);
}

void to_json(nlohmann::json& j, const KSReport& r);
void to_json(nlohmann::json& j, const KLEstimate& r);

}  // namespace geogauss
