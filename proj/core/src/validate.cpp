#include "geogauss/validate.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "geogauss/errors.hpp"

namespace geogauss {

KSReport ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf, double alpha,
                       double allowance) {
  const auto n = static_cast<long>(samples.size());
  if (n < 10) throw InvalidArgument("ks_one_sample: need at least 10 samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  KSReport r;
  r.n = n;
  r.alpha = alpha;
  r.allowance = allowance;
  const double dn = static_cast<double>(n);
  r.critical_05 = 1.36 / std::sqrt(dn);
  r.critical_01 = 1.63 / std::sqrt(dn);

  double prev = -1.0;
  double d = 0.0;
  for (long i = 0; i < n; ++i) {
    const double f = cdf(sorted[static_cast<std::size_t>(i)]);
    if (!(f >= prev) || f > 1.0) throw InvalidArgument("ks_one_sample: reference cdf is not a nondecreasing map into [0,1]");
    prev = f;
    d = std::max({d, (i + 1) / dn - f, f - i / dn});
  }
  r.statistic = d;
  r.pass = r.statistic < r.threshold();
  return r;
}

KSReport ks_uniform(std::span<const double> samples, double alpha, double allowance) {
  return ks_one_sample(samples, [](double u) { return std::clamp(u, 0.0, 1.0); }, alpha, allowance);
}

KLEstimate kl_mc(std::span<const double> logp, std::span<const double> logq) {
  if (logp.size() != logq.size() || logp.empty()) throw InvalidArgument("kl_mc: need matching, non-empty samples");
  const auto n = static_cast<long>(logp.size());
  double mean = 0.0;
  double m2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!std::isfinite(logq[k])) throw NumericalError("kl_mc: log q is not finite at a sample (support mismatch)");
    if (!std::isfinite(logp[k])) throw NumericalError("kl_mc: log p is not finite at a sample");
    // Welford update keeps the variance accurate when the ratio is near constant.
    const double x = logp[k] - logq[k];
    const double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
  }
  KLEstimate out;
  out.estimate = mean;
  out.n = n;
  out.std_error = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return out;
}

void to_json(nlohmann::json& j, const KSReport& r) {
  j = {{"statistic", r.statistic},     {"n", r.n},
       {"critical_05", r.critical_05}, {"critical_01", r.critical_01},
       {"alpha", r.alpha},             {"allowance", r.allowance},
       {"threshold", r.threshold()},   {"pass", r.pass}};
}

void to_json(nlohmann::json& j, const KLEstimate& r) {
  j = {{"estimate", r.estimate}, {"std_error", r.std_error}, {"n", r.n}};
}

}  // namespace geogauss
