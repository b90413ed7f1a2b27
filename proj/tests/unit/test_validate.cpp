#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "geogauss/errors.hpp"
#include "geogauss/normal.hpp"
#include "geogauss/random.hpp"
#include "geogauss/validate.hpp"
#include "oracles.hpp"

using namespace geogauss;

namespace {

std::vector<double> normal_draws(int n, std::uint64_t seed, double mu = 0.0, double sigma = 1.0) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    CounterRng rng(seed, static_cast<std::uint64_t>(r));
    x[static_cast<std::size_t>(r)] = mu + sigma * rng.normal();
  }
  return x;
}

double normal_logpdf(double x, double mu, double sigma) { return std::log(oracle::normal_pdf(x, mu, sigma)); }

}  // namespace

TEST(KS, ExactNormalDraws) {
  const KSReport r = ks_one_sample(normal_draws(100000, 1), [](double x) { return oracle::normal_cdf(x); });
  EXPECT_LT(r.statistic, 0.0063);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.critical_01, 1.63 / std::sqrt(1e5), 1e-15);
  EXPECT_NEAR(r.critical_05, 1.36 / std::sqrt(1e5), 1e-15);
}

TEST(KS, BestCaseLattice) {
  const int n = 1000;
  std::vector<double> x;
  for (int i = 1; i <= n; ++i) x.push_back(std_normal_quantile((i - 0.5) / n));
  const KSReport r = ks_one_sample(x, [](double t) { return std_normal_cdf(t); });
  EXPECT_NEAR(r.statistic, 1.0 / (2 * n), 1e-12);
}

TEST(KS, DegenerateSample) {
  const std::vector<double> x(50, 0.0);
  EXPECT_GE(ks_one_sample(x, [](double t) { return std_normal_cdf(t); }).statistic, 0.5);
}

TEST(KS, PermutationInvariant) {
  std::vector<double> x = normal_draws(500, 3);
  const double a = ks_one_sample(x, [](double t) { return std_normal_cdf(t); }).statistic;
  std::reverse(x.begin(), x.end());
  std::rotate(x.begin(), x.begin() + 137, x.end());
  EXPECT_EQ(ks_one_sample(x, [](double t) { return std_normal_cdf(t); }).statistic, a);
}

TEST(KS, DetectsWrongDistribution) {
  const KSReport r = ks_one_sample(normal_draws(10000, 4, 0.1), [](double t) { return std_normal_cdf(t); });
  EXPECT_FALSE(r.pass);
}

TEST(KS, AllowanceAndLevel) {
  const std::vector<double> x = normal_draws(1000, 5, 0.05);
  const KSReport strict = ks_one_sample(x, [](double t) { return std_normal_cdf(t); }, 0.05);
  const KSReport loose = ks_one_sample(x, [](double t) { return std_normal_cdf(t); }, 0.01, 0.05);
  EXPECT_NEAR(strict.threshold(), 1.36 / std::sqrt(1000.0), 1e-15);
  EXPECT_NEAR(loose.threshold(), 1.63 / std::sqrt(1000.0) + 0.05, 1e-15);
  EXPECT_TRUE(loose.pass);
}

TEST(KS, PreconditionsEnforced) {
  EXPECT_THROW(ks_one_sample(std::vector<double>(9, 0.0), [](double) { return 0.5; }), InvalidArgument);
  EXPECT_THROW(ks_one_sample(normal_draws(100, 6), [](double t) { return 1.0 - std_normal_cdf(t); }), InvalidArgument);
}

TEST(KL, IdenticalLogDensitiesGiveExactlyZero) {
  const std::vector<double> x = normal_draws(1000, 7);
  std::vector<double> lp;
  for (double v : x) lp.push_back(normal_logpdf(v, 0, 1));
  const KLEstimate k = kl_mc(lp, lp);
  EXPECT_EQ(k.estimate, 0.0);
  EXPECT_EQ(k.std_error, 0.0);
}

TEST(KL, GaussianPairs) {
  const std::vector<double> x = normal_draws(100000, 8);
  const std::function<double(const double&)> p = [](const double& v) { return normal_logpdf(v, 0, 1); };
  const std::function<double(const double&)> q1 = [](const double& v) { return normal_logpdf(v, 1, 1); };
  const std::function<double(const double&)> q2 = [](const double& v) { return normal_logpdf(v, 0, 2); };
  const KLEstimate a = kl_mc(p, q1, x);
  EXPECT_NEAR(a.estimate, 0.5, 3.0 * a.std_error);
  const KLEstimate b = kl_mc(p, q2, x);
  EXPECT_NEAR(b.estimate, 0.318147180559945309, 3.0 * b.std_error);
  EXPECT_NEAR(oracle::gaussian_kl(0, 1, 0, 2), 0.318147180559945309, 1e-15);
}

TEST(KL, StandardErrorShrinksAtRootN) {
  const std::function<double(const double&)> p = [](const double& v) { return normal_logpdf(v, 0, 1); };
  const std::function<double(const double&)> q = [](const double& v) { return normal_logpdf(v, 0.5, 1.5); };
  double prev = 0.0;
  for (int n : {1000, 10000, 100000}) {
    const double se = kl_mc(p, q, normal_draws(n, 9)).std_error;
    if (prev > 0.0) {
      const double ratio = prev / se;
      EXPECT_GT(ratio, std::sqrt(10.0) / 2);
      EXPECT_LT(ratio, std::sqrt(10.0) * 2);
    }
    prev = se;
  }
}

TEST(KL, SupportMismatchIsAnError) {
  const std::vector<double> lp(20, -1.0);
  std::vector<double> lq(20, -1.0);
  lq[7] = -std::numeric_limits<double>::infinity();
  EXPECT_THROW(kl_mc(lp, lq), NumericalError);
  EXPECT_THROW(kl_mc(lp, std::vector<double>(3, 0.0)), InvalidArgument);
}

TEST(Reports, SerialiseToJson) {
  const KSReport r = ks_one_sample(normal_draws(100, 10), [](double t) { return std_normal_cdf(t); });
  const nlohmann::json j = r;
  EXPECT_EQ(j.at("n"), 100);
  EXPECT_EQ(j.at("pass"), r.pass);
  EXPECT_DOUBLE_EQ(j.at("threshold").get<double>(), r.threshold());
  const nlohmann::json k = KLEstimate{0.5, 0.01, 10};
  EXPECT_EQ(k.at("estimate"), 0.5);
}
