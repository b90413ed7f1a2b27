#include <gtest/gtest.h>

#include <cmath>

#include "geogauss/density.hpp"
#include "geogauss/diffeo.hpp"
#include "geogauss/errors.hpp"
#include "geogauss/laplace.hpp"
#include "geogauss/random.hpp"
#include "oracles.hpp"

using namespace geogauss;
using json = nlohmann::json;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

Matrix random_spd(CounterRng& rng, int d) {
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
  return a * a.transpose() + 0.5 * Matrix::Identity(d, d);
}

}  // namespace

TEST(FindMap, QuadraticConvergesImmediately) {
  const Density d = make_builtin("gaussian", {{"mean", 1}, {"cov", 2}});
  const ModeSearch s = find_map(d, v1(5.0));
  EXPECT_TRUE(s.converged);
  EXPECT_NEAR(s.mode[0], 1.0, 2.0 * 1e-8);  // |grad| <= tol gives |x - 1| <= cov * tol
  EXPECT_LE(s.iterations, 3);
}

TEST(FindMap, MixtureLocalModeMatchesBisectionOracle) {
  const Density d = make_builtin("gmm1d", {{"weights", {0.3, 0.7}}, {"means", {-2, 1}}, {"sds", {0.5, 1}}});
  const oracle::Mixture1d m{{0.3, 0.7}, {-2, 1}, {0.5, 1}};
  const double root = oracle::bisect([&](double x) { return -m.score(x); }, 0.5, 1.5);
  EXPECT_NEAR(root, 0.999999843348493473, 1e-12);
  const ModeSearch s = find_map(d, v1(0.9));
  ASSERT_TRUE(s.converged);
  EXPECT_NEAR(s.mode[0], root, 1e-7);
}

TEST(FindMap, BananaReachesStationaryPoint) {
  const Density d = make_builtin("banana", {{"a", 1}, {"b", 1}});
  const ModeSearch s = find_map(d, Vector::Zero(2));
  ASSERT_TRUE(s.converged);
  EXPECT_LE(grad_log_pdf(d, s.mode).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FindMap, ReportsNonConvergence) {
  const Density d = make_builtin("gmm1d", {{"weights", {0.3, 0.7}}, {"means", {-2, 1}}, {"sds", {0.5, 1}}});
  const ModeSearch s = find_map(d, v1(-0.5), 1e-14, 1);
  EXPECT_FALSE(s.converged);
  EXPECT_EQ(s.iterations, 1);
}

TEST(FindMap, RejectsBadInput) {
  const Density d = make_builtin("standard_normal", {{"dim", 2}});
  EXPECT_THROW(find_map(d, v1(0.0)), InvalidArgument);
  EXPECT_THROW(find_map(d, Vector::Constant(2, NAN)), InvalidArgument);
  EXPECT_THROW(find_map(d, Vector::Zero(2), 0.0), InvalidArgument);
}

TEST(Laplace, ExactOnGaussian) {
  const Density d = make_builtin("gaussian", {{"mean", 1}, {"cov", 2}});
  for (double x0 : {-4.0, 0.0, 9.0}) {
    const LaplaceResult r = laplace_approx(d, v1(x0));
    ASSERT_TRUE(r.converged);
    ASSERT_TRUE(r.approx);
    EXPECT_NEAR(r.approx->mean()[0], 1.0, 1e-6);
    EXPECT_NEAR(r.approx->cov()(0, 0), 2.0, 1e-6);
  }
}

TEST(Laplace, StandardNormal2d) {
  const LaplaceResult r = laplace_approx(make_builtin("standard_normal", {{"dim", 2}}), Vector::Constant(2, 0.3));
  ASSERT_TRUE(r.approx);
  EXPECT_LT(r.approx->mean().cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((r.approx->cov() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Laplace, CovarianceIsInverseHessian) {
  const LaplaceResult r = laplace_approx(make_builtin("banana", {{"a", 1}, {"b", 0.5}}), Vector::Zero(2));
  ASSERT_TRUE(r.approx);
  EXPECT_TRUE((r.approx->cov() * r.neg_log_hessian).isApprox(Matrix::Identity(2, 2), 1e-10));
  EXPECT_TRUE(r.approx->mean().isApprox(r.mode));
}

TEST(Laplace, SeparatedMixtureIsBasinLocal) {
  const Density d = make_builtin("gmm1d", {{"weights", {0.5, 0.5}}, {"means", {-3, 3}}, {"sds", {1, 1}}});
  const LaplaceResult r = laplace_approx(d, v1(2.5));
  ASSERT_TRUE(r.approx);
  EXPECT_NEAR(r.approx->mean()[0], 3.0, 1e-3);
  EXPECT_NEAR(r.approx->cov()(0, 0), 1.0, 1e-3);
  // high-precision values for this mixture
  EXPECT_NEAR(r.approx->mean()[0], 2.99999990862, 1e-8);
  EXPECT_NEAR(r.approx->cov()(0, 0), 1.00000054828, 1e-6);
}

TEST(Laplace, RandomGaussianTargetsAreRecovered) {
  for (int t = 0; t < 50; ++t) {
    CounterRng rng(100, static_cast<std::uint64_t>(t));
    const int d = 1 + t % 4;
    const Matrix cov = random_spd(rng, d);
    Vector mu(d);
    for (int i = 0; i < d; ++i) mu[i] = 3.0 * rng.normal();
    const LaplaceResult r = laplace_approx(gaussian_density(Gaussian(mu, cov)), Vector::Zero(d));
    ASSERT_TRUE(r.approx);
    EXPECT_LT((r.approx->mean() - mu).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((r.approx->cov() - cov).cwiseAbs().maxCoeff(), 1e-4 * cov.cwiseAbs().maxCoeff());
  }
}

TEST(Laplace, AffineEquivariance) {
  Matrix a(2, 2);
  a << 2, 0.5, -0.3, 1;
  Vector b(2);
  b << 1, -2;
  Matrix cov(2, 2);
  cov << 1, 0.4, 0.4, 0.7;
  Vector mu(2);
  mu << 0.5, 0.25;
  const Density pushed = pushforward_density(ReparamGA(make_affine(a, b), Gaussian(mu, cov)));
  const LaplaceResult r = laplace_approx(pushed, Vector::Zero(2));
  ASSERT_TRUE(r.approx);
  const Vector m_ref = a * mu + b;
  const Matrix c_ref = a * cov * a.transpose();
  EXPECT_LT((r.approx->mean() - m_ref).norm(), 1e-4 * m_ref.norm());
  EXPECT_LT((r.approx->cov() - c_ref).norm(), 1e-4 * c_ref.norm());
}

TEST(Laplace, SaddleIsAnErrorCarryingTheSpectrum) {
  Density d(2, [](const VectorRef& x) { return -x[0] * x[0] + 0.5 * x[1] * x[1]; }, {{-5, 5}, {-5, 5}}, false);
  try {
    laplace_approx(d, Vector::Zero(2));
    FAIL();
  } catch (const NotPositiveDefinite& e) {
    EXPECT_LT(e.spectrum().minCoeff(), 0.0);
  }
}

TEST(Laplace, NonConvergencePropagated) {
  const Density d = make_builtin("gmm1d", {{"weights", {0.3, 0.7}}, {"means", {-2, 1}}, {"sds", {0.5, 1}}});
  const LaplaceResult r = laplace_approx(d, v1(-0.5), 1e-14, 1);
  EXPECT_FALSE(r.converged);
}

TEST(ReparamLaplace, ExactForLognormalThroughExp) {
  const Gaussian latent(v1(0.5), Matrix::Constant(1, 1, 0.25));
  const Diffeomorphism e = make_exp(1);
  const Density lognormal = pushforward_density(ReparamGA(e, latent));
  const ReparamLaplaceResult r = reparam_laplace(lognormal, e, v1(1.0));
  ASSERT_TRUE(r.latent.converged);
  ASSERT_TRUE(r.approx);
  EXPECT_NEAR(r.approx->base.mean()[0], 0.5, 1e-6);
  EXPECT_NEAR(r.approx->base.cov()(0, 0), 0.25, 1e-6);
  // the plain Laplace fit of the lognormal is not exact
  const LaplaceResult plain = laplace_approx(lognormal, v1(1.0));
  EXPECT_GT(std::abs(plain.mode[0] - std::exp(0.5)), 0.1);
}

TEST(ReparamLaplace, StartOutsideImageIsRejected) {
  const Density d = make_builtin("standard_normal", {{"dim", 1}});
  EXPECT_THROW(reparam_laplace(d, make_exp(1), v1(-1.0)), InvalidArgument);
}
