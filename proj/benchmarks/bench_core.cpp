#include <benchmark/benchmark.h>

#include <memory>

#include "geogauss/density.hpp"
#include "geogauss/diffeo.hpp"
#include "geogauss/laplace.hpp"
#include "geogauss/random.hpp"
#include "geogauss/riemann.hpp"
#include "geogauss/rosenblatt.hpp"

using namespace geogauss;

namespace {

Density gmm() {
  return make_builtin("gmm1d", {{"weights", {0.3, 0.7}}, {"means", {-2, 1}}, {"sds", {0.5, 1}}});
}

void BM_TableBuild(benchmark::State& state) {
  const Density target = gmm();
  for (auto _ : state) {
    RosenblattMap map(target);
    benchmark::DoNotOptimize(map.table(0, {}));
  }
}
BENCHMARK(BM_TableBuild)->Unit(benchmark::kMillisecond);

void BM_ConditionalTables2d(benchmark::State& state) {
  const Density target = make_builtin("banana", {{"a", 1.0}, {"b", 0.5}});
  const auto map = std::make_shared<RosenblattMap>(target);
  const Diffeomorphism phi = build_universal_map(map);
  CounterRng rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(phi.forward(standard_normal_vector(rng, 2)));
}
BENCHMARK(BM_ConditionalTables2d)->Unit(benchmark::kMicrosecond);

void BM_UniversalSample1d(benchmark::State& state) {
  const ReparamGA ga(build_universal_map(gmm()), Gaussian::standard(1));
  for (auto _ : state) benchmark::DoNotOptimize(sample(ga, static_cast<int>(state.range(0)), 3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_UniversalSample1d)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_GeodesicShoot(benchmark::State& state) {
  const Diffeomorphism phi = make_sinh_arcsinh(2, 0.5, 1.2);
  const MetricField g = pullback_metric(phi);
  const Vector y = phi.forward(Vector{{0.3, -0.2}});
  const Vector v{{0.8, 0.5}};
  for (auto _ : state) benchmark::DoNotOptimize(geodesic_shoot(g, y, v, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_GeodesicShoot)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_ExpClosed(benchmark::State& state) {
  const Diffeomorphism phi = make_sinh_arcsinh(2, 0.5, 1.2);
  const Vector y = phi.forward(Vector{{0.3, -0.2}});
  const Vector v{{0.8, 0.5}};
  for (auto _ : state) benchmark::DoNotOptimize(exp_map_closed(phi, y, v));
}
BENCHMARK(BM_ExpClosed);

void BM_ReparamSample(benchmark::State& state) {
  const ReparamGA ga(make_exp(2), Gaussian(Vector::Zero(2), Matrix::Identity(2, 2)));
  for (auto _ : state) benchmark::DoNotOptimize(sample(ga, static_cast<int>(state.range(0)), 5));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ReparamSample)->Arg(10000);

void BM_LaplaceBanana(benchmark::State& state) {
  const Density target = make_builtin("banana", {{"a", 1.0}, {"b", 0.5}});
  const Vector x0{{0.5, 0.5}};
  for (auto _ : state) benchmark::DoNotOptimize(laplace_approx(target, x0));
}
BENCHMARK(BM_LaplaceBanana);

}  // namespace
BENCHMARK_MAIN();
