#include "geogauss/random.hpp"

#include <cmath>
#include <numbers>

namespace geogauss {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  return mix64(mix64(seed) ^ (salt * 0xd1b54a32d192ed03ULL));
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(mix64(mix64(seed) + mix64(stream ^ 0x632be59bd9b4e019ULL))) {}

std::uint64_t CounterRng::next_u64() noexcept {
  // Weyl sequence on the counter, finalised by the SplitMix64 bijection.
  return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
}

double CounterRng::uniform() noexcept {
  // 53 random bits, shifted off zero: values lie in (0, 1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vector standard_normal_vector(CounterRng& rng, int dim) {
  Vector z(dim);
  for (int i = 0; i < dim; ++i) z[i] = rng.normal();
  return z;
}

}  // namespace geogauss
