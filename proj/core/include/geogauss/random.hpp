#pragma once

#include <cstdint>

#include "geogauss/types.hpp"

namespace geogauss {

/// Counter-based generator. A stream is identified by (seed, stream id) and
/// every draw is a pure function of (seed, stream id, counter), so row r of a
/// sample matrix can be generated by any worker without coordination.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal() noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finaliser; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Independent child seed for a sub-task (e.g. one atom of a mixture of runs).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

Vector standard_normal_vector(CounterRng& rng, int dim);

}  // namespace geogauss
