#pragma once

#include <cstddef>
#include <functional>

namespace geogauss {

/// Worker count: GEOGAUSS_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

/// Runs body(begin, end) over disjoint chunks of [0, n). Results must not
/// depend on the chunking; callers key any randomness on the item index.
/// The first exception thrown by a worker is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace geogauss
