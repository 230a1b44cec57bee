#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace radarkit {

/// Worker cap: `RADARKIT_THREADS` when set (>= 1), else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Each index must write only its own output
/// slot; results are then independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise (cascade) summation in a fixed tree order.
double pairwise_sum(std::span<const double> values);

}  // namespace radarkit
