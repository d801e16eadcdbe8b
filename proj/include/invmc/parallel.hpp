#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace invmc {

/// Worker count used by per-path loops. 0 selects hardware concurrency.
void set_num_threads(int threads);
int num_threads();

/// Runs body(begin, end) over a static partition of [0, count). Each index is
/// visited exactly once; results written per index are independent of the
/// worker count. The first exception thrown by any chunk is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace invmc
