#pragma once

#include <cstddef>
#include <functional>

namespace malts {

// Worker count: MALTS_NUM_WORKERS when set to a positive integer, otherwise
// the hardware concurrency (at least 1).
std::size_t worker_count();

// Calls body(i) for every i in [0, n). Work is split into contiguous chunks
// across worker_count() threads; body must only write to slot i of its
// outputs so results do not depend on scheduling. The first exception thrown
// by any chunk is rethrown on the caller's thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace malts
