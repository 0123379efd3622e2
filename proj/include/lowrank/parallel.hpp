#pragma once

#include <cstddef>
#include <functional>

namespace lowrank {

// Worker count: LOWRANK_THREADS when set and positive, otherwise the hardware
// concurrency (at least 1).
unsigned thread_count();

// Calls body(i) for every i in [0, count). Indices are split into contiguous
// chunks, one per worker. The first exception thrown by any worker is
// rethrown after all workers join. Callers write results by index, so
// outcomes never depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace lowrank
