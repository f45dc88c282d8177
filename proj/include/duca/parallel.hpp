#pragma once

#include <cstddef>
#include <functional>

namespace duca {

// Runs fn(i) for i in [0, n) on up to `workers` threads (0 = hardware
// concurrency). Results must be written to disjoint, pre-sized slots so the
// outcome is independent of scheduling. The first exception thrown by any
// worker is rethrown on the calling thread.
void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t)>& fn);

unsigned resolve_workers(unsigned requested);

}  // namespace duca
