#pragma once

#include <cstddef>
#include <functional>

namespace tmc {

// Number of workers to use when jobs == 0 (hardware concurrency, floored at 1).
std::size_t default_jobs();

// Runs fn(i) for i in [0, count). With jobs > 1 the indices are handed to a
// transient worker group; calls nested inside a worker run sequentially so
// composed stages cannot oversubscribe or deadlock. Each index must be
// independent and own its randomness (pre-derived seeds), which keeps results
// identical whatever the interleaving. fn must not throw across threads
// without being caught; exceptions are captured and the first one rethrown.
void parallel_for(std::size_t jobs, std::size_t count,
                  const std::function<void(std::size_t)>& fn);

}  // namespace tmc
