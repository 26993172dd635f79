#pragma once

#include <cstddef>
#include <functional>

namespace pulsediff {

/// Worker count from PULSEDIFF_THREADS, clamped to [1, hardware_concurrency].
/// Unset or invalid values fall back to 1.
std::size_t thread_limit();

/// Runs fn(i) for i in [0, n). Each index is visited exactly once; callers
/// write into per-index slots so results never depend on scheduling. The
/// first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t threads = thread_limit());

}  // namespace pulsediff
