#pragma once

#include <cstddef>
#include <functional>

namespace persona {

/// Worker cap from PERSONA_MOTION_THREADS (default: hardware concurrency).
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Indices are split into contiguous chunks;
/// callers write into per-index slots and reduce afterwards in index order,
/// so results do not depend on the thread count. Small n runs inline.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t min_parallel = 256);

}  // namespace persona
