#pragma once

#include <cstddef>
#include <functional>

namespace pxa {

/// Worker count: PXA_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(begin, end) over disjoint contiguous chunks of [0, n). Chunk
/// boundaries depend only on n and the worker count; callers write results
/// into per-index slots so the outcome is independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 1024);

}  // namespace pxa
