#pragma once

#include <cstddef>
#include <functional>

namespace steklov {

/// Worker count used by parallel loops. Defaults to STEKLOV_LAB_THREADS if set, else 1.
int thread_count();
/// Overrides the worker count; values < 1 are clamped to 1.
void set_thread_count(int n);

/// Splits [0, n) into at most thread_count() contiguous chunks, one per worker, and runs
/// body(begin, end, worker) on each. Chunk boundaries depend only on n and the worker
/// count, so callers that merge per-worker results in worker order get the serial order.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t, int)>& body);

/// Number of chunks parallel_for will use for a loop of length n.
int chunk_count(std::size_t n);

}  // namespace steklov
