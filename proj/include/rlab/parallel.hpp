#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

#include "rlab/types.hpp"

namespace rlab {

/// Worker-pool width used by parallel_for; 0 means hardware concurrency.
void set_threads(int n);
int threads();

/// Runs fn(i) for i in [0, n) across the configured worker count. Results must
/// be written to per-index slots; reductions belong to the caller so that the
/// outcome does not depend on the thread count.
void parallel_for(Index n, const std::function<void(Index)>& fn);

/// Chunked variant: fn(begin, end) over a partition of [0, n).
void parallel_chunks(Index n, const std::function<void(Index, Index)>& fn);

}  // namespace rlab
