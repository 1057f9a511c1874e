#pragma once

#include <cstddef>
#include <functional>

namespace hdloc {

/// Worker count: HDLOC_THREADS when set (clamped to >= 1), otherwise the
/// hardware default.
int worker_count();

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = worker_count()).
/// Static contiguous partition; callers get determinism by writing to
/// disjoint, index-addressed slots.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace hdloc
