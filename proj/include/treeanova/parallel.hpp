#pragma once

#include <cstddef>
#include <functional>

namespace treeanova {

/// Worker count to use: `requested` when > 0, otherwise the hardware
/// concurrency; either way capped by the TREE_ANOVA_THREADS environment
/// variable when it is set. Always >= 1.
int resolve_thread_count(int requested = 0);

/// Runs fn(index, worker) for every index in [0, count) on up to `threads`
/// workers (worker ids are dense in [0, threads)). Tasks must communicate
/// through per-index slots so results are schedule-independent. The first
/// exception thrown by a task is rethrown after all workers stop.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t index, int worker)>& fn);

}  // namespace treeanova
