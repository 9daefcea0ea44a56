#pragma once

#include <cstddef>
#include <functional>

namespace loadclust {

/// Runs fn(0) ... fn(count - 1) on up to `threads` worker threads.
///
/// Work items are handed out in index order. If any call throws, the
/// exception from the lowest failing index is rethrown after all workers
/// have joined. threads <= 1 runs inline on the calling thread.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace loadclust
