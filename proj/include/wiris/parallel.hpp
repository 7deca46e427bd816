#pragma once

#include <cstddef>
#include <functional>

namespace wiris {

/// Worker-thread count: WIRIS_THREADS env var when set, hardware concurrency
/// otherwise, always at least 1.
int worker_thread_count();

/// Runs fn(0..n-1) across worker threads. fn must only write to state owned
/// by its own index; results are then independent of the thread count.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

}  // namespace wiris
