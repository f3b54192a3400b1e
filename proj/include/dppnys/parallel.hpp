#pragma once

#include <functional>

#include "dppnys/types.hpp"

namespace dppnys {

/// Thread count from DPPNYS_THREADS, else the hardware concurrency (>= 1).
unsigned default_thread_count();

/// Runs body(0..count-1) on up to `threads` workers. Work items are claimed
/// dynamically, so `body` must not depend on execution order. The first
/// exception thrown by any item is rethrown after all workers finish.
void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& body);

}  // namespace dppnys
