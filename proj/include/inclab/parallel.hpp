#pragma once

#include <cstddef>
#include <functional>

namespace inclab {

// Worker count: hardware concurrency, capped by INCREMENT_LAB_THREADS.
unsigned worker_count();

// Runs body(i) for i in [0, count) on up to worker_count() threads. Each
// index must write only its own output slot; callers reduce afterwards in
// index order, which keeps results independent of scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace inclab
