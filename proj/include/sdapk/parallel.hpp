#pragma once

#include <cstddef>
#include <functional>

namespace sdapk {

// Worker count: SDAPK_THREADS if set, otherwise the hardware concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads, in
// contiguous chunks.  body must only write state owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sdapk
