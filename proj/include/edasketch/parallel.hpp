#pragma once

#include <cstddef>
#include <functional>

namespace edasketch {

// Number of worker threads used by parallel_for. Defaults to the hardware
// concurrency; EDASKETCH_THREADS in the environment overrides it.
std::size_t worker_count();
void set_worker_count(std::size_t n);

// Runs body(i) for i in [0, count). Each index is executed exactly once; the
// first exception thrown by any body is rethrown on the calling thread after
// all workers have stopped. Calls made from inside a body run serially.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace edasketch
