#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace ptrgeo {

// Worker count from PTRGEO_THREADS, else the hardware concurrency (>= 1).
std::size_t worker_count();

// Runs fn(i) for i in [0, count) split into contiguous blocks over at most
// worker_count() threads. The first exception thrown by any block is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace ptrgeo
