#pragma once

#include <cstddef>
#include <functional>

namespace fictifem {

/// Worker count: FICTIFEM_THREADS if set to a positive integer, else the hardware
/// concurrency (at least 1).
int thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads using a static block
/// partition. Results must be written to per-index slots so that output does not depend
/// on the thread count. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fictifem
