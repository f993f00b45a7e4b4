#pragma once

#include <cstddef>
#include <functional>

namespace msl {

// Worker pool size: MSLESION_THREADS when set (>=1), else hardware concurrency.
int worker_count();

// Runs fn(i) for every i in [0,n) and blocks until all are done. Callers must
// write results into per-index slots so output is independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace msl
