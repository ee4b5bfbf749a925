#pragma once

#include <cstddef>
#include <functional>

namespace ontosim {

/// Worker count: ONTOSIM_THREADS if set (>= 1), otherwise the hardware
/// concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, n) over contiguous chunks on up to worker_count()
/// threads. Bodies must write only to their own outputs; results are then
/// independent of scheduling. Rethrows the first exception after joining.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ontosim
