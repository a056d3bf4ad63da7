#pragma once

#include <cstdint>
#include <functional>

namespace contdp {

// Runs fn(0..n-1) across worker threads. Each index must write only its own
// result slot; with seed-per-index randomness the outcome is schedule
// invariant. Exceptions from workers are rethrown on the calling thread.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace contdp
