#pragma once

#include <cstdint>
#include <functional>

namespace hfnerf::kern {

// Worker count used by parallel_for. 0 selects hardware_concurrency.
// Not thread-safe against concurrent parallel_for calls; set it up front.
void set_threads(int n);
int threads();

// Runs body(begin, end) over disjoint contiguous chunks of [begin, end).
// Chunk boundaries depend only on the range and the configured thread count,
// never on scheduling, so any value computed per index is reproducible.
// With threads() == 1 the body runs inline on the calling thread.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& body);

}  // namespace hfnerf::kern
