#pragma once

#include <cstdint>
#include <functional>

namespace xct {

// Number of worker threads the pool was built with (>=1).
int num_threads();

// Must be called before the first parallel_for to take effect; 0 = hardware.
void set_num_threads(int n);

// Runs fn(begin_i, end_i) over a fixed static partition of [begin, end) into
// exactly num_threads() contiguous chunks (possibly empty). The partition
// depends only on (begin, end, num_threads), never on timing, so any
// reduction that combines per-chunk partials in chunk order is deterministic.
// Nested calls run inline on the calling thread.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace xct
