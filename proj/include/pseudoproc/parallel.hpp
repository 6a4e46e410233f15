#pragma once

#include <cstdint>
#include <functional>

namespace pseudoproc {

/// Number of worker threads: hardware concurrency, capped by the
/// PSEUDOPROC_THREADS environment variable when set.
int worker_count();

/// Runs body(i) for i in [0, count). Results must be written to
/// per-index slots; the schedule is work-stealing but the output is
/// independent of thread count. The first exception thrown by any body
/// is rethrown on the calling thread.
void parallel_for(std::int64_t count,
                  const std::function<void(std::int64_t)>& body);

}  // namespace pseudoproc
