#pragma once

#include <cstddef>
#include <functional>

namespace edslevy {

/// Worker count: EDSLEVY_THREADS if set and positive, otherwise the hardware
/// concurrency (at least 1).
unsigned thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = thread_count()).
/// Indices are handed out in contiguous blocks; the first exception thrown by
/// any body is rethrown on the calling thread after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

} // namespace edslevy
