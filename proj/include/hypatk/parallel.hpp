#pragma once

#include <cstddef>
#include <functional>

namespace hypatk::parallel {

// Worker count: HYPATK_THREADS if set and positive, otherwise the hardware
// concurrency. An explicit override (set_thread_count) wins over both.
std::size_t thread_count();
void set_thread_count(std::size_t n);  // 0 restores the environment default

// Calls body(begin, end) over a static partition of [0, n). Work items must
// write only to their own slots; results are then independent of the
// partition.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace hypatk::parallel
