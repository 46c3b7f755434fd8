#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace esn2 {

/// Number of worker threads to use. Reads ESN2_THREADS (0 or unset = hardware
/// concurrency); always at least 1.
std::size_t thread_limit();

namespace detail {
// Set on worker threads so nested parallel_for calls run inline.
inline thread_local bool in_parallel_region = false;
}  // namespace detail

/// Calls body(i) for every i in [0, n). Work items are claimed dynamically,
/// so body must write its result to a slot owned by i; callers then reduce
/// the slots in index order to stay deterministic. The first exception thrown
/// by any item is rethrown after all workers have joined. Calls made from
/// inside a worker run sequentially.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = detail::in_parallel_region ? 1 : std::min(thread_limit(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    const bool outer = detail::in_parallel_region;
    detail::in_parallel_region = true;
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
    detail::in_parallel_region = outer;
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace esn2
