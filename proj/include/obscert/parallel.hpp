#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace obscert {

/// Number of worker threads used by parallel_for; 0 means hardware concurrency.
inline unsigned& worker_count() {
  static unsigned workers = 0;
  return workers;
}

namespace detail {
inline thread_local bool inside_worker = false;
}

/// Runs body(i) for i in [0, n) on contiguous chunks. Callers write results
/// into index-addressed slots and reduce afterwards in index order, so the
/// outcome does not depend on scheduling. Nested calls run serially.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  unsigned workers = worker_count() ? worker_count() : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::size_t>(n, 64))));
  if (workers <= 1 || n < 2 || detail::inside_worker) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      detail::inside_worker = true;
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace obscert
