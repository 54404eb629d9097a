#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace geoextremes {

/// Number of workers to use for a request of `workers` (0 means all hardware threads).
inline unsigned resolve_workers(unsigned workers)
{
  if (workers == 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
  }
  return workers;
}

/**
 * Calls f(i) for i in [0, n) on a pool of threads pulling indices from a shared
 * counter. Results must be written to per-index slots; the schedule is not
 * deterministic, only the set of calls is. The first exception is rethrown.
 */
template<class F> void parallel_for(std::size_t n, unsigned workers, F &&f)
{
  workers = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      f(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) {
        return;
      }
      try {
        f(i);
      }
      catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) {
          error = std::current_exception();
        }
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back(body);
  }
  for (auto &th : pool) {
    th.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

}  // namespace geoextremes
