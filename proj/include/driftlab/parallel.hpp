#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace driftlab {

/// Worker count to use for a request of `requested` (0 means all cores).
inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs task(i) for i in [0, count) on up to `workers` threads. Tasks are
/// handed out dynamically; results must be written to per-index slots so the
/// outcome does not depend on scheduling. If tasks throw, the exception from
/// the lowest failing index is rethrown after all workers stop (indices above
/// a known failure are skipped).
template <typename Task>
void parallel_for(std::int64_t count, unsigned workers, Task&& task) {
  if (count <= 0) return;
  const auto threads = static_cast<std::int64_t>(
      std::min<std::int64_t>(resolve_workers(workers), count));
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::int64_t error_index = count;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      if (failed.load()) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i > error_index) return;
      }
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed.store(true);
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (std::int64_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace driftlab
