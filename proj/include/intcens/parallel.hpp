#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace intcens {

inline int default_threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

/// Calls fn(i) for i in [0, count) on up to `threads` workers. Work is handed
/// out by index, so anything fn writes to slot i is independent of scheduling.
/// The first exception thrown by fn is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 0) threads = default_threads();
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace intcens
