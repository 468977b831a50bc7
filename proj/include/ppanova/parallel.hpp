#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace ppanova {

inline unsigned default_threads() {
  const unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : h;
}

/// Runs body(i) for i in [0, n). Work items must write only to disjoint
/// output slots; under that contract the result is identical to the
/// sequential loop regardless of scheduling.
inline void parallel_for(std::int64_t n, unsigned threads,
                         const std::function<void(std::int64_t)>& body) {
  if (n <= 0) return;
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(
      std::min<std::int64_t>(n, static_cast<std::int64_t>(threads)));
  if (threads <= 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n || failed.load(std::memory_order_relaxed)) return;
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ppanova
