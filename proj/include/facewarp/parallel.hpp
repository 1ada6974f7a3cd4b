#ifndef FACEWARP_PARALLEL_HPP
#define FACEWARP_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace facewarp {

inline int default_thread_count() {
  return std::max(1u, std::thread::hardware_concurrency());
}

// Splits [0, rows) into contiguous bands and runs fn(first, last) on each,
// one band per thread. Rethrows the first exception raised by any band.
template <typename Fn>
void parallel_rows(int rows, int threads, Fn&& fn) {
  threads = std::clamp(threads, 1, std::max(rows, 1));
  if (threads == 1) {
    fn(0, rows);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      const int first = static_cast<int>(static_cast<long long>(rows) * t / threads);
      const int last = static_cast<int>(static_cast<long long>(rows) * (t + 1) / threads);
      workers.emplace_back([&, first, last] {
        try {
          fn(first, last);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace facewarp

#endif  // FACEWARP_PARALLEL_HPP
