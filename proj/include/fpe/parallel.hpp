#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fpe {

/// Runs body(begin, end, worker) over contiguous chunks of [0, count) on up to
/// `threads` workers. Chunk boundaries depend only on count and threads, and
/// the first exception thrown by any worker is rethrown on the caller.
template <typename Body>
void parallel_chunks(int count, int threads, Body&& body) {
  threads = std::clamp(threads, 1, std::max(1, count));
  if (threads == 1) {
    body(0, count, 0);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      const int begin = static_cast<int>(static_cast<long long>(count) * t / threads);
      const int end = static_cast<int>(static_cast<long long>(count) * (t + 1) / threads);
      workers.emplace_back([&, begin, end, t] {
        try {
          body(begin, end, t);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace fpe
