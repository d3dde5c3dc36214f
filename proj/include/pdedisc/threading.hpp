#pragma once

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pdedisc {

// Block-partitioned parallel loop over [0, n). With threads <= 1 runs inline.
// The first exception thrown by a worker is rethrown on the caller.
inline void parallel_for(size_t n, int threads, const std::function<void(size_t)>& body) {
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const size_t nw = std::min<size_t>(size_t(threads), n);
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (size_t w = 0; w < nw; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (size_t i = w; i < n; i += nw) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pdedisc
