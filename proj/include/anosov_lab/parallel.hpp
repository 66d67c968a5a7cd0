#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace alab {

// Runs fn(i) for i in [0, n) on up to `workers` threads with a static round-robin split.
// fn must only write to per-index state; the first exception thrown is rethrown.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  std::size_t w = static_cast<std::size_t>(std::max(1, workers));
  w = std::min(w, std::max<std::size_t>(n, 1));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < w; ++t) {
    threads.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += w) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace alab
