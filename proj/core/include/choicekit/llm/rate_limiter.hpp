#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace choicekit::llm {

// Paces provider calls to a fixed request rate. requests_per_minute <= 0
// disables pacing. Thread-safe; callers block in acquire() until their slot.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_minute = 0.0);
  void acquire();

 private:
  std::mutex mu_;
  std::chrono::steady_clock::time_point next_;
  std::chrono::nanoseconds interval_{0};
};

// Runs fn(0..n-1) across up to `parallelism` threads. Work items claim
// indices from a shared counter; results must be written to preallocated
// slots so the output order never depends on scheduling. The first exception
// wins and is rethrown after all threads join.
template <typename Fn>
void parallel_for_index(std::size_t n, int parallelism, Fn&& fn) {
  if (n == 0) return;
  if (parallelism <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      {
        std::scoped_lock lock(error_mu);
        if (first_error) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(parallelism), n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace choicekit::llm
