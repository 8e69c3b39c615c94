#include "choicekit/llm/rate_limiter.hpp"

namespace choicekit::llm {

RateLimiter::RateLimiter(double requests_per_minute) {
  if (requests_per_minute > 0.0)
    interval_ = std::chrono::nanoseconds(
        static_cast<long long>(60.0e9 / requests_per_minute));
  next_ = std::chrono::steady_clock::now();
}

void RateLimiter::acquire() {
  if (interval_.count() == 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::scoped_lock lock(mu_);
    auto now = std::chrono::steady_clock::now();
    if (next_ < now) next_ = now;
    slot = next_;
    next_ += interval_;
  }
  std::this_thread::sleep_until(slot);
}

}  // namespace choicekit::llm
