#include "psim/throttle.hpp"

#include <thread>

namespace psim {

TokenBucket::TokenBucket(double rate_bytes_per_s, size_t burst_bytes)
    : limited_(true),
      rate_(rate_bytes_per_s),
      burst_(static_cast<double>(burst_bytes)),
      start_(std::chrono::steady_clock::now()) {
  if (!(rate_bytes_per_s > 0.0))
    throw ConfigError("throttle rate must be positive (use the unlimited bucket instead of 0)");
}

void TokenBucket::consume(size_t n) {
  if (!limited_ || n == 0) return;
  std::chrono::steady_clock::time_point deadline{};
  {
    std::lock_guard<std::mutex> g(mu_);
    auto now = std::chrono::steady_clock::now();
    double earned = std::chrono::duration<double>(now - start_).count() * rate_;
    // Idle time beyond the burst cap is forfeited.
    if (earned - spent_ > burst_) spent_ = earned - burst_;
    spent_ += static_cast<double>(n);
    if (spent_ > earned) {
      double deficit_s = (spent_ - earned) / rate_;
      deadline = now + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                           std::chrono::duration<double>(deficit_s));
    }
  }
  if (deadline != std::chrono::steady_clock::time_point{}) std::this_thread::sleep_until(deadline);
}

}  // namespace psim
