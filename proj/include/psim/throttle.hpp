#pragma once

#include <cstddef>
#include <cstdint>
#include <chrono>
#include <mutex>

#include "psim/types.hpp"

namespace psim {

// Token-bucket pacer emulating a fixed-rate link. Tokens accrue at
// rate_bytes_per_s from construction time, capped at burst_bytes; the bucket
// starts empty, so the very first consume already waits for its bytes. Safe
// for concurrent use: callers reserve bytes under a lock, then sleep without
// holding it, so a shared bucket paces the aggregate rate across threads.
class TokenBucket {
 public:
  static constexpr size_t default_burst = 64 * 1024;

  // rate must be positive; to disable pacing use unlimited().
  explicit TokenBucket(double rate_bytes_per_s, size_t burst_bytes = default_burst);

  static TokenBucket unlimited() { return TokenBucket(); }

  bool is_limited() const { return limited_; }
  double rate_bytes_per_s() const { return rate_; }

  // Blocks until n bytes of credit exist, then spends them. Callers should
  // feed chunks of at most the burst size; larger n still works (the deficit
  // is simply slept off) but defeats the burst cap's purpose.
  void consume(size_t n);

 private:
  TokenBucket() : limited_(false), rate_(0.0), burst_(0.0) {}

  bool limited_;
  double rate_;
  double burst_;
  std::mutex mu_;
  std::chrono::steady_clock::time_point start_{};
  double spent_ = 0.0;  // cumulative bytes reserved since start_
};

}  // namespace psim
