#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <unordered_map>

namespace perfpower::ingest {

// Token bucket per source. Each source starts with `burst` tokens, refills
// at `tokens_per_second` up to `burst`, and each request spends one token.
class RateLimiter {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  RateLimiter(double tokens_per_second, double burst, Clock clock = {});

  // True if the request may proceed (a token was taken).
  bool allow(std::uint64_t source);

  std::size_t tracked_sources() const;

 private:
  struct Bucket {
    double tokens;
    std::chrono::steady_clock::time_point last;
  };

  void prune(std::chrono::steady_clock::time_point now);

  double rate_;
  double burst_;
  Clock clock_;
  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, Bucket> buckets_;
};

}  // namespace perfpower::ingest
