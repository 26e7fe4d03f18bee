#include "perfpower/ingest/rate_limiter.hpp"

#include <algorithm>
#include <cmath>

#include "perfpower/errors.hpp"

namespace perfpower::ingest {

namespace {
constexpr std::size_t kPruneThreshold = 10000;
}

RateLimiter::RateLimiter(double tokens_per_second, double burst, Clock clock)
    : rate_(tokens_per_second),
      burst_(burst),
      clock_(clock ? std::move(clock) : [] { return std::chrono::steady_clock::now(); }) {
  if (!(rate_ > 0) || !std::isfinite(rate_)) throw InvalidConfig("rate limit must be > 0");
  if (!(burst_ >= 1) || !std::isfinite(burst_)) throw InvalidConfig("rate limit burst must be >= 1");
}

bool RateLimiter::allow(std::uint64_t source) {
  const auto now = clock_();
  std::lock_guard lock(mutex_);
  auto [it, inserted] = buckets_.try_emplace(source, Bucket{burst_, now});
  auto& bucket = it->second;
  if (!inserted) {
    const std::chrono::duration<double> elapsed = now - bucket.last;
    bucket.tokens = std::min(burst_, bucket.tokens + std::max(0.0, elapsed.count()) * rate_);
    bucket.last = now;
  }
  const bool allowed = bucket.tokens >= 1.0;
  if (allowed) bucket.tokens -= 1.0;
  if (buckets_.size() > kPruneThreshold) prune(now);
  return allowed;
}

void RateLimiter::prune(std::chrono::steady_clock::time_point now) {
  // A bucket that would be full again carries no state worth keeping.
  std::erase_if(buckets_, [&](const auto& entry) {
    const std::chrono::duration<double> idle = now - entry.second.last;
    return entry.second.tokens + idle.count() * rate_ >= burst_;
  });
}

std::size_t RateLimiter::tracked_sources() const {
  std::lock_guard lock(mutex_);
  return buckets_.size();
}

}  // namespace perfpower::ingest
