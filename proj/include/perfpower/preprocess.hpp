#pragma once

#include <span>
#include <vector>

#include "perfpower/serp.hpp"

namespace perfpower {

inline constexpr std::int64_t kMsPerDay = 86'400'000;

struct PreprocessConfig {
  int burn_in_days = 4;
  bool drop_invalid_classification = true;
};

struct DropReport {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t burn_in = 0;
  std::size_t unclassifiable = 0;
};

struct PreprocessResult {
  std::vector<ClickEvent> kept;
  DropReport report;
};

// Drops, per user, every event earlier than the user's first event plus the
// burn-in period, then generic-result clicks whose ranks were not recorded.
// Each dropped event is counted under exactly one reason (burn-in first).
// Kept events retain their input order. Throws InvalidConfig for a negative
// burn-in.
PreprocessResult preprocess(std::span<const ClickEvent> events, const PreprocessConfig& config);

bool is_unclassifiable(const ClickEvent& event);

}  // namespace perfpower
