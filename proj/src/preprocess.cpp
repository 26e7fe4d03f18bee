#include "perfpower/preprocess.hpp"

#include <algorithm>
#include <unordered_map>

#include "perfpower/errors.hpp"

namespace perfpower {

bool is_unclassifiable(const ClickEvent& event) {
  return event.element_kind == ElementKind::GenericResult &&
         (!event.original_rank || !event.displayed_rank);
}

PreprocessResult preprocess(std::span<const ClickEvent> events, const PreprocessConfig& config) {
  if (config.burn_in_days < 0) throw InvalidConfig("burn-in days must be >= 0");
  const std::int64_t burn_in_ms = static_cast<std::int64_t>(config.burn_in_days) * kMsPerDay;

  std::unordered_map<std::string_view, std::int64_t> first_seen;
  for (const auto& e : events) {
    auto [it, inserted] = first_seen.try_emplace(e.user_id, e.timestamp_ms);
    if (!inserted) it->second = std::min(it->second, e.timestamp_ms);
  }

  PreprocessResult result;
  auto& report = result.report;
  report.input = events.size();
  for (const auto& e : events) {
    if (e.timestamp_ms < first_seen.at(e.user_id) + burn_in_ms) {
      ++report.burn_in;
    } else if (config.drop_invalid_classification && is_unclassifiable(e)) {
      ++report.unclassifiable;
    } else {
      result.kept.push_back(e);
    }
  }
  report.kept = result.kept.size();
  return result;
}

}  // namespace perfpower
