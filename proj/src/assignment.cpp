#include "perfpower/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "perfpower/errors.hpp"

namespace perfpower {

std::string normalize_query(std::string_view raw) {
  icu::UnicodeString text = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<std::int32_t>(raw.size())));
  text.toLower(icu::Locale::getRoot());

  icu::UnicodeString collapsed;
  bool pending_space = false;
  for (std::int32_t i = 0; i < text.length(); i = text.moveIndex32(i, 1)) {
    const UChar32 c = text.char32At(i);
    if (u_isUWhiteSpace(c)) {
      pending_space = !collapsed.isEmpty();
      continue;
    }
    if (pending_space) collapsed.append(static_cast<UChar>(' '));
    pending_space = false;
    collapsed.append(c);
  }
  std::string out;
  collapsed.toUTF8String(out);
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  constexpr std::uint64_t kOffsetBasis = 0xcbf29ce484222325ULL;
  constexpr std::uint64_t kPrime = 0x100000001b3ULL;
  std::uint64_t h = kOffsetBasis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kPrime;
  }
  return h;
}

AssignmentKey AssignmentKey::make(std::string user_id, std::string_view raw_query,
                                  std::string salt) {
  return {std::move(user_id), normalize_query(raw_query), std::move(salt)};
}

std::uint64_t stable_hash(const AssignmentKey& key) {
  std::string joined;
  joined.reserve(key.user_id.size() + key.normalized_query.size() + key.salt.size() + 2);
  joined.append(key.user_id).append("|").append(key.normalized_query).append("|").append(key.salt);
  return fnv1a64(joined);
}

double unit_interval(std::uint64_t hash) {
  return std::ldexp(static_cast<double>(hash >> 11), -53);
}

GroupWeights::GroupWeights(Engine engine, std::vector<std::pair<ArrangementId, double>> entries)
    : engine_(engine), entries_(std::move(entries)) {
  if (entries_.empty()) throw InvalidConfig("group weights are empty");
  std::set<ArrangementId> seen;
  double total = 0;
  for (const auto& [id, w] : entries_) {
    if (!std::isfinite(w) || w < 0) {
      throw InvalidConfig(fmt::format("weight of {} must be finite and >= 0", to_string(id)));
    }
    if (!engine_supports(engine, id)) {
      throw InvalidConfig(fmt::format("{} is not available on {}", to_string(id), to_string(engine)));
    }
    if (!seen.insert(id).second) {
      throw InvalidConfig(fmt::format("{} listed twice", to_string(id)));
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidConfig(fmt::format("{} weights sum to {:.12f}, expected 1", to_string(engine), total));
  }
}

GroupWeights GroupWeights::uniform(Engine engine) {
  std::vector<std::pair<ArrangementId, double>> entries;
  for (auto id : kAllArrangements) {
    if (engine_supports(engine, id)) entries.emplace_back(id, 0.0);
  }
  for (auto& e : entries) e.second = 1.0 / static_cast<double>(entries.size());
  return GroupWeights(engine, std::move(entries));
}

GroupWeights GroupWeights::from_config(const KvConfig& config, Engine engine) {
  std::vector<std::pair<ArrangementId, double>> entries;
  const std::string prefix = fmt::format("{}.", to_string(engine));
  for (const auto& key : config.keys_with_prefix(prefix)) {
    auto id = arrangement_from_string(std::string_view(key).substr(prefix.size()));
    if (!id) continue;  // other settings under the engine prefix
    entries.emplace_back(*id, parse_rational(*config.get(key)));
  }
  if (entries.empty()) return uniform(engine);
  std::sort(entries.begin(), entries.end());
  return GroupWeights(engine, std::move(entries));
}

double GroupWeights::weight(ArrangementId id) const {
  for (const auto& [g, w] : entries_) {
    if (g == id) return w;
  }
  return 0.0;
}

ArrangementId bucket_for(double u, const GroupWeights& weights) {
  double cumulative = 0;
  const auto& entries = weights.entries();
  for (const auto& [id, w] : entries) {
    cumulative += w;
    if (w > 0 && u < cumulative) return id;
  }
  // Rounding can leave the total just below 1; fall back to the last group
  // that carries weight.
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    if (it->second > 0) return it->first;
  }
  throw InvalidConfig("all group weights are zero");
}

ArrangementId assign(const AssignmentKey& key, Engine engine, const GroupWeights& weights) {
  if (weights.entries().empty()) throw InvalidConfig("group weights are empty");
  if (weights.engine() != engine) {
    throw InvalidConfig(fmt::format("weights configured for {}, not {}",
                                    to_string(weights.engine()), to_string(engine)));
  }
  return bucket_for(unit_interval(stable_hash(key)), weights);
}

}  // namespace perfpower
