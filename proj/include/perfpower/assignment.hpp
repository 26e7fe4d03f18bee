#pragma once

// Stateless treatment assignment. A (user, query, salt) key hashes to a
// point in [0, 1) which selects a group from cumulative weights, so reloads
// and repeated queries always land in the same group without any storage.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "perfpower/kv_config.hpp"
#include "perfpower/serp.hpp"

namespace perfpower {

// Lowercases (full Unicode case mapping), trims, and collapses internal
// whitespace runs to one ASCII space. Invalid UTF-8 sequences are replaced
// with U+FFFD.
std::string normalize_query(std::string_view raw);

// 64-bit FNV-1a over the raw bytes.
std::uint64_t fnv1a64(std::string_view bytes);

struct AssignmentKey {
  std::string user_id;
  std::string normalized_query;
  std::string salt;

  // Builds a key, normalizing the raw query.
  static AssignmentKey make(std::string user_id, std::string_view raw_query, std::string salt);
};

// FNV-1a of "userId|normalizedQuery|salt".
std::uint64_t stable_hash(const AssignmentKey& key);

// Top 53 bits of the hash scaled to [0, 1); exact in double precision.
double unit_interval(std::uint64_t hash);

class GroupWeights {
 public:
  GroupWeights() = default;
  // Throws InvalidConfig unless every weight is finite and nonnegative, the
  // groups are distinct and supported by the engine, and the weights sum to
  // 1 within 1e-9.
  GroupWeights(Engine engine, std::vector<std::pair<ArrangementId, double>> entries);

  // Uniform over a0..a6 (Google) or a0/a1 (Bing).
  static GroupWeights uniform(Engine engine);

  // Reads `<engine>.<arrangement> = <weight>` keys; falls back to uniform
  // when the config names no group for the engine.
  static GroupWeights from_config(const KvConfig& config, Engine engine);

  Engine engine() const { return engine_; }
  const std::vector<std::pair<ArrangementId, double>>& entries() const { return entries_; }
  double weight(ArrangementId id) const;

 private:
  Engine engine_ = Engine::Google;
  std::vector<std::pair<ArrangementId, double>> entries_;
};

// Group whose cumulative-weight interval contains unit_interval(stable_hash(key)).
// Throws InvalidConfig when the weights belong to another engine.
ArrangementId assign(const AssignmentKey& key, Engine engine, const GroupWeights& weights);

// Bucket selection on an already computed point u in [0, 1).
ArrangementId bucket_for(double u, const GroupWeights& weights);

}  // namespace perfpower
