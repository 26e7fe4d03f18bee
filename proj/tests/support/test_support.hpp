#pragma once
// Helpers shared by the unit and acceptance tests.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

#include <fmt/format.h>

#include "perfpower/click_sim.hpp"
#include "perfpower/random.hpp"
#include "perfpower/serp.hpp"

namespace testing {

using namespace perfpower;

// Main-column page from a compact layout string, one token per slot:
// g (generic), a (ad), b (box), s (specialized), o (other). Ids are the
// token plus a per-kind counter: "g1", "g2", "a1", ...
inline SerpSnapshot page(std::string_view layout, Engine engine = Engine::Google) {
  SerpSnapshot s;
  s.engine = engine;
  int counts[128] = {};
  std::size_t index = 0;
  for (char c : layout) {
    if (c == ' ') continue;
    ElementKind kind = ElementKind::Other;
    switch (c) {
      case 'g': kind = ElementKind::GenericResult; break;
      case 'a': kind = ElementKind::Ad; break;
      case 'b': kind = ElementKind::ShoppingBox; break;
      case 's': kind = ElementKind::SpecializedResult; break;
      default: break;
    }
    s.elements.push_back({fmt::format("{}{}", c, ++counts[static_cast<unsigned char>(c)]), kind,
                          Slot{Column::Main, index++}});
  }
  return s;
}

// Ids of the Main column in display order.
inline std::vector<std::string> main_ids(const SerpSnapshot& s) {
  std::vector<std::pair<std::size_t, std::string>> v;
  for (const auto& e : s.elements) {
    if (e.slot.column == Column::Main) v.emplace_back(e.slot.index, e.id);
  }
  std::sort(v.begin(), v.end());
  std::vector<std::string> out;
  for (auto& [i, id] : v) out.push_back(id);
  return out;
}

// Random well-formed snapshot: 0-12 Main elements of any kind, 0-3 Sidebar
// elements, optional candidate count.
inline SerpSnapshot random_snapshot(Rng& rng) {
  SerpSnapshot s;
  s.engine = rng.bernoulli(0.8) ? Engine::Google : Engine::Bing;
  s.page_index = rng.below(3);
  static constexpr ElementKind kinds[] = {ElementKind::GenericResult, ElementKind::GenericResult,
                                          ElementKind::GenericResult, ElementKind::Ad,
                                          ElementKind::ShoppingBox,   ElementKind::SpecializedResult,
                                          ElementKind::Other};
  int next_id = 0;
  const auto n_main = rng.below(13);
  for (std::size_t i = 0; i < n_main; ++i) {
    s.elements.push_back(
        {fmt::format("e{}", next_id++), kinds[rng.below(std::size(kinds))], {Column::Main, i}});
  }
  const auto n_side = rng.below(4);
  for (std::size_t i = 0; i < n_side; ++i) {
    s.elements.push_back(
        {fmt::format("e{}", next_id++), kinds[rng.below(std::size(kinds))], {Column::Sidebar, i}});
  }
  // Shuffle storage order; transforms must not depend on it.
  for (std::size_t i = s.elements.size(); i > 1; --i) {
    std::swap(s.elements[i - 1], s.elements[rng.below(i)]);
  }
  if (rng.bernoulli(0.7)) s.candidate_count = rng.below(1'000'000'000);
  return s;
}

// Click model of the hand-checked example: Main examination [1, 0.5, 0.25],
// nothing else attracts clicks and there is no abandonment.
inline ClickModelParams three_slot_params() {
  ClickModelParams p;
  p.main_examination = {1.0, 0.5, 0.25};
  p.sidebar_examination = {};
  p.no_click_weight = 0;
  return p;
}

inline SyntheticQuery three_result_query(std::string id = "q") {
  SyntheticQuery q;
  q.query_id = std::move(id);
  q.snapshot = page("ggg");
  q.relevance = {{"g1", 1.0}, {"g2", 1.0}, {"g3", 1.0}};
  return q;
}

// Minimal valid generic-result click.
inline ClickEvent generic_click(std::string id, ArrangementId group, int original_rank,
                                int displayed_rank, int num_results = 10) {
  ClickEvent e;
  e.event_id = std::move(id);
  e.user_id = "user-1";
  e.timestamp_ms = 1'700'000'000'000;
  e.engine = Engine::Google;
  e.group = group;
  e.original_rank = original_rank;
  e.displayed_rank = displayed_rank;
  e.element_kind = ElementKind::GenericResult;
  e.num_results = num_results;
  return e;
}

inline ClickEvent kind_click(std::string id, ArrangementId group, ElementKind kind) {
  auto e = generic_click(std::move(id), group, 1, 1);
  e.original_rank.reset();
  e.displayed_rank.reset();
  e.element_kind = kind;
  if (kind == ElementKind::Ad) e.ads_present = true;
  if (kind == ElementKind::ShoppingBox) {
    e.box_present = true;
    e.box_column = Column::Main;
  }
  return e;
}

// Directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            fmt::format("perfpower-test-{}-{}", ::getpid(), counter++);
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing

namespace testing {

// Clicks of one group with exact per-rank counts, plus `ads` ad clicks.
// Ranks are recorded as original == displayed, which is all the CTR
// estimators look at.
inline void add_group(std::vector<perfpower::ClickEvent>& out, perfpower::ArrangementId group,
                      const std::vector<std::pair<int, int>>& rank_counts, int ads = 0,
                      perfpower::Engine engine = perfpower::Engine::Google) {
  using namespace perfpower;
  for (const auto& [rank, count] : rank_counts) {
    for (int k = 0; k < count; ++k) {
      auto e = generic_click(fmt::format("{}-{}-r{}-{}", to_string(engine), to_string(group), rank, k),
                             group, rank, rank);
      e.engine = engine;
      out.push_back(std::move(e));
    }
  }
  for (int k = 0; k < ads; ++k) {
    auto e = kind_click(fmt::format("{}-{}-ad-{}", to_string(engine), to_string(group), k), group,
                        ElementKind::Ad);
    e.engine = engine;
    out.push_back(std::move(e));
  }
}

}  // namespace testing

namespace testing {

// Log of 56,971 clicks from 1,000 users in which exactly 11,346 fall inside
// their user's first four days (ids "early-*") and 45,625 come later
// ("late-*"). Storage order is shuffled.
inline std::vector<perfpower::ClickEvent> field_sized_log() {
  using namespace perfpower;
  constexpr std::size_t kTotal = 56'971;
  constexpr std::size_t kEarly = 56'971 - 45'625;
  constexpr std::size_t kUsers = 1'000;
  constexpr std::int64_t kStart = 1'693'526'400'000;
  constexpr std::int64_t kHour = 3'600'000;
  std::vector<ClickEvent> out;
  out.reserve(kTotal);
  for (std::size_t k = 0; k < kTotal; ++k) {
    const bool early = k < kEarly;
    auto e = generic_click(fmt::format("{}-{}", early ? "early" : "late", k),
                           k % 2 ? ArrangementId::a1 : ArrangementId::a0, 1 + k % 3, 1 + k % 3);
    if (e.group == ArrangementId::a1 && *e.original_rank <= 2) e.displayed_rank = 3 - *e.original_rank;
    e.user_id = fmt::format("user-{:04d}", k % kUsers);
    // Early clicks sit in the first 12 hours; every user's first click is
    // at kStart. Late clicks start on day 5.
    e.timestamp_ms = early ? kStart + static_cast<std::int64_t>(k / kUsers) * kHour
                           : kStart + 5 * 24 * kHour + static_cast<std::int64_t>(k) * 1000;
    out.push_back(std::move(e));
  }
  Rng rng(56971);
  for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng.below(i)]);
  return out;
}

}  // namespace testing
