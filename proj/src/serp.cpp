#include "perfpower/serp.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "perfpower/errors.hpp"

namespace perfpower {

namespace {

bool is_main_generic(const SerpElement& e) {
  return e.kind == ElementKind::GenericResult && e.slot.column == Column::Main;
}

// Length in bytes of a grouping separator starting at text[pos], or 0.
std::size_t separator_length(std::string_view text, std::size_t pos) {
  static constexpr std::array<std::string_view, 7> kSeparators = {
      "'", ",", ".", " ", "\xC2\xA0" /* NBSP */, "\xE2\x80\xAF" /* narrow NBSP */,
      "\xE2\x80\x99" /* right single quote */};
  for (auto sep : kSeparators) {
    if (text.substr(pos, sep.size()) == sep) return sep.size();
  }
  return 0;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::vector<const SerpElement*> generic_results(const SerpSnapshot& snapshot) {
  std::vector<const SerpElement*> out;
  for (const auto& e : snapshot.elements) {
    if (is_main_generic(e)) out.push_back(&e);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SerpElement* a, const SerpElement* b) { return a->slot < b->slot; });
  return out;
}

int count_generic(const SerpSnapshot& snapshot) {
  return static_cast<int>(std::count_if(snapshot.elements.begin(), snapshot.elements.end(),
                                        is_main_generic));
}

std::optional<int> generic_rank(const SerpSnapshot& snapshot, std::string_view element_id) {
  auto it = std::find_if(snapshot.elements.begin(), snapshot.elements.end(),
                         [&](const SerpElement& e) { return e.id == element_id; });
  if (it == snapshot.elements.end()) {
    throw NotFound(fmt::format("element '{}' not in snapshot", element_id));
  }
  if (!is_main_generic(*it)) return std::nullopt;
  int rank = 1;
  for (const auto& e : snapshot.elements) {
    if (is_main_generic(e) && e.slot.index < it->slot.index) ++rank;
  }
  return rank;
}

std::vector<Violation> validate(const SerpSnapshot& snapshot) {
  std::vector<Violation> out;
  std::unordered_set<std::string_view> ids;
  std::set<Slot> slots;
  std::map<Column, std::vector<std::size_t>> indices;
  for (const auto& e : snapshot.elements) {
    if (e.id.empty()) out.push_back({"empty id", "element with empty id"});
    if (!ids.insert(e.id).second) out.push_back({"duplicate id", e.id});
    if (!slots.insert(e.slot).second) {
      out.push_back({"duplicate slot", fmt::format("{}[{}]", to_string(e.slot.column), e.slot.index)});
    }
    indices[e.slot.column].push_back(e.slot.index);
  }
  for (auto& [column, idx] : indices) {
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] != k) {
        out.push_back({"slot gap", fmt::format("{} column missing index {}", to_string(column), k)});
        break;
      }
    }
  }
  return out;
}

void canonicalize(SerpSnapshot& snapshot) {
  std::stable_sort(snapshot.elements.begin(), snapshot.elements.end(),
                   [](const SerpElement& a, const SerpElement& b) { return a.slot < b.slot; });
}

void compact_slots(SerpSnapshot& snapshot) {
  canonicalize(snapshot);
  std::map<Column, std::size_t> next;
  for (auto& e : snapshot.elements) e.slot.index = next[e.slot.column]++;
}

std::optional<std::uint64_t> parse_candidate_count(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size() && !is_digit(text[pos])) ++pos;
  if (pos == text.size()) return std::nullopt;

  std::uint64_t value = 0;
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  while (pos < text.size()) {
    if (is_digit(text[pos])) {
      const auto d = static_cast<std::uint64_t>(text[pos] - '0');
      if (value > (kMax - d) / 10) return std::nullopt;
      value = value * 10 + d;
      ++pos;
      continue;
    }
    const std::size_t sep = separator_length(text, pos);
    // A separator only counts when a digit follows it ("results (0.65" stops
    // at the space because '(' follows).
    if (sep == 0 || pos + sep >= text.size() || !is_digit(text[pos + sep])) break;
    pos += sep;
  }
  return value;
}

PageSummary summarize(const SerpSnapshot& snapshot) {
  PageSummary s;
  std::vector<const SerpElement*> organic;
  for (const auto& e : snapshot.elements) {
    switch (e.kind) {
      case ElementKind::GenericResult:
        if (e.slot.column == Column::Main) {
          ++s.num_results;
          organic.push_back(&e);
        }
        break;
      case ElementKind::Ad:
        s.ads_present = true;
        break;
      case ElementKind::ShoppingBox:
        s.box_present = true;
        if (!s.box_column || e.slot.column == Column::Main) s.box_column = e.slot.column;
        break;
      case ElementKind::SpecializedResult:
        if (e.slot.column == Column::Main) organic.push_back(&e);
        break;
      case ElementKind::Other:
        break;
    }
  }
  std::stable_sort(organic.begin(), organic.end(),
                   [](const SerpElement* a, const SerpElement* b) { return a->slot < b->slot; });
  for (std::size_t k = 0; k < organic.size(); ++k) {
    if (organic[k]->kind == ElementKind::SpecializedResult) s.ssr_positions.push_back(static_cast<int>(k));
  }
  return s;
}

bool ssr_between_top_two(const std::vector<int>& ssr_positions, int num_results) {
  if (num_results < 2) return false;
  const std::set<int> ssr(ssr_positions.begin(), ssr_positions.end());
  std::array<int, 2> generic{};
  int found = 0;
  for (int p = 0; found < 2; ++p) {
    if (!ssr.contains(p)) generic[found++] = p;
  }
  return std::any_of(ssr.begin(), ssr.end(),
                     [&](int p) { return p > generic[0] && p < generic[1]; });
}

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::GenericResult: return "genericResult";
    case ElementKind::Ad: return "ad";
    case ElementKind::ShoppingBox: return "shoppingBox";
    case ElementKind::SpecializedResult: return "specializedResult";
    case ElementKind::Other: return "other";
  }
  return "other";
}

std::string_view to_string(Column column) {
  return column == Column::Main ? "main" : "sidebar";
}

std::string_view to_string(Engine engine) {
  return engine == Engine::Google ? "google" : "bing";
}

std::string_view to_string(ArrangementId id) {
  static constexpr std::array<std::string_view, 7> kNames = {"a0", "a1", "a2", "a3",
                                                             "a4", "a5", "a6"};
  return kNames[static_cast<std::size_t>(id)];
}

std::optional<ElementKind> element_kind_from_string(std::string_view s) {
  for (auto k : {ElementKind::GenericResult, ElementKind::Ad, ElementKind::ShoppingBox,
                 ElementKind::SpecializedResult, ElementKind::Other}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<Column> column_from_string(std::string_view s) {
  if (s == "main") return Column::Main;
  if (s == "sidebar") return Column::Sidebar;
  return std::nullopt;
}

std::optional<Engine> engine_from_string(std::string_view s) {
  if (s == "google") return Engine::Google;
  if (s == "bing") return Engine::Bing;
  return std::nullopt;
}

std::optional<ArrangementId> arrangement_from_string(std::string_view s) {
  for (auto a : kAllArrangements) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

bool engine_supports(Engine engine, ArrangementId id) {
  if (engine == Engine::Google) return true;
  return id == ArrangementId::a0 || id == ArrangementId::a1;
}

}  // namespace perfpower
