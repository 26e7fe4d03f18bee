#pragma once

// Data model of a search-results page and of recorded click events.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace perfpower {

enum class ElementKind : std::uint8_t { GenericResult, Ad, ShoppingBox, SpecializedResult, Other };

enum class Column : std::uint8_t { Main, Sidebar };

enum class Engine : std::uint8_t { Google, Bing };

// Counterfactual arrangements. a0 is the unmodified page.
enum class ArrangementId : std::uint8_t { a0, a1, a2, a3, a4, a5, a6 };

inline constexpr ArrangementId kAllArrangements[] = {
    ArrangementId::a0, ArrangementId::a1, ArrangementId::a2, ArrangementId::a3,
    ArrangementId::a4, ArrangementId::a5, ArrangementId::a6};

struct Slot {
  Column column = Column::Main;
  std::size_t index = 0;

  auto operator<=>(const Slot&) const = default;
};

struct SerpElement {
  std::string id;
  ElementKind kind = ElementKind::Other;
  Slot slot;

  bool operator==(const SerpElement&) const = default;
};

struct SerpSnapshot {
  Engine engine = Engine::Google;
  std::size_t page_index = 0;
  std::vector<SerpElement> elements;
  std::optional<std::uint64_t> candidate_count;

  bool operator==(const SerpSnapshot&) const = default;
};

struct ClickEvent {
  std::string event_id;
  std::string user_id;
  std::int64_t timestamp_ms = 0;
  Engine engine = Engine::Google;
  ArrangementId group = ArrangementId::a0;
  std::optional<int> original_rank;
  std::optional<int> displayed_rank;
  ElementKind element_kind = ElementKind::GenericResult;
  std::size_t page_index = 0;
  int num_results = 0;
  bool ads_present = false;
  bool box_present = false;
  std::optional<Column> box_column;
  // Positions of specialized results in the organic list of the unmodified
  // page (0-based; the organic list is the Main-column sequence of generic
  // and specialized results, Ads, boxes and other items excluded).
  std::vector<int> ssr_positions;
  std::optional<std::uint64_t> candidate_count;

  bool operator==(const ClickEvent&) const = default;
};

struct Violation {
  std::string code;
  std::string detail;

  bool operator==(const Violation&) const = default;
};

// 1-based rank among Main-column generic results, or nullopt for any other
// element. Throws NotFound for an unknown id.
std::optional<int> generic_rank(const SerpSnapshot& snapshot, std::string_view element_id);

// Elements of the Main column that are generic results, in display order.
std::vector<const SerpElement*> generic_results(const SerpSnapshot& snapshot);

int count_generic(const SerpSnapshot& snapshot);

// Structural checks: unique ids, unique slots, contiguous indices per column.
// Empty result means the snapshot is well formed.
std::vector<Violation> validate(const SerpSnapshot& snapshot);

// Sorts elements into display order (Main before Sidebar, then by index).
void canonicalize(SerpSnapshot& snapshot);

// Renumbers slot indices so that each column is contiguous from 0 while
// keeping relative order.
void compact_slots(SerpSnapshot& snapshot);

// Parses the integer out of a results-count banner such as
// "About 323'000'000 results (0.65 second)". Any grouping separator among
// ' , . space and NBSP is accepted between digit groups.
std::optional<std::uint64_t> parse_candidate_count(std::string_view text);

// Page metadata recorded with a click, computed from the unmodified page.
struct PageSummary {
  int num_results = 0;
  bool ads_present = false;
  bool box_present = false;
  std::optional<Column> box_column;
  std::vector<int> ssr_positions;
};
PageSummary summarize(const SerpSnapshot& snapshot);

// True when a specialized result sits between generic ranks 1 and 2 in the
// organic list. Generic results occupy the organic positions not taken by
// specialized results.
bool ssr_between_top_two(const std::vector<int>& ssr_positions, int num_results);

std::string_view to_string(ElementKind kind);
std::string_view to_string(Column column);
std::string_view to_string(Engine engine);
std::string_view to_string(ArrangementId id);

std::optional<ElementKind> element_kind_from_string(std::string_view s);
std::optional<Column> column_from_string(std::string_view s);
std::optional<Engine> engine_from_string(std::string_view s);
std::optional<ArrangementId> arrangement_from_string(std::string_view s);

// Groups an engine supports: a0..a6 on Google, a0/a1 on Bing.
bool engine_supports(Engine engine, ArrangementId id);

}  // namespace perfpower
