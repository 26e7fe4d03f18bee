#pragma once

// Canonical JSON wire format for click events and page snapshots, plus
// line-delimited event logs.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "perfpower/serp.hpp"

namespace perfpower {

using OrderedJson = nlohmann::ordered_json;

// Field names of the canonical event object, in serialization order.
inline constexpr std::string_view kEventFields[] = {
    "eventId",   "userId",     "timestamp",  "engine",      "group",
    "originalRank", "displayedRank", "elementKind", "pageIndex", "numResults",
    "adsPresent", "boxPresent", "boxColumn",  "ssrPositions", "candidateCount"};

OrderedJson to_json(const ClickEvent& event);

// Compact single-line canonical encoding.
std::string serialize(const ClickEvent& event);

struct EventParse {
  std::optional<ClickEvent> event;
  std::vector<Violation> violations;
};

// Structural decode. Unknown members are reported as "forbidden field" so no
// free-text field (query, URL, ...) can slip into storage. Absent optional
// members may be omitted or null.
EventParse parse_event(const nlohmann::json& j);
EventParse parse_event(std::string_view text);
inline EventParse parse_event(const std::string& text) { return parse_event(std::string_view(text)); }
inline EventParse parse_event(const char* text) { return parse_event(std::string_view(text)); }

// Semantic invariants of a recorded click (ranks, group/engine pairing, box
// metadata). Empty result means valid.
std::vector<Violation> validate_event(const ClickEvent& event);

OrderedJson to_json(const SerpSnapshot& snapshot);
// Unknown element kinds decode as Other. Throws ParseError on malformed input.
SerpSnapshot snapshot_from_json(const nlohmann::json& j);

// Line-delimited logs. Blank lines are skipped; a malformed line raises
// ParseError naming the line number.
std::vector<ClickEvent> read_event_log(std::istream& in);
std::vector<ClickEvent> read_event_log(const std::filesystem::path& path);
void write_event_log(std::ostream& out, std::span<const ClickEvent> events);
void write_event_log(const std::filesystem::path& path, std::span<const ClickEvent> events);

}  // namespace perfpower
