#include "perfpower/event_io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "perfpower/errors.hpp"

namespace perfpower {

namespace {

constexpr std::size_t kMaxIdLength = 128;

template <typename T>
OrderedJson nullable(const std::optional<T>& v) {
  return v ? OrderedJson(*v) : OrderedJson(nullptr);
}

// Reads members of an event object, collecting violations instead of
// throwing so that the service can report every problem at once.
class EventReader {
 public:
  EventReader(const nlohmann::json& j, std::vector<Violation>& out) : j_(j), out_(out) {}

  const nlohmann::json* required(std::string_view name) {
    auto it = j_.find(name);
    if (it == j_.end() || it->is_null()) {
      out_.push_back({"missing field", std::string(name)});
      return nullptr;
    }
    return &*it;
  }

  const nlohmann::json* optional(std::string_view name) {
    auto it = j_.find(name);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::optional<std::string> string(const nlohmann::json* v, std::string_view name) {
    if (v == nullptr) return std::nullopt;
    if (!v->is_string()) return type_error(name);
    return v->get<std::string>();
  }

  std::optional<std::int64_t> integer(const nlohmann::json* v, std::string_view name) {
    if (v == nullptr) return std::nullopt;
    if (!v->is_number_integer()) return type_error(name);
    if (v->is_number_unsigned() &&
        v->get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
      out_.push_back({"out of range", std::string(name)});
      return std::nullopt;
    }
    return v->get<std::int64_t>();
  }

  std::optional<bool> boolean(const nlohmann::json* v, std::string_view name) {
    if (v == nullptr) return std::nullopt;
    if (!v->is_boolean()) return type_error(name);
    return v->get<bool>();
  }

  template <typename Enum>
  std::optional<Enum> enumeration(const nlohmann::json* v, std::string_view name,
                                  std::optional<Enum> (*decode)(std::string_view)) {
    auto s = string(v, name);
    if (!s) return std::nullopt;
    auto e = decode(*s);
    if (!e) out_.push_back({"invalid value", fmt::format("{}: '{}'", name, *s)});
    return e;
  }

  std::nullopt_t type_error(std::string_view name) {
    out_.push_back({"invalid type", std::string(name)});
    return std::nullopt;
  }

 private:
  const nlohmann::json& j_;
  std::vector<Violation>& out_;
};

std::optional<int> to_int(std::optional<std::int64_t> v, std::string_view name,
                          std::vector<Violation>& out) {
  if (!v) return std::nullopt;
  if (*v < INT32_MIN || *v > INT32_MAX) {
    out.push_back({"out of range", std::string(name)});
    return std::nullopt;
  }
  return static_cast<int>(*v);
}

}  // namespace

OrderedJson to_json(const ClickEvent& e) {
  OrderedJson j;
  j["eventId"] = e.event_id;
  j["userId"] = e.user_id;
  j["timestamp"] = e.timestamp_ms;
  j["engine"] = to_string(e.engine);
  j["group"] = to_string(e.group);
  j["originalRank"] = nullable(e.original_rank);
  j["displayedRank"] = nullable(e.displayed_rank);
  j["elementKind"] = to_string(e.element_kind);
  j["pageIndex"] = e.page_index;
  j["numResults"] = e.num_results;
  j["adsPresent"] = e.ads_present;
  j["boxPresent"] = e.box_present;
  j["boxColumn"] = e.box_column ? OrderedJson(to_string(*e.box_column)) : OrderedJson(nullptr);
  j["ssrPositions"] = e.ssr_positions;
  j["candidateCount"] = nullable(e.candidate_count);
  return j;
}

std::string serialize(const ClickEvent& event) { return to_json(event).dump(); }

EventParse parse_event(const nlohmann::json& j) {
  EventParse result;
  auto& out = result.violations;
  if (!j.is_object()) {
    out.push_back({"invalid type", "event must be a JSON object"});
    return result;
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kEventFields), std::end(kEventFields), key) == std::end(kEventFields)) {
      out.push_back({"forbidden field", key});
    }
  }

  EventReader r(j, out);
  ClickEvent e;
  auto event_id = r.string(r.required("eventId"), "eventId");
  auto user_id = r.string(r.required("userId"), "userId");
  auto timestamp = r.integer(r.required("timestamp"), "timestamp");
  auto engine = r.enumeration<Engine>(r.required("engine"), "engine", engine_from_string);
  auto group = r.enumeration<ArrangementId>(r.required("group"), "group", arrangement_from_string);
  e.original_rank = to_int(r.integer(r.optional("originalRank"), "originalRank"), "originalRank", out);
  e.displayed_rank =
      to_int(r.integer(r.optional("displayedRank"), "displayedRank"), "displayedRank", out);
  auto kind = r.enumeration<ElementKind>(r.required("elementKind"), "elementKind",
                                         element_kind_from_string);
  auto page_index = r.integer(r.required("pageIndex"), "pageIndex");
  auto num_results = to_int(r.integer(r.required("numResults"), "numResults"), "numResults", out);
  auto ads = r.boolean(r.required("adsPresent"), "adsPresent");
  auto box = r.boolean(r.required("boxPresent"), "boxPresent");
  e.box_column = r.enumeration<Column>(r.optional("boxColumn"), "boxColumn", column_from_string);

  if (const auto* ssr = r.optional("ssrPositions")) {
    if (!ssr->is_array()) {
      r.type_error("ssrPositions");
    } else {
      for (const auto& p : *ssr) {
        if (!p.is_number_integer()) {
          r.type_error("ssrPositions");
          break;
        }
        auto v = to_int(p.get<std::int64_t>(), "ssrPositions", out);
        if (v) e.ssr_positions.push_back(*v);
      }
    }
  }
  if (const auto* cc = r.optional("candidateCount")) {
    if (!cc->is_number_integer() || (cc->is_number_integer() && !cc->is_number_unsigned() &&
                                     cc->get<std::int64_t>() < 0)) {
      out.push_back({"invalid type", "candidateCount"});
    } else {
      e.candidate_count = cc->get<std::uint64_t>();
    }
  }
  if (page_index && *page_index < 0) out.push_back({"out of range", "pageIndex"});

  if (!out.empty()) return result;
  e.event_id = *event_id;
  e.user_id = *user_id;
  e.timestamp_ms = *timestamp;
  e.engine = *engine;
  e.group = *group;
  e.element_kind = *kind;
  e.page_index = static_cast<std::size_t>(*page_index);
  e.num_results = *num_results;
  e.ads_present = *ads;
  e.box_present = *box;
  result.event = std::move(e);
  return result;
}

EventParse parse_event(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    EventParse result;
    result.violations.push_back({"malformed json", "body is not valid JSON"});
    return result;
  }
  return parse_event(j);
}

std::vector<Violation> validate_event(const ClickEvent& e) {
  std::vector<Violation> out;
  if (e.event_id.empty() || e.event_id.size() > kMaxIdLength) {
    out.push_back({"invalid eventId", "must be 1..128 characters"});
  }
  if (e.user_id.empty() || e.user_id.size() > kMaxIdLength) {
    out.push_back({"invalid userId", "must be 1..128 characters"});
  }
  if (e.timestamp_ms < 0) out.push_back({"invalid timestamp", "must be nonnegative"});
  if (!engine_supports(e.engine, e.group)) {
    out.push_back({"invalid group",
                   fmt::format("{} not run on {}", to_string(e.group), to_string(e.engine))});
  }
  if (e.num_results < 0) out.push_back({"invalid numResults", "must be nonnegative"});

  auto check_rank = [&](const std::optional<int>& rank, std::string_view name) {
    if (e.element_kind == ElementKind::GenericResult) {
      if (!rank) {
        out.push_back({"missing rank", fmt::format("{} required for generic results", name)});
      } else if (*rank < 1 || *rank > e.num_results) {
        out.push_back({"invalid rank", fmt::format("{} must be in 1..numResults", name)});
      }
    } else if (rank) {
      out.push_back({"invalid rank", fmt::format("{} only allowed for generic results", name)});
    }
  };
  check_rank(e.original_rank, "originalRank");
  check_rank(e.displayed_rank, "displayedRank");

  if (e.box_present != e.box_column.has_value()) {
    out.push_back({"invalid boxColumn", "boxColumn must be set exactly when boxPresent"});
  }
  std::set<int> seen;
  for (int p : e.ssr_positions) {
    if (p < 0 || !seen.insert(p).second) {
      out.push_back({"invalid ssrPositions", "positions must be distinct and nonnegative"});
      break;
    }
  }
  return out;
}

OrderedJson to_json(const SerpSnapshot& s) {
  OrderedJson j;
  j["engine"] = to_string(s.engine);
  j["pageIndex"] = s.page_index;
  j["candidateCount"] = nullable(s.candidate_count);
  auto& elements = j["elements"] = OrderedJson::array();
  for (const auto& e : s.elements) {
    elements.push_back(OrderedJson{{"id", e.id},
                                   {"kind", to_string(e.kind)},
                                   {"column", to_string(e.slot.column)},
                                   {"index", e.slot.index}});
  }
  return j;
}

SerpSnapshot snapshot_from_json(const nlohmann::json& j) {
  try {
    SerpSnapshot s;
    auto engine = engine_from_string(j.at("engine").get<std::string>());
    if (!engine) throw ParseError("snapshot: unknown engine");
    s.engine = *engine;
    s.page_index = j.value("pageIndex", std::size_t{0});
    if (auto it = j.find("candidateCount"); it != j.end() && !it->is_null()) {
      s.candidate_count = it->get<std::uint64_t>();
    }
    for (const auto& je : j.at("elements")) {
      SerpElement e;
      e.id = je.at("id").get<std::string>();
      e.kind = element_kind_from_string(je.at("kind").get<std::string>()).value_or(ElementKind::Other);
      auto column = column_from_string(je.value("column", std::string("main")));
      if (!column) throw ParseError("snapshot: unknown column");
      e.slot = {*column, je.at("index").get<std::size_t>()};
      s.elements.push_back(std::move(e));
    }
    return s;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(fmt::format("snapshot: {}", ex.what()));
  }
}

std::vector<ClickEvent> read_event_log(std::istream& in) {
  std::vector<ClickEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto parsed = parse_event(std::string_view(line));
    if (!parsed.event) {
      const auto& v = parsed.violations.front();
      throw ParseError(fmt::format("line {}: {} ({})", line_no, v.code, v.detail));
    }
    events.push_back(std::move(*parsed.event));
  }
  if (in.bad()) throw IoError("error while reading event log");
  return events;
}

std::vector<ClickEvent> read_event_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return read_event_log(in);
}

void write_event_log(std::ostream& out, std::span<const ClickEvent> events) {
  for (const auto& e : events) out << serialize(e) << '\n';
}

void write_event_log(const std::filesystem::path& path, std::span<const ClickEvent> events) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  write_event_log(out, events);
  out.flush();
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace perfpower
