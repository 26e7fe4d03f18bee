#include <doctest.h>

#include <sstream>

#include "perfpower/errors.hpp"
#include "perfpower/event_io.hpp"
#include "test_support.hpp"

using namespace perfpower;
using testing::generic_click;

namespace {

bool has_code(const std::vector<Violation>& vs, std::string_view code) {
  for (const auto& v : vs) {
    if (v.code == code) return true;
  }
  return false;
}

ClickEvent random_event(Rng& rng, std::size_t k) {
  ClickEvent e;
  e.event_id = fmt::format("ev-{}-{}", k, rng.below(1u << 30));
  e.user_id = fmt::format("u{}", rng.below(1000));
  e.timestamp_ms = static_cast<std::int64_t>(rng.below(2'000'000'000'000ULL));
  e.engine = rng.bernoulli(0.5) ? Engine::Google : Engine::Bing;
  e.group = e.engine == Engine::Bing ? kAllArrangements[rng.below(2)] : kAllArrangements[rng.below(7)];
  e.num_results = static_cast<int>(1 + rng.below(10));
  static constexpr ElementKind kinds[] = {ElementKind::GenericResult, ElementKind::Ad,
                                          ElementKind::ShoppingBox, ElementKind::SpecializedResult,
                                          ElementKind::Other};
  e.element_kind = kinds[rng.below(5)];
  if (e.element_kind == ElementKind::GenericResult) {
    e.original_rank = static_cast<int>(1 + rng.below(e.num_results));
    e.displayed_rank = static_cast<int>(1 + rng.below(e.num_results));
  }
  e.page_index = rng.below(3);
  e.ads_present = rng.bernoulli(0.3);
  e.box_present = rng.bernoulli(0.2);
  if (e.box_present) e.box_column = rng.bernoulli(0.5) ? Column::Main : Column::Sidebar;
  const auto n_ssr = rng.below(3);
  for (std::size_t i = 0; i < n_ssr; ++i) e.ssr_positions.push_back(static_cast<int>(i * 2 + rng.below(2)));
  if (rng.bernoulli(0.8)) e.candidate_count = rng.below(1ULL << 40);
  return e;
}

}  // namespace

TEST_CASE("canonical encoding carries every field in order") {
  auto e = generic_click("ev1", ArrangementId::a1, 1, 2);
  const auto j = to_json(e);
  std::size_t k = 0;
  for (auto it = j.begin(); it != j.end(); ++it, ++k) {
    REQUIRE(k < std::size(kEventFields));
    CHECK(it.key() == kEventFields[k]);
  }
  CHECK(k == std::size(kEventFields));
  CHECK(j["boxColumn"].is_null());
  CHECK(j["candidateCount"].is_null());
  CHECK(j["group"] == "a1");
  CHECK(j["elementKind"] == "genericResult");
}

TEST_CASE("serialize/parse round-trip over random valid events") {
  Rng rng(99);
  for (std::size_t k = 0; k < 2000; ++k) {
    const auto e = random_event(rng, k);
    REQUIRE(validate_event(e).empty());
    const auto text = serialize(e);
    CHECK(text.find('\n') == std::string::npos);
    const auto parsed = parse_event(text);
    REQUIRE(parsed.violations.empty());
    REQUIRE(parsed.event.has_value());
    CHECK(*parsed.event == e);
    CHECK(serialize(*parsed.event) == text);
  }
}

TEST_CASE("parse_event rejects unknown and missing members") {
  auto j = nlohmann::json::parse(serialize(generic_click("ev1", ArrangementId::a0, 1, 1)));
  auto with_query = j;
  with_query["query"] = "cheap flights";
  auto r = parse_event(with_query);
  CHECK_FALSE(r.event.has_value());
  CHECK(has_code(r.violations, "forbidden field"));

  auto missing = j;
  missing.erase("userId");
  CHECK(has_code(parse_event(missing).violations, "missing field"));

  auto optional_absent = j;
  optional_absent.erase("candidateCount");
  optional_absent.erase("boxColumn");
  CHECK(parse_event(optional_absent).event.has_value());

  auto bad_type = j;
  bad_type["timestamp"] = "yesterday";
  CHECK(has_code(parse_event(bad_type).violations, "invalid type"));

  auto bad_value = j;
  bad_value["engine"] = "altavista";
  CHECK(has_code(parse_event(bad_value).violations, "invalid value"));

  CHECK(has_code(parse_event(std::string_view("{not json")).violations, "malformed json"));
  CHECK(has_code(parse_event(std::string_view("[1,2]")).violations, "invalid type"));
}

TEST_CASE("validate_event invariants") {
  CHECK(validate_event(generic_click("e", ArrangementId::a1, 1, 2)).empty());

  auto out_of_range = generic_click("e", ArrangementId::a0, 11, 1, 10);
  CHECK_FALSE(validate_event(out_of_range).empty());

  auto bing_a2 = generic_click("e", ArrangementId::a2, 1, 3);
  bing_a2.engine = Engine::Bing;
  CHECK_FALSE(validate_event(bing_a2).empty());

  auto ad_with_rank = testing::kind_click("e", ArrangementId::a0, ElementKind::Ad);
  CHECK(validate_event(ad_with_rank).empty());
  ad_with_rank.original_rank = 1;
  CHECK_FALSE(validate_event(ad_with_rank).empty());

  auto box_mismatch = generic_click("e", ArrangementId::a0, 1, 1);
  box_mismatch.box_column = Column::Main;
  CHECK_FALSE(validate_event(box_mismatch).empty());

  auto negative_time = generic_click("e", ArrangementId::a0, 1, 1);
  negative_time.timestamp_ms = -1;
  CHECK_FALSE(validate_event(negative_time).empty());

  auto long_id = generic_click(std::string(129, 'x'), ArrangementId::a0, 1, 1);
  CHECK_FALSE(validate_event(long_id).empty());
  CHECK_FALSE(validate_event(generic_click("", ArrangementId::a0, 1, 1)).empty());

  auto dup_ssr = generic_click("e", ArrangementId::a0, 1, 1);
  dup_ssr.ssr_positions = {1, 1};
  CHECK_FALSE(validate_event(dup_ssr).empty());
}

TEST_CASE("event logs") {
  Rng rng(5);
  std::vector<ClickEvent> events;
  for (std::size_t k = 0; k < 50; ++k) events.push_back(random_event(rng, k));
  std::stringstream ss;
  write_event_log(ss, events);
  CHECK(read_event_log(ss) == events);

  std::istringstream blank("\n\n");
  CHECK(read_event_log(blank).empty());

  std::istringstream bad(serialize(events[0]) + "\n{\"eventId\":1}\n");
  try {
    read_event_log(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  CHECK_THROWS_AS(read_event_log(std::filesystem::path("/nonexistent/log.jsonl")), IoError);
}

TEST_CASE("snapshot JSON round-trip") {
  auto s = testing::page("a g b g s");
  s.elements.push_back({"side", ElementKind::Ad, {Column::Sidebar, 0}});
  s.candidate_count = 12345;
  s.page_index = 1;
  CHECK(snapshot_from_json(to_json(s)) == s);

  auto j = nlohmann::json::parse(to_json(s).dump());
  j["elements"][0]["kind"] = "carousel";
  CHECK(snapshot_from_json(j).elements[0].kind == ElementKind::Other);
  CHECK_THROWS_AS(snapshot_from_json(nlohmann::json::parse("{\"elements\": 3}")), ParseError);
}
