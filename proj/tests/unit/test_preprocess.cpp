#include <doctest.h>

#include "perfpower/errors.hpp"
#include "perfpower/preprocess.hpp"
#include "test_support.hpp"

using namespace perfpower;
using testing::generic_click;

namespace {

ClickEvent at_day(std::string id, std::string user, double day) {
  auto e = generic_click(std::move(id), ArrangementId::a0, 1, 1);
  e.user_id = std::move(user);
  e.timestamp_ms = 1'700'000'000'000 + static_cast<std::int64_t>(day * kMsPerDay);
  return e;
}

}  // namespace

TEST_CASE("four-day burn-in per user") {
  const std::vector<ClickEvent> ev{at_day("d0", "u", 0), at_day("d1", "u", 1), at_day("d5", "u", 5),
                                   at_day("v0", "v", 3), at_day("v4", "v", 7)};
  const auto r = preprocess(ev, {});
  REQUIRE(r.kept.size() == 2);
  CHECK(r.kept[0].event_id == "d5");
  CHECK(r.kept[1].event_id == "v4");
  CHECK(r.report.input == 5);
  CHECK(r.report.burn_in == 3);
  CHECK(r.report.kept == 2);

  // Exactly four days after the first event is already past the burn-in.
  const auto edge = preprocess(std::vector<ClickEvent>{at_day("a", "w", 0), at_day("b", "w", 4)}, {});
  CHECK(edge.kept.size() == 1);

  PreprocessConfig none;
  none.burn_in_days = 0;
  CHECK(preprocess(ev, none).kept.size() == ev.size());
  none.burn_in_days = -1;
  CHECK_THROWS_AS(preprocess(ev, none), InvalidConfig);
}

TEST_CASE("unclassifiable generic clicks are dropped after burn-in") {
  auto missing = at_day("m", "u", 9);
  missing.displayed_rank.reset();
  auto early_missing = at_day("em", "u", 0);
  early_missing.original_rank.reset();
  auto ad = testing::kind_click("ad", ArrangementId::a0, ElementKind::Ad);
  ad.user_id = "u";
  ad.timestamp_ms = at_day("x", "u", 9).timestamp_ms;
  const std::vector<ClickEvent> ev{early_missing, missing, ad};
  CHECK(is_unclassifiable(missing));
  CHECK_FALSE(is_unclassifiable(ad));

  const auto r = preprocess(ev, {});
  CHECK(r.report.burn_in == 1);
  CHECK(r.report.unclassifiable == 1);
  REQUIRE(r.kept.size() == 1);
  CHECK(r.kept[0].event_id == "ad");

  PreprocessConfig keep;
  keep.drop_invalid_classification = false;
  CHECK(preprocess(ev, keep).kept.size() == 2);
}

TEST_CASE("field-sized log keeps 45,625 of 56,971") {
  const auto ev = testing::field_sized_log();
  const auto r = preprocess(ev, {});
  CHECK(r.report.input == 56'971);
  CHECK(r.report.kept == 45'625);
  CHECK(r.report.kept + r.report.burn_in + r.report.unclassifiable == r.report.input);
  for (const auto& e : r.kept) CHECK(e.event_id.starts_with("late-"));
}
