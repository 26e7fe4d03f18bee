#include <doctest.h>

#include "perfpower/errors.hpp"
#include "perfpower/serp.hpp"
#include "test_support.hpp"

using namespace perfpower;
using testing::page;

TEST_CASE("generic_rank counts only Main-column generic results") {
  auto s = page("a g s g b g");
  CHECK(generic_rank(s, "g1") == 1);
  CHECK(generic_rank(s, "g2") == 2);
  CHECK(generic_rank(s, "g3") == 3);
  CHECK_FALSE(generic_rank(s, "a1").has_value());
  CHECK_FALSE(generic_rank(s, "s1").has_value());
  CHECK_THROWS_AS(generic_rank(s, "nope"), NotFound);
  CHECK(count_generic(s) == 3);

  s.elements.push_back({"side", ElementKind::GenericResult, {Column::Sidebar, 0}});
  CHECK_FALSE(generic_rank(s, "side").has_value());
  CHECK(count_generic(s) == 3);
}

TEST_CASE("generic_results follows slot order, not storage order") {
  auto s = page("g g g");
  std::reverse(s.elements.begin(), s.elements.end());
  auto g = generic_results(s);
  REQUIRE(g.size() == 3);
  CHECK(g[0]->id == "g1");
  CHECK(g[2]->id == "g3");
}

TEST_CASE("validate reports structural problems") {
  CHECK(validate(page("a g g")).empty());
  CHECK(validate(SerpSnapshot{}).empty());

  auto dup = page("g g");
  dup.elements[1].id = "g1";
  REQUIRE_FALSE(validate(dup).empty());
  CHECK(validate(dup)[0].code == "duplicate id");

  auto clash = page("g g");
  clash.elements[1].slot = clash.elements[0].slot;
  bool found = false;
  for (const auto& v : validate(clash)) found |= v.code == "duplicate slot";
  CHECK(found);

  auto gap = page("g g");
  gap.elements[1].slot.index = 5;
  found = false;
  for (const auto& v : validate(gap)) found |= v.code == "slot gap";
  CHECK(found);

  auto empty = page("g");
  empty.elements[0].id.clear();
  found = false;
  for (const auto& v : validate(empty)) found |= v.code == "empty id";
  CHECK(found);
}

TEST_CASE("canonicalize and compact_slots") {
  SerpSnapshot s;
  s.elements = {{"x", ElementKind::Ad, {Column::Sidebar, 4}},
                {"y", ElementKind::GenericResult, {Column::Main, 7}},
                {"z", ElementKind::GenericResult, {Column::Main, 2}}};
  canonicalize(s);
  CHECK(s.elements[0].id == "z");
  CHECK(s.elements[1].id == "y");
  CHECK(s.elements[2].id == "x");
  compact_slots(s);
  CHECK(s.elements[0].slot == Slot{Column::Main, 0});
  CHECK(s.elements[1].slot == Slot{Column::Main, 1});
  CHECK(s.elements[2].slot == Slot{Column::Sidebar, 0});
  CHECK(validate(s).empty());
}

TEST_CASE("parse_candidate_count handles locale separators") {
  CHECK(parse_candidate_count("About 323'000'000 results (0.65 second)") == 323000000u);
  CHECK(parse_candidate_count("About 1,230,000 results") == 1230000u);
  CHECK(parse_candidate_count("Environ 4.560 résultats") == 4560u);
  CHECK(parse_candidate_count("Ungefähr 12 300 Ergebnisse") == 12300u);
  CHECK(parse_candidate_count("Circa 7 800 risultati") == 7800u);
  CHECK(parse_candidate_count("Etwa 5 000 Treffer") == 5000u);
  CHECK(parse_candidate_count("42 results") == 42u);
  CHECK_FALSE(parse_candidate_count("no digits here").has_value());
  CHECK_FALSE(parse_candidate_count("").has_value());
  CHECK_FALSE(parse_candidate_count("99999999999999999999999 results").has_value());
}

TEST_CASE("summarize records page metadata") {
  auto s = page("a g s g o g a");
  s.elements.push_back({"box", ElementKind::ShoppingBox, {Column::Sidebar, 0}});
  const auto sum = summarize(s);
  CHECK(sum.num_results == 3);
  CHECK(sum.ads_present);
  CHECK(sum.box_present);
  CHECK(sum.box_column == Column::Sidebar);
  // organic list: g1 s1 g2 g3
  CHECK(sum.ssr_positions == std::vector<int>{1});

  const auto plain = summarize(page("g g"));
  CHECK_FALSE(plain.ads_present);
  CHECK_FALSE(plain.box_present);
  CHECK_FALSE(plain.box_column.has_value());
  CHECK(plain.ssr_positions.empty());
}

TEST_CASE("ssr_between_top_two") {
  CHECK(ssr_between_top_two({1}, 3));
  CHECK(ssr_between_top_two({0, 2}, 3));  // s g s g
  CHECK_FALSE(ssr_between_top_two({0}, 3));
  CHECK_FALSE(ssr_between_top_two({2}, 3));
  CHECK_FALSE(ssr_between_top_two({}, 3));
  CHECK_FALSE(ssr_between_top_two({1}, 1));
}

TEST_CASE("string conversions round-trip") {
  for (auto k : {ElementKind::GenericResult, ElementKind::Ad, ElementKind::ShoppingBox,
                 ElementKind::SpecializedResult, ElementKind::Other}) {
    CHECK(element_kind_from_string(to_string(k)) == k);
  }
  for (auto a : kAllArrangements) CHECK(arrangement_from_string(to_string(a)) == a);
  CHECK(engine_from_string("bing") == Engine::Bing);
  CHECK(column_from_string("sidebar") == Column::Sidebar);
  CHECK_FALSE(engine_from_string("yahoo").has_value());
  CHECK_FALSE(arrangement_from_string("a7").has_value());
  CHECK(to_string(ElementKind::GenericResult) == "genericResult");
}

TEST_CASE("engine_supports") {
  for (auto a : kAllArrangements) CHECK(engine_supports(Engine::Google, a));
  CHECK(engine_supports(Engine::Bing, ArrangementId::a0));
  CHECK(engine_supports(Engine::Bing, ArrangementId::a1));
  CHECK_FALSE(engine_supports(Engine::Bing, ArrangementId::a2));
  CHECK_FALSE(engine_supports(Engine::Bing, ArrangementId::a6));
}
