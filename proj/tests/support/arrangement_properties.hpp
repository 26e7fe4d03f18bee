#pragma once
// Invariants every arrangement must satisfy on any well-formed page. Each
// check returns an empty string on success, otherwise a description.

#include <algorithm>
#include <iterator>
#include <set>
#include <map>
#include <string>

#include <fmt/format.h>

#include "perfpower/arrangement.hpp"
#include "perfpower/serp.hpp"

namespace testing {

using namespace perfpower;

inline SerpSnapshot canonical(SerpSnapshot s) {
  canonicalize(s);
  return s;
}

inline std::multiset<std::pair<std::string, ElementKind>> contents(const SerpSnapshot& s) {
  std::multiset<std::pair<std::string, ElementKind>> out;
  for (const auto& e : s.elements) out.emplace(e.id, e.kind);
  return out;
}

inline std::multiset<Slot> slots(const SerpSnapshot& s) {
  std::multiset<Slot> out;
  for (const auto& e : s.elements) out.insert(e.slot);
  return out;
}

// Swaps keep the same elements on the same set of slots; hides remove only
// elements of the hidden kinds.
inline std::string check_multiset(ArrangementId a, const SerpSnapshot& in, const ApplyResult& out) {
  const auto before = contents(in);
  const auto after = contents(out.snapshot);
  const bool is_swap = a == ArrangementId::a0 || a == ArrangementId::a1 || a == ArrangementId::a2 ||
                       a == ArrangementId::a3;
  if (is_swap) {
    if (before != after) return "swap changed the element multiset";
    if (slots(in) != slots(out.snapshot)) return "swap changed the slot multiset";
    return {};
  }
  std::multiset<std::pair<std::string, ElementKind>> removed;
  std::set_difference(before.begin(), before.end(), after.begin(), after.end(),
                      std::inserter(removed, removed.end()));
  if (removed.size() + after.size() != before.size()) return "hide did not remove a sub-multiset";
  for (const auto& [id, kind] : removed) {
    const bool allowed = a == ArrangementId::a6 ? kind == ElementKind::ShoppingBox
                                                : kind == ElementKind::ShoppingBox || kind == ElementKind::Ad;
    if (!allowed) return fmt::format("{} removed {} of kind {}", to_string(a), id, to_string(kind));
  }
  if (!validate(out.snapshot).empty()) return "hide left a malformed page";
  return {};
}

inline std::string check_never_adds(const SerpSnapshot& in, const ApplyResult& out) {
  std::map<std::string, ElementKind> known;
  for (const auto& e : in.elements) known.emplace(e.id, e.kind);
  for (const auto& e : out.snapshot.elements) {
    auto it = known.find(e.id);
    if (it == known.end()) return fmt::format("element {} was added", e.id);
    if (it->second != e.kind) return fmt::format("element {} changed kind", e.id);
  }
  if (out.snapshot.elements.size() > in.elements.size()) return "page grew";
  if (out.snapshot.candidate_count != in.candidate_count || out.snapshot.engine != in.engine ||
      out.snapshot.page_index != in.page_index) {
    return "page metadata changed";
  }
  return {};
}

inline std::string check_swap_involution(const SerpSnapshot& in, int i, int j) {
  const auto once = swap_generic(in, i, j);
  const auto twice = swap_generic(once.snapshot, i, j);
  if (once.applied != twice.applied) return "second swap disagreed on applicability";
  if (canonical(twice.snapshot) != canonical(in)) return fmt::format("swap {}-{} is not an involution", i, j);
  return {};
}

// Degenerate pages (too few results, nothing to hide) and the control come
// back untouched.
inline std::string check_identity_on_degenerate(ArrangementId a, const SerpSnapshot& in,
                                                const ApplyResult& out) {
  if (a == ArrangementId::a0) {
    if (!out.applied || out.snapshot != in) return "a0 is not the identity";
    return {};
  }
  if (!out.applied) {
    if (out.snapshot != in) return fmt::format("{} not applied but page changed", to_string(a));
    if (!out.reason) return fmt::format("{} not applied without a reason", to_string(a));
    return {};
  }
  const int n = count_generic(in);
  const int needed = a == ArrangementId::a2 ? 3 : (a == ArrangementId::a3 ? 3 : 2);
  const bool is_swap = a == ArrangementId::a1 || a == ArrangementId::a2 || a == ArrangementId::a3;
  if (is_swap && n < needed) return fmt::format("{} applied on a page with {} results", to_string(a), n);
  if (a == ArrangementId::a6 &&
      std::none_of(in.elements.begin(), in.elements.end(),
                   [](const SerpElement& e) { return e.kind == ElementKind::ShoppingBox; })) {
    return "a6 applied on a page without a box";
  }
  return {};
}

// All invariants for one page; returns the first failure.
inline std::string check_all(const SerpSnapshot& in) {
  for (auto a : kAllArrangements) {
    const auto out = apply(a, in);
    for (const auto& msg : {check_multiset(a, in, out), check_never_adds(in, out),
                            check_identity_on_degenerate(a, in, out)}) {
      if (!msg.empty()) return msg;
    }
  }
  for (auto [i, j] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}}) {
    if (auto msg = check_swap_involution(in, i, j); !msg.empty()) return msg;
  }
  return {};
}

}  // namespace testing
