#include "perfpower/arrangement.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "perfpower/errors.hpp"

namespace perfpower {

namespace {

ApplyResult unchanged(const SerpSnapshot& snapshot, std::string reason) {
  return {snapshot, false, std::move(reason)};
}

}  // namespace

ApplyResult swap_generic(const SerpSnapshot& snapshot, int i, int j) {
  if (i < 1 || j < 1) throw InvalidArgument("swap ranks must be >= 1");
  if (i == j) throw InvalidArgument("swap ranks must differ");

  const auto generic = generic_results(snapshot);
  if (static_cast<int>(generic.size()) < std::max(i, j)) {
    return unchanged(snapshot, "insufficient results");
  }

  ApplyResult result{snapshot, true, std::nullopt};
  const auto pos_i = static_cast<std::size_t>(generic[i - 1] - snapshot.elements.data());
  const auto pos_j = static_cast<std::size_t>(generic[j - 1] - snapshot.elements.data());
  std::swap(result.snapshot.elements[pos_i].slot, result.snapshot.elements[pos_j].slot);
  canonicalize(result.snapshot);
  return result;
}

ApplyResult hide_kinds(const SerpSnapshot& snapshot, const std::set<ElementKind>& kinds,
                       bool top_only) {
  for (auto k : kinds) {
    if (k != ElementKind::Ad && k != ElementKind::ShoppingBox) {
      throw InvalidArgument("only Ads and Shopping boxes can be hidden");
    }
  }

  std::optional<std::size_t> first_generic;
  if (const auto generic = generic_results(snapshot); !generic.empty()) {
    first_generic = generic.front()->slot.index;
  }
  auto hidden = [&](const SerpElement& e) {
    if (!kinds.contains(e.kind)) return false;
    if (e.kind == ElementKind::ShoppingBox || !top_only) return true;
    return e.slot.column == Column::Main && (!first_generic || e.slot.index < *first_generic);
  };

  ApplyResult result{snapshot, false, std::nullopt};
  auto& elements = result.snapshot.elements;
  const auto before = elements.size();
  std::erase_if(elements, hidden);
  if (elements.size() == before) return unchanged(snapshot, "nothing to hide");
  compact_slots(result.snapshot);
  result.applied = true;
  return result;
}

ApplyResult apply(ArrangementId arrangement, const SerpSnapshot& snapshot) {
  static const std::set<ElementKind> kAdsAndBox = {ElementKind::Ad, ElementKind::ShoppingBox};
  switch (arrangement) {
    case ArrangementId::a0:
      return {snapshot, true, std::nullopt};
    case ArrangementId::a1:
      return swap_generic(snapshot, 1, 2);
    case ArrangementId::a2:
      return swap_generic(snapshot, 1, 3);
    case ArrangementId::a3:
      return swap_generic(snapshot, 2, 3);
    case ArrangementId::a4:
      return hide_kinds(snapshot, kAdsAndBox, /*top_only=*/true);
    case ArrangementId::a5: {
      auto hidden = hide_kinds(snapshot, kAdsAndBox, /*top_only=*/true);
      auto swapped = swap_generic(hidden.snapshot, 1, 2);
      if (hidden.applied || swapped.applied) {
        return {std::move(swapped.snapshot), true, std::nullopt};
      }
      return unchanged(snapshot, "nothing to hide; insufficient results");
    }
    case ArrangementId::a6:
      return hide_kinds(snapshot, {ElementKind::ShoppingBox}, /*top_only=*/false);
  }
  throw InvalidArgument("unknown arrangement");
}

std::string_view describe(ArrangementId arrangement) {
  static constexpr std::array<std::string_view, 7> kLabels = {
      "control", "swap 1-2", "swap 1-3", "swap 2-3", "hide Ads/Box", "hide + swap", "hide Box"};
  return kLabels[static_cast<std::size_t>(arrangement)];
}

}  // namespace perfpower
