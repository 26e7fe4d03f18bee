#pragma once

// Counterfactual page arrangements. Every transform only reorders or hides
// existing elements; none adds or rewrites content.

#include <initializer_list>
#include <optional>
#include <set>
#include <string>

#include "perfpower/serp.hpp"

namespace perfpower {

struct ApplyResult {
  SerpSnapshot snapshot;
  bool applied = false;
  // Set when applied is false.
  std::optional<std::string> reason;
};

// Exchanges the slots of the generic results at ranks i and j. Pages with
// fewer than max(i, j) generic results come back unchanged with
// applied=false. Throws InvalidArgument for i == j or a rank below 1.
ApplyResult swap_generic(const SerpSnapshot& snapshot, int i, int j);

// Removes Ads and/or Shopping boxes. With top_only, only Main-column Ads
// above the first generic result are removed; boxes go from either column.
// Remaining slots are compacted. Throws InvalidArgument for kinds other
// than Ad and ShoppingBox.
ApplyResult hide_kinds(const SerpSnapshot& snapshot, const std::set<ElementKind>& kinds,
                       bool top_only);

// a0 identity, a1 swap 1-2, a2 swap 1-3, a3 swap 2-3, a4 hide top Ads and
// boxes, a5 a4 followed by swap 1-2, a6 hide boxes.
ApplyResult apply(ArrangementId arrangement, const SerpSnapshot& snapshot);

// Human-readable label, e.g. "swap 1-2".
std::string_view describe(ArrangementId arrangement);

}  // namespace perfpower
