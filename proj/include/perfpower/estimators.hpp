#pragma once

// Estimators over randomized click logs: per-group click-through rates, the
// performativity gap between two groups, algorithmic distortion, the
// performative-power lower bound, stratified bootstrap intervals and
// subgroup breakdowns.
//
// CTR^i(a) is the share of all clicks in group a that land on c_i, the
// result shown at rank i on the unmodified page. Every function assumes the
// events come from one engine; use filter_engine() first on mixed logs.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "perfpower/serp.hpp"

namespace perfpower {

using EventRefs = std::vector<const ClickEvent*>;
using EventSpan = std::span<const ClickEvent* const>;

EventRefs refs(std::span<const ClickEvent> events);
std::vector<ClickEvent> filter_engine(std::span<const ClickEvent> events, Engine engine);

struct CtrEstimate {
  double value = 0;
  std::size_t hits = 0;
  std::size_t total = 0;  // all clicks in the group
};

// Throws EmptyGroup when no event belongs to the group.
CtrEstimate ctr_hat(EventSpan events, ArrangementId group, int i);
CtrEstimate ctr_hat(std::span<const ClickEvent> events, ArrangementId group, int i);

// Share of clicks per target ("c1".."cK", "unranked", "ad", "shoppingBox",
// "specializedResult", "other") within the group, in that order. Shares sum
// to 1. Throws EmptyGroup.
std::vector<std::pair<std::string, double>> click_shares(std::span<const ClickEvent> events,
                                                         ArrangementId group);

struct BootstrapOptions {
  std::size_t resamples = 200;
  double level = 0.95;
  std::uint64_t seed = 0;
};

struct Interval {
  double low = 0;
  double high = 0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

// A statistic returns nullopt (or throws perfpower::Error) when undefined on
// a resample.
using Statistic = std::function<std::optional<double>(EventSpan)>;

// Percentile interval from resamples drawn with replacement separately in
// each (engine, group) stratum. Resample r depends only on (seed, r).
// Undefined resamples are skipped; more than 10% skipped raises
// UnstableStatistic.
Interval bootstrap_ci(EventSpan events, const Statistic& statistic,
                      const BootstrapOptions& options);

struct GapEstimate {
  int position = 1;
  ArrangementId ref = ArrangementId::a0;
  ArrangementId alt = ArrangementId::a1;
  double ctr_ref = 0;
  double ctr_alt = 0;
  double gap = 0;
  double ci_low = 0;
  double ci_high = 0;
  std::size_t n_ref = 0;
  std::size_t n_alt = 0;
};

// gap = CTR^i(alt) - CTR^i(ref) with a bootstrap interval. The interval is
// widened to contain the point estimate if the percentile bounds miss it.
GapEstimate gap_hat(EventSpan events, ArrangementId alt, ArrangementId ref, int i,
                    const BootstrapOptions& options = {});
GapEstimate gap_hat(std::span<const ClickEvent> events, ArrangementId alt, ArrangementId ref,
                    int i, const BootstrapOptions& options = {});

enum class Direction { Loss, Gain };
std::string_view to_string(Direction direction);

struct DistortionEstimate {
  GapEstimate gap;
  double beta = 0;  // |gap| / ctr_ref
  Direction direction = Direction::Gain;
};

// Throws UndefinedDistortion when the reference share is zero.
DistortionEstimate distortion_from(const GapEstimate& gap);
DistortionEstimate distortion_hat(EventSpan events, ArrangementId alt, ArrangementId ref, int i,
                                  const BootstrapOptions& options = {});
DistortionEstimate distortion_hat(std::span<const ClickEvent> events, ArrangementId alt,
                                  ArrangementId ref, int i, const BootstrapOptions& options = {});

// Largest |gap| among gaps of c_1 against a0. Throws InvalidArgument for an
// empty list or a gap with another reference or position.
double pp_lower_bound(std::span<const GapEstimate> gaps);

// Share of incoming traffic redirectable through the platform: the product
// of the mediated share, the share at affected positions and the distortion.
double compose_power(double mediated_share, double position_share, double beta);

struct NamedFilter {
  std::string name;
  std::function<bool(const ClickEvent&)> predicate;
};

// Built-in filters: "adsOrBoxPresent", "ssrBetweenTopTwo", "adsPresent",
// "boxPresent". Throws InvalidArgument for any other name.
NamedFilter named_filter(std::string_view name);

struct Partition {
  std::vector<ClickEvent> matching;
  std::vector<ClickEvent> rest;
};

Partition split_by(std::span<const ClickEvent> events, const NamedFilter& filter);

struct BinEstimate {
  std::size_t bin = 0;
  std::uint64_t key_low = 0;
  std::uint64_t key_high = 0;
  std::size_t n_events = 0;
  std::optional<DistortionEstimate> estimate;
  std::string note;  // why estimate is missing
};

struct BinnedEstimates {
  std::vector<BinEstimate> bins;
  std::size_t excluded = 0;  // events without candidateCount
};

// Equal-frequency bins of candidateCount over events of the two groups, with
// the distortion of c_i per bin. Requires candidateCount on at least 90% of
// those events and n_bins no larger than the number of distinct counts;
// otherwise InvalidArgument.
BinnedEstimates percentile_bins(std::span<const ClickEvent> events, std::size_t n_bins,
                                const BootstrapOptions& options = {},
                                ArrangementId alt = ArrangementId::a1,
                                ArrangementId ref = ArrangementId::a0, int i = 1);

}  // namespace perfpower
