#include "perfpower/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "perfpower/errors.hpp"
#include "perfpower/random.hpp"

namespace perfpower {

namespace {

double percentile(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void check_rank(int i) {
  if (i < 1) throw InvalidArgument(fmt::format("rank {} must be >= 1", i));
}

}  // namespace

EventRefs refs(std::span<const ClickEvent> events) {
  EventRefs out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(&e);
  return out;
}

std::vector<ClickEvent> filter_engine(std::span<const ClickEvent> events, Engine engine) {
  std::vector<ClickEvent> out;
  std::copy_if(events.begin(), events.end(), std::back_inserter(out),
               [&](const ClickEvent& e) { return e.engine == engine; });
  return out;
}

CtrEstimate ctr_hat(EventSpan events, ArrangementId group, int i) {
  check_rank(i);
  CtrEstimate est;
  for (const ClickEvent* e : events) {
    if (e->group != group) continue;
    ++est.total;
    if (e->element_kind == ElementKind::GenericResult && e->original_rank == i) ++est.hits;
  }
  if (est.total == 0) throw EmptyGroup(fmt::format("no events in group {}", to_string(group)));
  est.value = static_cast<double>(est.hits) / static_cast<double>(est.total);
  return est;
}

CtrEstimate ctr_hat(std::span<const ClickEvent> events, ArrangementId group, int i) {
  const auto r = refs(events);
  return ctr_hat(EventSpan(r), group, i);
}

std::vector<std::pair<std::string, double>> click_shares(std::span<const ClickEvent> events,
                                                         ArrangementId group) {
  std::map<int, std::size_t> by_rank;
  std::map<std::string_view, std::size_t> by_kind;
  std::size_t total = 0;
  std::size_t unranked = 0;
  for (const auto& e : events) {
    if (e.group != group) continue;
    ++total;
    if (e.element_kind == ElementKind::GenericResult) {
      if (e.original_rank) {
        ++by_rank[*e.original_rank];
      } else {
        ++unranked;
      }
    } else {
      ++by_kind[to_string(e.element_kind)];
    }
  }
  if (total == 0) throw EmptyGroup(fmt::format("no events in group {}", to_string(group)));

  const auto n = static_cast<double>(total);
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [rank, count] : by_rank) {
    out.emplace_back(fmt::format("c{}", rank), static_cast<double>(count) / n);
  }
  out.emplace_back("unranked", static_cast<double>(unranked) / n);
  for (auto kind : {ElementKind::Ad, ElementKind::ShoppingBox, ElementKind::SpecializedResult,
                    ElementKind::Other}) {
    out.emplace_back(std::string(to_string(kind)),
                     static_cast<double>(by_kind[to_string(kind)]) / n);
  }
  return out;
}

Interval bootstrap_ci(EventSpan events, const Statistic& statistic,
                      const BootstrapOptions& options) {
  if (options.resamples == 0) throw InvalidArgument("bootstrap needs at least one resample");
  if (!(options.level > 0 && options.level < 1)) {
    throw InvalidArgument("bootstrap level must be in (0, 1)");
  }

  std::map<std::pair<Engine, ArrangementId>, EventRefs> strata;
  for (const ClickEvent* e : events) strata[{e->engine, e->group}].push_back(e);

  std::vector<double> values;
  values.reserve(options.resamples);
  Interval out;
  EventRefs sample;
  sample.reserve(events.size());
  for (std::size_t r = 0; r < options.resamples; ++r) {
    Rng rng(options.seed, r);
    sample.clear();
    for (const auto& [key, members] : strata) {
      for (std::size_t k = 0; k < members.size(); ++k) {
        sample.push_back(members[rng.below(members.size())]);
      }
    }
    std::optional<double> v;
    try {
      v = statistic(EventSpan(sample));
    } catch (const Error&) {
      v.reset();
    }
    if (v && std::isfinite(*v)) {
      values.push_back(*v);
    } else {
      ++out.skipped;
    }
  }
  out.used = values.size();
  if (values.empty() || out.skipped * 10 > options.resamples) {
    throw UnstableStatistic(fmt::format("statistic undefined on {} of {} resamples", out.skipped,
                                        options.resamples));
  }
  std::sort(values.begin(), values.end());
  const double alpha = 1.0 - options.level;
  out.low = percentile(values, alpha / 2);
  out.high = percentile(values, 1.0 - alpha / 2);
  return out;
}

GapEstimate gap_hat(EventSpan events, ArrangementId alt, ArrangementId ref, int i,
                    const BootstrapOptions& options) {
  const auto c_ref = ctr_hat(events, ref, i);
  const auto c_alt = ctr_hat(events, alt, i);

  GapEstimate g;
  g.position = i;
  g.ref = ref;
  g.alt = alt;
  g.ctr_ref = c_ref.value;
  g.ctr_alt = c_alt.value;
  g.gap = c_alt.value - c_ref.value;
  g.n_ref = c_ref.total;
  g.n_alt = c_alt.total;

  // Only the two compared groups matter; resampling others is wasted work.
  EventRefs pair;
  for (const ClickEvent* e : events) {
    if (e->group == ref || e->group == alt) pair.push_back(e);
  }
  const auto ci = bootstrap_ci(
      pair,
      [&](EventSpan sample) -> std::optional<double> {
        return ctr_hat(sample, alt, i).value - ctr_hat(sample, ref, i).value;
      },
      options);
  g.ci_low = std::min(ci.low, g.gap);
  g.ci_high = std::max(ci.high, g.gap);
  return g;
}

GapEstimate gap_hat(std::span<const ClickEvent> events, ArrangementId alt, ArrangementId ref,
                    int i, const BootstrapOptions& options) {
  const auto r = refs(events);
  return gap_hat(EventSpan(r), alt, ref, i, options);
}

std::string_view to_string(Direction direction) {
  return direction == Direction::Loss ? "loss" : "gain";
}

DistortionEstimate distortion_from(const GapEstimate& gap) {
  if (!(gap.ctr_ref > 0)) {
    throw UndefinedDistortion(fmt::format("c{} has no clicks under {}", gap.position,
                                          to_string(gap.ref)));
  }
  return {gap, std::abs(gap.gap) / gap.ctr_ref, gap.gap < 0 ? Direction::Loss : Direction::Gain};
}

DistortionEstimate distortion_hat(EventSpan events, ArrangementId alt, ArrangementId ref, int i,
                                  const BootstrapOptions& options) {
  // Check the reference share first so an undefined distortion is reported
  // as such rather than through the bootstrap.
  if (ctr_hat(events, ref, i).hits == 0) {
    throw UndefinedDistortion(fmt::format("c{} has no clicks under {}", i, to_string(ref)));
  }
  return distortion_from(gap_hat(events, alt, ref, i, options));
}

DistortionEstimate distortion_hat(std::span<const ClickEvent> events, ArrangementId alt,
                                  ArrangementId ref, int i, const BootstrapOptions& options) {
  const auto r = refs(events);
  return distortion_hat(EventSpan(r), alt, ref, i, options);
}

double pp_lower_bound(std::span<const GapEstimate> gaps) {
  if (gaps.empty()) throw InvalidArgument("pp_lower_bound needs at least one gap");
  double best = 0;
  for (const auto& g : gaps) {
    if (g.ref != ArrangementId::a0 || g.position != 1) {
      throw InvalidArgument("pp_lower_bound takes gaps of c1 against a0 only");
    }
    best = std::max(best, std::abs(g.gap));
  }
  return best;
}

double compose_power(double mediated_share, double position_share, double beta) {
  auto in_unit = [](double x) { return x >= 0 && x <= 1; };
  if (!in_unit(mediated_share) || !in_unit(position_share)) {
    throw InvalidArgument("traffic shares must lie in [0, 1]");
  }
  if (!(beta >= 0) || !std::isfinite(beta)) throw InvalidArgument("beta must be >= 0");
  const double power = mediated_share * position_share * beta;
  if (power > 1) throw InvalidArgument("composed power exceeds 1");
  return power;
}

NamedFilter named_filter(std::string_view name) {
  if (name == "adsOrBoxPresent") {
    return {std::string(name), [](const ClickEvent& e) { return e.ads_present || e.box_present; }};
  }
  if (name == "ssrBetweenTopTwo") {
    return {std::string(name),
            [](const ClickEvent& e) { return ssr_between_top_two(e.ssr_positions, e.num_results); }};
  }
  if (name == "adsPresent") {
    return {std::string(name), [](const ClickEvent& e) { return e.ads_present; }};
  }
  if (name == "boxPresent") {
    return {std::string(name), [](const ClickEvent& e) { return e.box_present; }};
  }
  throw InvalidArgument(fmt::format("unknown filter '{}'", name));
}

Partition split_by(std::span<const ClickEvent> events, const NamedFilter& filter) {
  if (!filter.predicate) throw InvalidArgument(fmt::format("filter '{}' has no predicate", filter.name));
  Partition p;
  for (const auto& e : events) (filter.predicate(e) ? p.matching : p.rest).push_back(e);
  return p;
}

BinnedEstimates percentile_bins(std::span<const ClickEvent> events, std::size_t n_bins,
                                const BootstrapOptions& options, ArrangementId alt,
                                ArrangementId ref, int i) {
  if (n_bins == 0) throw InvalidArgument("need at least one bin");
  BinnedEstimates out;
  std::vector<const ClickEvent*> keyed;
  std::size_t considered = 0;
  for (const auto& e : events) {
    if (e.group != alt && e.group != ref) continue;
    ++considered;
    if (e.candidate_count) {
      keyed.push_back(&e);
    } else {
      ++out.excluded;
    }
  }
  if (out.excluded * 10 > considered) {
    throw InvalidArgument(fmt::format("candidateCount missing on {} of {} events", out.excluded,
                                      considered));
  }
  std::set<std::uint64_t> distinct;
  for (const auto* e : keyed) distinct.insert(*e->candidate_count);
  if (n_bins > distinct.size()) {
    throw InvalidArgument(fmt::format("{} bins requested but only {} distinct candidate counts",
                                      n_bins, distinct.size()));
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const ClickEvent* a, const ClickEvent* b) {
    return *a->candidate_count < *b->candidate_count;
  });

  const std::size_t n = keyed.size();
  for (std::size_t b = 0; b < n_bins; ++b) {
    const std::size_t begin = b * n / n_bins;
    const std::size_t end = (b + 1) * n / n_bins;
    BinEstimate bin;
    bin.bin = b;
    bin.n_events = end - begin;
    if (bin.n_events > 0) {
      bin.key_low = *keyed[begin]->candidate_count;
      bin.key_high = *keyed[end - 1]->candidate_count;
      const EventRefs members(keyed.begin() + static_cast<std::ptrdiff_t>(begin),
                              keyed.begin() + static_cast<std::ptrdiff_t>(end));
      try {
        bin.estimate = distortion_hat(EventSpan(members), alt, ref, i, options);
      } catch (const Error& ex) {
        bin.note = fmt::format("insufficient data: {}", ex.what());
      }
    } else {
      bin.note = "insufficient data: empty bin";
    }
    out.bins.push_back(std::move(bin));
  }
  return out;
}

}  // namespace perfpower
