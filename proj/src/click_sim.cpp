#include "perfpower/click_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "perfpower/arrangement.hpp"
#include "perfpower/errors.hpp"
#include "perfpower/random.hpp"

namespace perfpower {

namespace {

using RelevanceMap = std::map<std::string, double, std::less<>>;

double attractiveness(const ClickModelParams& params, const SerpElement& e,
                      const RelevanceMap& relevance) {
  switch (e.kind) {
    case ElementKind::GenericResult: {
      if (e.slot.column != Column::Main) return params.other_attractiveness;
      auto it = relevance.find(e.id);
      if (it == relevance.end()) {
        throw InvalidArgument(fmt::format("no relevance for generic result '{}'", e.id));
      }
      return it->second;
    }
    case ElementKind::Ad: return params.ad_attractiveness;
    case ElementKind::ShoppingBox: return params.box_attractiveness;
    case ElementKind::SpecializedResult: return params.specialized_attractiveness;
    case ElementKind::Other: return params.other_attractiveness;
  }
  return 0.0;
}

std::vector<double> click_weights(const ClickModelParams& params, const SerpSnapshot& snapshot,
                                  const RelevanceMap& relevance) {
  std::vector<double> w;
  w.reserve(snapshot.elements.size());
  for (const auto& e : snapshot.elements) {
    w.push_back(params.examination(e.slot, snapshot.candidate_count) *
                attractiveness(params, e, relevance));
  }
  return w;
}

// Conditional (given a click) probability of c_i, or 0 when the page has no c_i.
double ctr_or_zero(const ClickModelParams& params, const SyntheticQuery& query,
                   ArrangementId arrangement, int i) {
  if (count_generic(query.snapshot) < i) return 0.0;
  return true_ctr(params, query, arrangement, i);
}

void check_probability(double p, std::string_view name) {
  if (!(p >= 0 && p <= 1)) throw InvalidConfig(fmt::format("{} must be in [0, 1]", name));
}

void check_weight(double w, std::string_view name) {
  if (!(std::isfinite(w) && w >= 0)) throw InvalidConfig(fmt::format("{} must be >= 0", name));
}

// Click targets of one arranged page with their cumulative conditional law.
struct PageOutcomes {
  struct Target {
    ElementKind kind;
    std::optional<int> original_rank;
    std::optional<int> displayed_rank;
  };
  std::vector<Target> targets;
  std::vector<double> cumulative;
};

PageOutcomes build_outcomes(const ClickModelParams& params, const SyntheticQuery& query,
                            ArrangementId arrangement) {
  std::unordered_map<std::string_view, int> original_rank;
  const auto original = generic_results(query.snapshot);
  for (std::size_t r = 0; r < original.size(); ++r) {
    original_rank.emplace(original[r]->id, static_cast<int>(r + 1));
  }

  const auto arranged = apply(arrangement, query.snapshot).snapshot;
  const auto weights = click_weights(params, arranged, query.relevance);
  std::unordered_map<std::string_view, int> displayed_rank;
  const auto shown = generic_results(arranged);
  for (std::size_t r = 0; r < shown.size(); ++r) {
    displayed_rank.emplace(shown[r]->id, static_cast<int>(r + 1));
  }

  PageOutcomes out;
  double total = 0;
  for (std::size_t k = 0; k < arranged.elements.size(); ++k) {
    if (weights[k] <= 0) continue;
    const auto& e = arranged.elements[k];
    PageOutcomes::Target t{e.kind, std::nullopt, std::nullopt};
    if (auto it = displayed_rank.find(e.id); it != displayed_rank.end()) {
      t.displayed_rank = it->second;
      t.original_rank = original_rank.at(e.id);
    }
    total += weights[k];
    out.targets.push_back(t);
    out.cumulative.push_back(total);
  }
  if (total <= 0) {
    throw DegenerateModel(fmt::format("query '{}' has no clickable element under {}",
                                      query.query_id, to_string(arrangement)));
  }
  return out;
}

}  // namespace

double ClickModelParams::examination(const Slot& slot,
                                     std::optional<std::uint64_t> candidate_count) const {
  const auto& column = slot.column == Column::Main ? main_examination : sidebar_examination;
  if (slot.index >= column.size()) return 0.0;
  double e = column[slot.index];
  if (slot.column == Column::Main && candidate_decay > 0 && candidate_count) {
    e *= std::exp(-candidate_decay * static_cast<double>(slot.index) *
                  std::log10(1.0 + static_cast<double>(*candidate_count)));
  }
  return e;
}

ClickModelParams ClickModelParams::defaults() {
  ClickModelParams p;
  for (int k = 0; k < 20; ++k) p.main_examination.push_back(std::pow(0.75, k));
  p.sidebar_examination = {0.3, 0.15, 0.075};
  p.ad_attractiveness = 0.4;
  p.box_attractiveness = 0.8;
  p.specialized_attractiveness = 0.3;
  p.other_attractiveness = 0.05;
  p.no_click_weight = 0.5;
  return p;
}

ClickModelParams ClickModelParams::from_config(const KvConfig& config) {
  auto p = defaults();
  if (auto v = config.get_doubles("click.examination.main")) p.main_examination = *v;
  if (config.get("click.examination.sidebar") == std::optional<std::string>("")) {
    p.sidebar_examination.clear();
  } else if (auto v = config.get_doubles("click.examination.sidebar")) {
    p.sidebar_examination = *v;
  }
  auto scalar = [&](std::string_view key, double& field) {
    if (auto v = config.get_double(fmt::format("click.{}", key))) field = *v;
    check_weight(field, key);
  };
  scalar("adAttractiveness", p.ad_attractiveness);
  scalar("boxAttractiveness", p.box_attractiveness);
  scalar("specializedAttractiveness", p.specialized_attractiveness);
  scalar("otherAttractiveness", p.other_attractiveness);
  scalar("noClickWeight", p.no_click_weight);
  scalar("candidateDecay", p.candidate_decay);
  for (double e : p.main_examination) check_weight(e, "click.examination.main");
  for (double e : p.sidebar_examination) check_weight(e, "click.examination.sidebar");
  return p;
}

void PopulationSpec::check() const {
  check_probability(bing_share, "population.bingShare");
  check_probability(ads_probability, "population.adsProbability");
  check_probability(bottom_ads_probability, "population.bottomAdsProbability");
  check_probability(box_probability, "population.boxProbability");
  check_probability(box_sidebar_probability, "population.boxSidebarProbability");
  check_probability(ssr_probability, "population.ssrProbability");
  check_probability(candidate_count_probability, "population.candidateCountProbability");
  if (min_results < 0 || max_results < min_results) {
    throw InvalidConfig("population results range must satisfy 0 <= min <= max");
  }
  if (max_top_ads < 1) throw InvalidConfig("population.maxTopAds must be >= 1");
  if (candidate_log10_max < candidate_log10_min || candidate_log10_min < 0 ||
      candidate_log10_max > 18) {
    throw InvalidConfig("population candidate count range must satisfy 0 <= min <= max <= 18");
  }
  check_weight(relevance_decay, "population.relevanceDecay");
  check_weight(relevance_noise, "population.relevanceNoise");
}

PopulationSpec PopulationSpec::from_config(const KvConfig& config) {
  PopulationSpec s;
  auto real = [&](std::string_view key, double& field) {
    if (auto v = config.get_double(fmt::format("population.{}", key))) field = *v;
  };
  auto integer = [&](std::string_view key, auto& field) {
    if (auto v = config.get_int(fmt::format("population.{}", key))) {
      if (*v < 0) throw InvalidConfig(fmt::format("population.{} must be >= 0", key));
      field = static_cast<std::remove_reference_t<decltype(field)>>(*v);
    }
  };
  integer("nQueries", s.n_queries);
  integer("seed", s.seed);
  real("bingShare", s.bing_share);
  integer("minResults", s.min_results);
  integer("maxResults", s.max_results);
  real("adsProbability", s.ads_probability);
  integer("maxTopAds", s.max_top_ads);
  real("bottomAdsProbability", s.bottom_ads_probability);
  real("boxProbability", s.box_probability);
  real("boxSidebarProbability", s.box_sidebar_probability);
  real("ssrProbability", s.ssr_probability);
  real("candidateCountProbability", s.candidate_count_probability);
  real("candidateLog10Min", s.candidate_log10_min);
  real("candidateLog10Max", s.candidate_log10_max);
  real("relevanceDecay", s.relevance_decay);
  real("relevanceNoise", s.relevance_noise);
  s.check();
  return s;
}

ClickDistribution click_distribution(const ClickModelParams& params, const SerpSnapshot& snapshot,
                                     const RelevanceMap& relevance) {
  ClickDistribution d;
  d.element_probs = click_weights(params, snapshot, relevance);
  const double total =
      std::accumulate(d.element_probs.begin(), d.element_probs.end(), 0.0) + params.no_click_weight;
  if (!(total > 0)) throw DegenerateModel("click model assigns zero weight to every outcome");
  for (auto& p : d.element_probs) p /= total;
  d.no_click = params.no_click_weight / total;
  return d;
}

double true_ctr(const ClickModelParams& params, const SyntheticQuery& query,
                ArrangementId arrangement, int i) {
  const auto original = generic_results(query.snapshot);
  if (i < 1 || i > static_cast<int>(original.size())) {
    throw InvalidArgument(fmt::format("rank {} outside 1..{}", i, original.size()));
  }
  const std::string& target = original[i - 1]->id;
  const auto arranged = apply(arrangement, query.snapshot).snapshot;
  const auto weights = click_weights(params, arranged, query.relevance);

  double clicks = 0;
  double on_target = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    clicks += weights[k];
    if (arranged.elements[k].id == target) on_target = weights[k];
  }
  if (!(clicks > 0)) {
    throw DegenerateModel(fmt::format("query '{}' has no clickable element", query.query_id));
  }
  return on_target / clicks;
}

double true_gap(const ClickModelParams& params, std::span<const SyntheticQuery> population,
                ArrangementId alt, ArrangementId ref, int i) {
  if (population.empty()) throw InvalidArgument("population is empty");
  double sum = 0;
  for (const auto& q : population) {
    sum += ctr_or_zero(params, q, alt, i) - ctr_or_zero(params, q, ref, i);
  }
  return sum / static_cast<double>(population.size());
}

double mean_abs_ctr_difference(const ClickModelParams& params,
                               std::span<const SyntheticQuery> population, ArrangementId alt) {
  if (population.empty()) throw InvalidArgument("population is empty");
  double sum = 0;
  for (const auto& q : population) {
    sum += std::abs(ctr_or_zero(params, q, alt, 1) - ctr_or_zero(params, q, ArrangementId::a0, 1));
  }
  return sum / static_cast<double>(population.size());
}

double expected_outcome_change(const ClickModelParams& params,
                               std::span<const SyntheticQuery> population, ArrangementId alt,
                               Coupling coupling) {
  if (population.empty()) throw InvalidArgument("population is empty");
  double sum = 0;
  for (const auto& q : population) {
    const double pa = ctr_or_zero(params, q, alt, 1);
    const double p0 = ctr_or_zero(params, q, ArrangementId::a0, 1);
    // Shared uniform draw with nested intervals: the indicators differ only
    // on the gap between the two probabilities.
    double change = std::abs(p0 - pa);
    if (coupling == Coupling::Independent) {
      // p0(1-pa) + pa(1-p0), written as |p0-pa| plus a nonnegative term.
      change += 2.0 * std::min(p0, pa) * (1.0 - std::max(p0, pa));
    }
    sum += change;
  }
  return sum / static_cast<double>(population.size());
}

double true_pp(const ClickModelParams& params, std::span<const SyntheticQuery> population,
               std::span<const ArrangementId> arrangements, Coupling coupling) {
  if (arrangements.empty()) throw InvalidArgument("no arrangements given");
  double best = 0;
  for (auto a : arrangements) {
    best = std::max(best, expected_outcome_change(params, population, a, coupling));
  }
  return best;
}

std::vector<SyntheticQuery> generate_population(const PopulationSpec& spec) {
  spec.check();
  std::vector<SyntheticQuery> out;
  out.reserve(spec.n_queries);
  for (std::size_t q = 0; q < spec.n_queries; ++q) {
    Rng rng(spec.seed, q);
    SyntheticQuery query;
    query.query_id = fmt::format("query-{}", q);
    auto& page = query.snapshot;
    page.engine = rng.bernoulli(spec.bing_share) ? Engine::Bing : Engine::Google;

    std::size_t main = 0;
    auto add = [&](std::string id, ElementKind kind, Column column, std::size_t index) {
      page.elements.push_back({std::move(id), kind, {column, index}});
    };

    if (rng.bernoulli(spec.ads_probability)) {
      const auto n_ads = 1 + rng.below(static_cast<std::uint64_t>(spec.max_top_ads));
      for (std::uint64_t a = 0; a < n_ads; ++a) {
        add(fmt::format("q{}-ad{}", q, a + 1), ElementKind::Ad, Column::Main, main++);
      }
    }
    if (rng.bernoulli(spec.box_probability)) {
      if (rng.bernoulli(spec.box_sidebar_probability)) {
        add(fmt::format("q{}-box", q), ElementKind::ShoppingBox, Column::Sidebar, 0);
      } else {
        add(fmt::format("q{}-box", q), ElementKind::ShoppingBox, Column::Main, main++);
      }
    }

    const int span = spec.max_results - spec.min_results + 1;
    const int n_results = spec.min_results + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));
    int n_ssr = 0;
    for (int k = 1; k <= n_results; ++k) {
      auto id = fmt::format("q{}-g{}", q, k);
      query.relevance[id] =
          std::exp(-spec.relevance_decay * (k - 1) + spec.relevance_noise * rng.normal());
      add(std::move(id), ElementKind::GenericResult, Column::Main, main++);
      if (k < n_results && rng.bernoulli(spec.ssr_probability)) {
        add(fmt::format("q{}-ssr{}", q, ++n_ssr), ElementKind::SpecializedResult, Column::Main,
            main++);
      }
    }
    if (rng.bernoulli(spec.bottom_ads_probability)) {
      add(fmt::format("q{}-adb", q), ElementKind::Ad, Column::Main, main++);
    }
    if (rng.bernoulli(spec.candidate_count_probability)) {
      const double exponent = spec.candidate_log10_min +
                              rng.uniform() * (spec.candidate_log10_max - spec.candidate_log10_min);
      page.candidate_count = static_cast<std::uint64_t>(std::llround(std::pow(10.0, exponent)));
    }
    out.push_back(std::move(query));
  }
  return out;
}

SamplingPlan SamplingPlan::from_config(const KvConfig& config) {
  SamplingPlan plan;
  plan.google = GroupWeights::from_config(config, Engine::Google);
  plan.bing = GroupWeights::from_config(config, Engine::Bing);
  plan.salt = config.get_or("experiment.salt", plan.salt);
  if (auto v = config.get_int("simulation.users")) {
    if (*v < 1) throw InvalidConfig("simulation.users must be >= 1");
    plan.n_users = static_cast<std::size_t>(*v);
  }
  if (auto v = config.get_int("simulation.startMs")) plan.start_ms = *v;
  if (auto v = config.get_int("simulation.stepMs")) plan.step_ms = *v;
  return plan;
}

std::vector<ClickEvent> sample_events(const ClickModelParams& params,
                                      std::span<const SyntheticQuery> population,
                                      const SamplingPlan& plan, std::size_t n_events,
                                      std::uint64_t seed) {
  std::vector<ClickEvent> events;
  if (n_events == 0) return events;
  if (population.empty()) throw InvalidArgument("population is empty");
  if (plan.n_users == 0) throw InvalidConfig("sampling plan needs at least one user");

  constexpr std::size_t kGroups = std::size(kAllArrangements);
  std::vector<std::optional<PageOutcomes>> cache(population.size() * kGroups);
  std::vector<std::string> normalized(population.size());
  std::vector<PageSummary> summaries(population.size());
  for (std::size_t q = 0; q < population.size(); ++q) {
    normalized[q] = normalize_query(population[q].query_id);
    summaries[q] = summarize(population[q].snapshot);
  }

  events.reserve(n_events);
  for (std::size_t k = 0; k < n_events; ++k) {
    Rng rng(seed, k);
    const auto q = static_cast<std::size_t>(rng.below(population.size()));
    const auto user = rng.below(plan.n_users);
    const SyntheticQuery& query = population[q];

    ClickEvent e;
    e.event_id = fmt::format("sim-{:016x}-{}", seed, k);
    e.user_id = fmt::format("user-{:05d}", user);
    e.timestamp_ms = plan.start_ms + static_cast<std::int64_t>(k) * plan.step_ms;
    e.engine = query.engine();
    const auto& weights = e.engine == Engine::Google ? plan.google : plan.bing;
    e.group = assign(AssignmentKey{e.user_id, normalized[q], plan.salt}, e.engine, weights);

    auto& outcomes = cache[q * kGroups + static_cast<std::size_t>(e.group)];
    if (!outcomes) outcomes = build_outcomes(params, query, e.group);
    const double u = rng.uniform() * outcomes->cumulative.back();
    auto it = std::upper_bound(outcomes->cumulative.begin(), outcomes->cumulative.end(), u);
    const auto idx = std::min(static_cast<std::size_t>(it - outcomes->cumulative.begin()),
                              outcomes->targets.size() - 1);
    const auto& target = outcomes->targets[idx];

    e.element_kind = target.kind;
    e.original_rank = target.original_rank;
    e.displayed_rank = target.displayed_rank;
    e.page_index = query.snapshot.page_index;
    const auto& s = summaries[q];
    e.num_results = s.num_results;
    e.ads_present = s.ads_present;
    e.box_present = s.box_present;
    e.box_column = s.box_column;
    e.ssr_positions = s.ssr_positions;
    e.candidate_count = query.snapshot.candidate_count;
    events.push_back(std::move(e));
  }
  return events;
}

}  // namespace perfpower
