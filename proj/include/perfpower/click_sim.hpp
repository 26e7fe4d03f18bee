#pragma once

// Synthetic query population and position-based click model. The model gives
// exact click probabilities for any page under any arrangement, which makes
// it the ground truth for the estimators and the source of synthetic events.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perfpower/assignment.hpp"
#include "perfpower/kv_config.hpp"
#include "perfpower/serp.hpp"

namespace perfpower {

// Click weight of an element = examination(slot) * attractiveness(element).
// Attractiveness is the query-specific relevance for generic results and a
// per-kind constant otherwise.
struct ClickModelParams {
  // Examination weight by slot index; slots past the end have weight 0.
  std::vector<double> main_examination;
  std::vector<double> sidebar_examination;
  double ad_attractiveness = 0;
  double box_attractiveness = 0;
  double specialized_attractiveness = 0;
  double other_attractiveness = 0;
  double no_click_weight = 0;
  // Steepens Main-column decay on pages with many candidates:
  // e(k) *= exp(-candidate_decay * k * log10(1 + candidateCount)).
  double candidate_decay = 0;

  double examination(const Slot& slot, std::optional<std::uint64_t> candidate_count) const;

  // Keys under `click.`; unset keys keep the defaults of `defaults()`.
  static ClickModelParams from_config(const KvConfig& config);
  static ClickModelParams defaults();
};

struct SyntheticQuery {
  std::string query_id;
  SerpSnapshot snapshot;  // the unmodified (a0) page
  std::map<std::string, double, std::less<>> relevance;

  Engine engine() const { return snapshot.engine; }
};

struct PopulationSpec {
  std::size_t n_queries = 1000;
  std::uint64_t seed = 1;
  double bing_share = 0;
  int min_results = 3;
  int max_results = 10;
  double ads_probability = 0.25;
  int max_top_ads = 3;
  double bottom_ads_probability = 0.1;
  double box_probability = 0.032;
  double box_sidebar_probability = 0.5;
  // Chance of a specialized result after each generic result but the last.
  double ssr_probability = 0.1;
  double candidate_count_probability = 0.95;
  double candidate_log10_min = 3;
  double candidate_log10_max = 9;
  // relevance(rank k) = exp(-relevance_decay * (k - 1) + relevance_noise * N(0, 1))
  double relevance_decay = 0.3;
  double relevance_noise = 0.5;

  // Throws InvalidConfig for probabilities outside [0, 1] or bad ranges.
  void check() const;
  static PopulationSpec from_config(const KvConfig& config);
};

// Exact click law of a page, aligned with snapshot.elements.
struct ClickDistribution {
  std::vector<double> element_probs;
  double no_click = 0;
};

// Throws DegenerateModel when every weight (including no-click) is zero and
// InvalidArgument when a generic result has no relevance.
ClickDistribution click_distribution(const ClickModelParams& params, const SerpSnapshot& snapshot,
                                     const std::map<std::string, double, std::less<>>& relevance);

// Probability that a click lands on c_i (the i-th generic result of the a0
// page) once the arrangement is applied, given that a click happens.
// Throws InvalidArgument when the page has fewer than i generic results.
double true_ctr(const ClickModelParams& params, const SyntheticQuery& query,
                ArrangementId arrangement, int i);

// Mean over queries of true_ctr(alt) - true_ctr(ref). Queries without c_i
// contribute zero to both sides. Throws InvalidArgument on an empty population.
double true_gap(const ClickModelParams& params, std::span<const SyntheticQuery> population,
                ArrangementId alt, ArrangementId ref, int i);

// Joint law of the potential outcomes z_a0(q), z_a(q) = 1{click on c_1}.
enum class Coupling { Independent, CommonRandomness };

// Mean over queries of |p_a0(q) - p_a(q)| for outcome c_1.
double mean_abs_ctr_difference(const ClickModelParams& params,
                               std::span<const SyntheticQuery> population, ArrangementId alt);

// Mean over queries of E|z_a0(q) - z_a(q)| for outcome c_1 under the coupling.
double expected_outcome_change(const ClickModelParams& params,
                               std::span<const SyntheticQuery> population, ArrangementId alt,
                               Coupling coupling);

// Performative power: supremum of expected_outcome_change over arrangements.
double true_pp(const ClickModelParams& params, std::span<const SyntheticQuery> population,
               std::span<const ArrangementId> arrangements, Coupling coupling);

std::vector<SyntheticQuery> generate_population(const PopulationSpec& spec);

// How synthetic traffic is routed through assignment.
struct SamplingPlan {
  GroupWeights google = GroupWeights::uniform(Engine::Google);
  GroupWeights bing = GroupWeights::uniform(Engine::Bing);
  std::string salt = "sim";
  std::size_t n_users = 10000;
  std::int64_t start_ms = 1693526400000;  // 2023-09-01T00:00:00Z
  std::int64_t step_ms = 60000;

  static SamplingPlan from_config(const KvConfig& config);
};

// Draws nEvents clicks: query uniformly at random, user uniformly from the
// pool, group via assign(), click from the conditional click law of the
// arranged page. Event k depends only on (seed, k).
std::vector<ClickEvent> sample_events(const ClickModelParams& params,
                                      std::span<const SyntheticQuery> population,
                                      const SamplingPlan& plan, std::size_t n_events,
                                      std::uint64_t seed);

}  // namespace perfpower
