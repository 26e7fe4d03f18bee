#pragma once

// Assembles every estimate of an analysis run into one report:
//   - click shares per group and target (all pages, pages with Ads, pages
//     with a Shopping box)
//   - gaps and distortions of swaps a1-a3 against a0 for c1..cK
//   - box conducts on pages that show a box (add Box: a6 -> a0, add
//     Ads/Box: a4 -> a0, and the same combined with swap 1-2: -> a1)
//   - subgroup splits of the a1 effect on c1
//   - the a1 distortion of c1 across candidate-count percentile bins
//   - the performative-power lower bound per engine
// Estimates that cannot be computed carry an "insufficient data" note.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perfpower/estimators.hpp"
#include "perfpower/event_io.hpp"

namespace perfpower {

struct ReportConfig {
  BootstrapOptions bootstrap;
  std::size_t candidate_bins = 10;
  int max_position = 6;
};

struct ShareRow {
  Engine engine = Engine::Google;
  std::string subset;
  ArrangementId group = ArrangementId::a0;
  std::size_t n = 0;
  std::string target;
  double share = 0;
};

struct EstimateRow {
  Engine engine = Engine::Google;
  std::string subset;
  std::string analysis;
  int position = 1;
  ArrangementId ref = ArrangementId::a0;
  ArrangementId alt = ArrangementId::a1;
  std::optional<GapEstimate> gap;
  std::optional<double> beta;
  std::string note;
};

struct BinRow {
  Engine engine = Engine::Google;
  BinEstimate bin;
};

struct EngineSummary {
  Engine engine = Engine::Google;
  std::map<ArrangementId, std::size_t> group_counts;
  std::optional<double> pp_lower_bound;
  std::size_t bins_excluded = 0;
  std::string bins_note;
};

struct EstimateReport {
  std::size_t n_events = 0;
  ReportConfig config;
  std::vector<EngineSummary> engines;
  std::vector<ShareRow> shares;
  std::vector<EstimateRow> estimates;
  std::vector<BinRow> bins;
};

EstimateReport build_report(std::span<const ClickEvent> events, const ReportConfig& config);

OrderedJson to_json(const EstimateReport& report);

// engine,subset,analysis,position,aRef,aAlt,n,ctrRef,ctrAlt,gap,ciLow,ciHigh,beta,note
std::string estimates_csv(const EstimateReport& report);
// engine,subset,group,n,target,share
std::string shares_csv(const EstimateReport& report);
// engine,bin,keyLow,keyHigh,n,ctrRef,ctrAlt,gap,ciLow,ciHigh,beta,note
std::string bins_csv(const EstimateReport& report);

// Writes report.json, estimates.csv, click_shares.csv and candidate_bins.csv.
void write_report(const EstimateReport& report, const std::filesystem::path& dir);

}  // namespace perfpower
