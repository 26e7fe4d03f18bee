#include "perfpower/report.hpp"

#include <fstream>

#include <fmt/format.h>

#include "perfpower/errors.hpp"

namespace perfpower {

namespace {

struct Conduct {
  std::string_view label;
  ArrangementId ref;
  ArrangementId alt;
};

// Box conducts read as "what the platform's arrangement does relative to a
// page without the element".
constexpr Conduct kBoxConducts[] = {
    {"add Box", ArrangementId::a6, ArrangementId::a0},
    {"add Ads/Box", ArrangementId::a4, ArrangementId::a0},
    {"swap+add Box", ArrangementId::a6, ArrangementId::a1},
    {"swap+add Ads/Box", ArrangementId::a4, ArrangementId::a1},
};

constexpr std::string_view kSplitFilters[] = {"adsOrBoxPresent", "ssrBetweenTopTwo"};

EstimateRow estimate(std::span<const ClickEvent> events, Engine engine, std::string subset,
                     std::string analysis, ArrangementId alt, ArrangementId ref, int position,
                     const BootstrapOptions& options) {
  EstimateRow row{engine, std::move(subset), std::move(analysis), position, ref, alt, {}, {}, {}};
  try {
    const auto d = distortion_hat(events, alt, ref, position, options);
    row.gap = d.gap;
    row.beta = d.beta;
  } catch (const UndefinedDistortion&) {
    try {
      row.gap = gap_hat(events, alt, ref, position, options);
      row.note = "distortion undefined: no reference clicks";
    } catch (const Error& ex) {
      row.note = fmt::format("insufficient data: {}", ex.what());
    }
  } catch (const Error& ex) {
    row.note = fmt::format("insufficient data: {}", ex.what());
  }
  return row;
}

std::vector<ClickEvent> subset_of(std::span<const ClickEvent> events, std::string_view name) {
  if (name == "all") return {events.begin(), events.end()};
  return split_by(events, named_filter(name)).matching;
}

std::string number(double v) { return fmt::format("{:.6f}", v); }

std::string number(const std::optional<double>& v) { return v ? number(*v) : std::string(); }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

OrderedJson gap_json(const GapEstimate& g) {
  return OrderedJson{{"ctrRef", g.ctr_ref}, {"ctrAlt", g.ctr_alt}, {"gap", g.gap},
                     {"ciLow", g.ci_low},   {"ciHigh", g.ci_high}, {"nRef", g.n_ref},
                     {"nAlt", g.n_alt}};
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  out.flush();
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace

EstimateReport build_report(std::span<const ClickEvent> events, const ReportConfig& config) {
  if (config.max_position < 1) throw InvalidConfig("report max position must be >= 1");
  EstimateReport report;
  report.n_events = events.size();
  report.config = config;
  const auto& boot = config.bootstrap;

  for (auto engine : {Engine::Google, Engine::Bing}) {
    const auto evs = filter_engine(events, engine);
    EngineSummary summary;
    summary.engine = engine;
    for (auto g : kAllArrangements) {
      if (engine_supports(engine, g)) summary.group_counts[g] = 0;
    }
    for (const auto& e : evs) ++summary.group_counts[e.group];
    if (evs.empty()) {
      report.engines.push_back(std::move(summary));
      continue;
    }

    for (std::string_view subset : {"all", "adsPresent", "boxPresent"}) {
      const auto part = subset_of(evs, subset);
      for (auto g : kAllArrangements) {
        if (!engine_supports(engine, g)) continue;
        std::size_t n = 0;
        for (const auto& e : part) n += e.group == g ? 1 : 0;
        if (n == 0) continue;
        for (auto& [target, share] : click_shares(part, g)) {
          report.shares.push_back({engine, std::string(subset), g, n, std::move(target), share});
        }
      }
    }

    std::vector<GapEstimate> first_position;
    const std::vector<ArrangementId> swaps =
        engine == Engine::Google
            ? std::vector<ArrangementId>{ArrangementId::a1, ArrangementId::a2, ArrangementId::a3}
            : std::vector<ArrangementId>{ArrangementId::a1};
    for (auto alt : swaps) {
      for (int pos = 1; pos <= config.max_position; ++pos) {
        auto row = estimate(evs, engine, "all", "swap", alt, ArrangementId::a0, pos, boot);
        if (pos == 1 && row.gap) first_position.push_back(*row.gap);
        report.estimates.push_back(std::move(row));
      }
    }
    if (!first_position.empty()) summary.pp_lower_bound = pp_lower_bound(first_position);

    if (engine == Engine::Google) {
      const auto with_box = subset_of(evs, "boxPresent");
      for (const auto& c : kBoxConducts) {
        for (int pos = 1; pos <= std::min(3, config.max_position); ++pos) {
          report.estimates.push_back(
              estimate(with_box, engine, "boxPresent", std::string(c.label), c.alt, c.ref, pos, boot));
        }
      }
    }

    for (auto name : kSplitFilters) {
      const auto parts = split_by(evs, named_filter(name));
      report.estimates.push_back(estimate(parts.matching, engine, std::string(name), "split",
                                          ArrangementId::a1, ArrangementId::a0, 1, boot));
      report.estimates.push_back(estimate(parts.rest, engine, fmt::format("not {}", name), "split",
                                          ArrangementId::a1, ArrangementId::a0, 1, boot));
    }

    try {
      auto binned = percentile_bins(evs, config.candidate_bins, boot);
      summary.bins_excluded = binned.excluded;
      for (auto& b : binned.bins) report.bins.push_back({engine, std::move(b)});
    } catch (const Error& ex) {
      summary.bins_note = fmt::format("insufficient data: {}", ex.what());
    }
    report.engines.push_back(std::move(summary));
  }
  return report;
}

OrderedJson to_json(const EstimateReport& report) {
  OrderedJson j;
  j["nEvents"] = report.n_events;
  j["metadata"] = {{"seed", report.config.bootstrap.seed},
                   {"resamples", report.config.bootstrap.resamples},
                   {"level", report.config.bootstrap.level},
                   {"candidateBins", report.config.candidate_bins},
                   {"maxPosition", report.config.max_position}};

  auto& engines = j["engines"] = OrderedJson::object();
  for (const auto& s : report.engines) {
    OrderedJson ej;
    auto& counts = ej["groupCounts"] = OrderedJson::object();
    for (const auto& [g, n] : s.group_counts) counts[std::string(to_string(g))] = n;
    ej["ppLowerBound"] = s.pp_lower_bound ? OrderedJson(*s.pp_lower_bound) : OrderedJson(nullptr);
    ej["candidateBinsExcluded"] = s.bins_excluded;
    if (!s.bins_note.empty()) ej["candidateBinsNote"] = s.bins_note;
    engines[std::string(to_string(s.engine))] = std::move(ej);
  }

  auto& shares = j["clickShares"] = OrderedJson::array();
  for (const auto& r : report.shares) {
    shares.push_back({{"engine", to_string(r.engine)},
                      {"subset", r.subset},
                      {"group", to_string(r.group)},
                      {"n", r.n},
                      {"target", r.target},
                      {"share", r.share}});
  }

  auto& estimates = j["estimates"] = OrderedJson::array();
  for (const auto& r : report.estimates) {
    OrderedJson e{{"engine", to_string(r.engine)}, {"subset", r.subset},
                  {"analysis", r.analysis},        {"position", r.position},
                  {"aRef", to_string(r.ref)},      {"aAlt", to_string(r.alt)}};
    if (r.gap) e.update(gap_json(*r.gap));
    e["beta"] = r.beta ? OrderedJson(*r.beta) : OrderedJson(nullptr);
    if (!r.note.empty()) e["note"] = r.note;
    estimates.push_back(std::move(e));
  }

  auto& bins = j["candidateBins"] = OrderedJson::array();
  for (const auto& r : report.bins) {
    OrderedJson b{{"engine", to_string(r.engine)},
                  {"bin", r.bin.bin},
                  {"keyLow", r.bin.key_low},
                  {"keyHigh", r.bin.key_high},
                  {"n", r.bin.n_events}};
    if (r.bin.estimate) {
      b.update(gap_json(r.bin.estimate->gap));
      b["beta"] = r.bin.estimate->beta;
    } else {
      b["note"] = r.bin.note;
    }
    bins.push_back(std::move(b));
  }
  return j;
}

std::string estimates_csv(const EstimateReport& report) {
  std::string out = "engine,subset,analysis,position,aRef,aAlt,n,ctrRef,ctrAlt,gap,ciLow,ciHigh,beta,note\n";
  for (const auto& r : report.estimates) {
    out += fmt::format("{},{},{},{},{},{},", to_string(r.engine), csv_field(r.subset),
                       csv_field(r.analysis), r.position, to_string(r.ref), to_string(r.alt));
    if (r.gap) {
      const auto& g = *r.gap;
      out += fmt::format("{},{},{},{},{},{},", g.n_ref + g.n_alt, number(g.ctr_ref),
                         number(g.ctr_alt), number(g.gap), number(g.ci_low), number(g.ci_high));
    } else {
      out += ",,,,,,";
    }
    out += fmt::format("{},{}\n", number(r.beta), csv_field(r.note));
  }
  return out;
}

std::string shares_csv(const EstimateReport& report) {
  std::string out = "engine,subset,group,n,target,share\n";
  for (const auto& r : report.shares) {
    out += fmt::format("{},{},{},{},{},{}\n", to_string(r.engine), csv_field(r.subset),
                       to_string(r.group), r.n, r.target, number(r.share));
  }
  return out;
}

std::string bins_csv(const EstimateReport& report) {
  std::string out = "engine,bin,keyLow,keyHigh,n,ctrRef,ctrAlt,gap,ciLow,ciHigh,beta,note\n";
  for (const auto& r : report.bins) {
    const auto& b = r.bin;
    out += fmt::format("{},{},{},{},{},", to_string(r.engine), b.bin, b.key_low, b.key_high,
                       b.n_events);
    if (b.estimate) {
      const auto& g = b.estimate->gap;
      out += fmt::format("{},{},{},{},{},{},\n", number(g.ctr_ref), number(g.ctr_alt),
                         number(g.gap), number(g.ci_low), number(g.ci_high),
                         number(b.estimate->beta));
    } else {
      out += fmt::format(",,,,,,{}\n", csv_field(b.note));
    }
  }
  return out;
}

void write_report(const EstimateReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  write_text(dir / "report.json", to_json(report).dump(2) + "\n");
  write_text(dir / "estimates.csv", estimates_csv(report));
  write_text(dir / "click_shares.csv", shares_csv(report));
  write_text(dir / "candidate_bins.csv", bins_csv(report));
}

}  // namespace perfpower
