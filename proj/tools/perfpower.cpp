// perfpower: simulate click logs, replay them into the ingest service,
// preprocess collected logs and produce estimate reports.
//
// Exit codes: 0 success, 1 other failure, 2 configuration error, 3 I/O error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <httplib.h>

#include "perfpower/click_sim.hpp"
#include "perfpower/errors.hpp"
#include "perfpower/event_io.hpp"
#include "perfpower/kv_config.hpp"
#include "perfpower/preprocess.hpp"
#include "perfpower/report.hpp"

namespace fs = std::filesystem;
using namespace perfpower;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct Options {
  std::string config;
  std::string input;
  std::string output = ".";
  std::uint64_t seed = 1;
  std::size_t resamples = 200;
  int burn_in_days = 4;
  std::optional<std::size_t> events;
  std::size_t bins = 10;
  std::string url;
};

KvConfig load_config(const Options& opt) {
  return opt.config.empty() ? KvConfig{} : KvConfig::load(opt.config);
}

fs::path output_dir(const Options& opt) {
  fs::path dir = opt.output;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  return dir;
}

OrderedJson oracle_summary(const ClickModelParams& params, const std::vector<SyntheticQuery>& population) {
  OrderedJson truth = OrderedJson::object();
  for (auto engine : {Engine::Google, Engine::Bing}) {
    std::vector<SyntheticQuery> queries;
    for (const auto& q : population) {
      if (q.engine() == engine) queries.push_back(q);
    }
    if (queries.empty()) continue;
    OrderedJson ej;
    ej["nQueries"] = queries.size();
    std::vector<ArrangementId> alts;
    auto& gaps = ej["gaps"] = OrderedJson::array();
    for (auto alt : kAllArrangements) {
      if (alt == ArrangementId::a0 || !engine_supports(engine, alt)) continue;
      alts.push_back(alt);
      for (int i = 1; i <= 3; ++i) {
        gaps.push_back({{"aRef", "a0"},
                        {"aAlt", to_string(alt)},
                        {"position", i},
                        {"gap", true_gap(params, queries, alt, ArrangementId::a0, i)}});
      }
    }
    ej["ppCommonRandomness"] = true_pp(params, queries, alts, Coupling::CommonRandomness);
    ej["ppIndependent"] = true_pp(params, queries, alts, Coupling::Independent);
    truth[std::string(to_string(engine))] = std::move(ej);
  }
  return truth;
}

int run_simulate(const Options& opt) {
  const auto config = load_config(opt);
  const auto params = ClickModelParams::from_config(config);
  const auto spec = PopulationSpec::from_config(config);
  const auto plan = SamplingPlan::from_config(config);
  std::size_t n_events = 1000;
  if (auto v = config.get_int("simulation.nEvents")) {
    if (*v < 0) throw InvalidConfig("simulation.nEvents must be >= 0");
    n_events = static_cast<std::size_t>(*v);
  }
  if (opt.events) n_events = *opt.events;

  const auto population = generate_population(spec);
  const auto events = sample_events(params, population, plan, n_events, opt.seed);
  const auto dir = output_dir(opt);
  write_event_log(dir / "events.jsonl", events);

  std::ofstream truth(dir / "truth.json", std::ios::trunc);
  if (!truth) throw IoError("cannot write truth.json");
  truth << oracle_summary(params, population).dump(2) << '\n';

  std::cout << fmt::format("wrote {} events for {} queries to {}\n", events.size(),
                           population.size(), (dir / "events.jsonl").string());
  return 0;
}

int run_preprocess(const Options& opt) {
  const auto events = read_event_log(fs::path(opt.input));
  PreprocessConfig cfg;
  cfg.burn_in_days = opt.burn_in_days;
  if (!opt.config.empty()) {
    if (auto v = load_config(opt).get_bool("preprocess.dropInvalidClassification")) {
      cfg.drop_invalid_classification = *v;
    }
  }
  const auto result = preprocess(events, cfg);
  const auto dir = output_dir(opt);
  write_event_log(dir / "events.preprocessed.jsonl", result.kept);

  const auto& r = result.report;
  OrderedJson drops{{"input", r.input},
                    {"kept", r.kept},
                    {"dropped", {{"burnIn", r.burn_in}, {"unclassifiable", r.unclassifiable}}},
                    {"burnInDays", cfg.burn_in_days}};
  std::ofstream out(dir / "drop_report.json", std::ios::trunc);
  if (!out) throw IoError("cannot write drop_report.json");
  out << drops.dump(2) << '\n';

  std::cout << fmt::format("{} in, {} kept, {} burn-in, {} unclassifiable\n", r.input, r.kept,
                           r.burn_in, r.unclassifiable);
  return 0;
}

int run_report(const Options& opt) {
  const auto events = read_event_log(fs::path(opt.input));
  ReportConfig cfg;
  cfg.bootstrap.seed = opt.seed;
  cfg.bootstrap.resamples = opt.resamples;
  cfg.candidate_bins = opt.bins;
  if (!opt.config.empty()) {
    const auto config = load_config(opt);
    if (auto v = config.get_double("report.level")) cfg.bootstrap.level = *v;
    if (auto v = config.get_int("report.maxPosition")) cfg.max_position = static_cast<int>(*v);
  }
  const auto report = build_report(events, cfg);
  const auto dir = output_dir(opt);
  write_report(report, dir);
  std::cout << fmt::format("report over {} events written to {}\n", events.size(), dir.string());
  return 0;
}

std::optional<std::size_t> health_count(httplib::Client& client) {
  auto res = client.Get("/healthz");
  if (!res || res->status != 200) return std::nullopt;
  auto body = nlohmann::json::parse(res->body, nullptr, false);
  if (body.is_discarded() || !body.contains("count")) return std::nullopt;
  return body["count"].get<std::size_t>();
}

int run_ingest_replay(const Options& opt) {
  std::string url = opt.url;
  if (url.empty() && !opt.config.empty()) url = load_config(opt).get_or("service.url", "");
  if (url.empty()) throw InvalidConfig("ingest-replay needs --url or service.url");

  const auto events = read_event_log(fs::path(opt.input));
  httplib::Client client(url);
  client.set_keep_alive(true);
  client.set_tcp_nodelay(true);
  client.set_connection_timeout(5);

  const auto before = health_count(client);
  if (!before) throw IoError(fmt::format("service at {} is unreachable", url));

  std::size_t accepted = 0;
  std::size_t rejected = 0;
  for (const auto& e : events) {
    const std::string body = serialize(e);
    auto backoff = std::chrono::milliseconds(50);
    for (int attempt = 0;; ++attempt) {
      auto res = client.Post("/v1/events", body, "application/json");
      if (res && res->status == 202) {
        ++accepted;
        break;
      }
      const bool retryable = !res || res->status == 429 || res->status == 503;
      if (!retryable) {
        ++rejected;
        std::cerr << fmt::format("event {} rejected ({}): {}\n", e.event_id, res->status, res->body);
        break;
      }
      if (attempt == 8) {
        if (!res) throw IoError(fmt::format("service at {} stopped responding", url));
        ++rejected;
        std::cerr << fmt::format("event {} gave up after retries ({})\n", e.event_id, res->status);
        break;
      }
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }

  const auto after = health_count(client);
  if (!after) throw IoError(fmt::format("service at {} is unreachable", url));
  std::set<std::string_view> distinct;
  for (const auto& e : events) distinct.insert(e.event_id);
  const std::size_t added = *after >= *before ? *after - *before : 0;
  std::cout << fmt::format(
      "posted {} events ({} distinct): {} accepted, {} rejected; store count {} -> {} (+{})\n",
      events.size(), distinct.size(), accepted, rejected, *before, *after, added);
  if (added > distinct.size()) {
    std::cerr << "store grew by more than the number of distinct events\n";
    return kExitFailure;
  }
  return rejected == 0 ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized SERP arrangement experiments: simulation, ingestion replay, analysis"};
  app.require_subcommand(1);
  Options opt;

  auto* simulate = app.add_subcommand("simulate", "Write a synthetic event log from the click model");
  simulate->add_option("--config", opt.config, "Key-value config file");
  simulate->add_option("--output", opt.output, "Output directory");
  simulate->add_option("--seed", opt.seed, "Sampling seed");
  simulate->add_option("--events", opt.events, "Number of events (overrides simulation.nEvents)");

  auto* replay = app.add_subcommand("ingest-replay", "Post an event log to a running ingest service");
  replay->add_option("--config", opt.config, "Key-value config file (service.url)");
  replay->add_option("--input", opt.input, "Event log")->required();
  replay->add_option("--url", opt.url, "Service base URL, e.g. http://127.0.0.1:8080");

  auto* pre = app.add_subcommand("preprocess", "Apply burn-in and drop unclassifiable clicks");
  pre->add_option("--config", opt.config, "Key-value config file");
  pre->add_option("--input", opt.input, "Event log")->required();
  pre->add_option("--output", opt.output, "Output directory");
  pre->add_option("--burn-in-days", opt.burn_in_days, "Days dropped per user")->check(CLI::NonNegativeNumber);

  auto* report = app.add_subcommand("report", "Estimate gaps, distortions and bounds");
  report->add_option("--config", opt.config, "Key-value config file");
  report->add_option("--input", opt.input, "Preprocessed event log")->required();
  report->add_option("--output", opt.output, "Output directory");
  report->add_option("--seed", opt.seed, "Bootstrap seed");
  report->add_option("--resamples", opt.resamples, "Bootstrap resamples")->check(CLI::PositiveNumber);
  report->add_option("--bins", opt.bins, "Candidate-count percentile bins")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (simulate->parsed()) return run_simulate(opt);
    if (replay->parsed()) return run_ingest_replay(opt);
    if (pre->parsed()) return run_preprocess(opt);
    if (report->parsed()) return run_report(opt);
  } catch (const InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
