#include "perfpower/ingest/service.hpp"

#include <charconv>
#include <chrono>
#include <limits>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "perfpower/assignment.hpp"
#include "perfpower/event_io.hpp"

namespace perfpower::ingest {

namespace {

constexpr std::size_t kMaxBody = 64 * 1024;

HttpResponse json_response(int status, const nlohmann::json& body) {
  return {status, body.dump(), "application/json"};
}

HttpResponse error_response(int status, std::string_view message) {
  return json_response(status, {{"error", message}});
}

std::optional<std::int64_t> parse_ms(const std::optional<std::string>& text, std::int64_t fallback) {
  if (!text) return fallback;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
  if (ec != std::errc() || ptr != text->data() + text->size() || v < 0) return std::nullopt;
  return v;
}

// Runs in time independent of where the strings first differ.
bool keys_equal(std::string_view a, std::string_view b) {
  unsigned char diff = a.size() == b.size() ? 0 : 1;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto ca = static_cast<unsigned char>(i < a.size() ? a[i] : 0);
    const auto cb = static_cast<unsigned char>(i < b.size() ? b[i] : 0);
    diff |= static_cast<unsigned char>(ca ^ cb);
  }
  return diff == 0;
}

std::int64_t system_now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

void ServiceConfig::check() const {
  if (api_read_key.empty()) throw InvalidConfig("service.apiReadKey must be set");
  if (!(rate_per_second > 0)) throw InvalidConfig("service.rateLimit.perSecond must be > 0");
  if (!(rate_burst >= 1)) throw InvalidConfig("service.rateLimit.burst must be >= 1");
  if (port < 0 || port > 65535) throw InvalidConfig("service port out of range");
  if (threads == 0) throw InvalidConfig("service.threads must be >= 1");
}

ServiceConfig ServiceConfig::from_config(const KvConfig& config) {
  ServiceConfig c;
  if (auto listen = config.get("service.listen")) {
    const auto colon = listen->rfind(':');
    if (colon == std::string::npos) throw InvalidConfig("service.listen must be host:port");
    c.host = listen->substr(0, colon);
    int port = -1;
    const auto* first = listen->data() + colon + 1;
    const auto* last = listen->data() + listen->size();
    auto [ptr, ec] = std::from_chars(first, last, port);
    if (ec != std::errc() || ptr != last) throw InvalidConfig("service.listen has a bad port");
    c.port = port;
  }
  c.api_read_key = config.get_or("service.apiReadKey", "");
  if (auto v = config.get_double("service.rateLimit.perSecond")) c.rate_per_second = *v;
  if (auto v = config.get_double("service.rateLimit.burst")) c.rate_burst = *v;
  if (auto v = config.get("service.storePath")) c.store_path = *v;
  if (auto v = config.get_int("service.threads")) {
    if (*v < 1) throw InvalidConfig("service.threads must be >= 1");
    c.threads = static_cast<std::size_t>(*v);
  }
  c.check();
  return c;
}

IngestService::IngestService(ServiceConfig config, std::shared_ptr<EventStore> store,
                             WallClock now_ms, RateLimiter::Clock limiter_clock)
    : config_(std::move(config)),
      store_(std::move(store)),
      now_ms_(now_ms ? std::move(now_ms) : system_now_ms),
      limiter_(config_.rate_per_second, config_.rate_burst, std::move(limiter_clock)) {
  config_.check();
  if (!store_) throw InvalidConfig("ingest service needs a store");
}

HttpResponse IngestService::handle_post_event(std::string_view body, std::string_view source_addr) {
  const std::uint64_t source = fnv1a64(source_addr);
  if (!limiter_.allow(source)) return error_response(429, "rate limit exceeded");
  if (body.size() > kMaxBody) return error_response(413, "event too large");

  auto parsed = parse_event(body);
  if (parsed.event) parsed.violations = validate_event(*parsed.event);
  if (!parsed.violations.empty()) {
    nlohmann::json violations = nlohmann::json::array();
    for (const auto& v : parsed.violations) {
      violations.push_back({{"code", v.code}, {"detail", v.detail}});
    }
    return json_response(400, {{"error", "invalid event"}, {"violations", violations}});
  }

  StoredEvent stored{std::move(*parsed.event), now_ms_(), source};
  try {
    const auto status = store_->append(std::move(stored));
    return json_response(202, {{"status", status == AppendStatus::Stored ? "stored" : "duplicate"}});
  } catch (const StoreError& ex) {
    return error_response(503, fmt::format("store unavailable: {}", ex.what()));
  }
}

HttpResponse IngestService::handle_get_events(const std::optional<std::string>& since,
                                              const std::optional<std::string>& until,
                                              const std::optional<std::string>& api_key,
                                              std::string_view source_addr) {
  if (!limiter_.allow(fnv1a64(source_addr))) return error_response(429, "rate limit exceeded");
  if (!api_key || !keys_equal(*api_key, config_.api_read_key)) {
    return error_response(401, "missing or invalid API key");
  }
  const auto since_ms = parse_ms(since, 0);
  const auto until_ms = parse_ms(until, std::numeric_limits<std::int64_t>::max());
  if (!since_ms || !until_ms || *since_ms > *until_ms) {
    return error_response(400, "since/until must be integers with 0 <= since <= until");
  }
  try {
    HttpResponse r{200, {}, "application/x-ndjson"};
    for (const auto& stored : store_->range(*since_ms, *until_ms)) {
      r.body += serialize(stored.event);
      r.body += '\n';
    }
    return r;
  } catch (const StoreError& ex) {
    return error_response(503, fmt::format("store unavailable: {}", ex.what()));
  }
}

HttpResponse IngestService::handle_health() const {
  try {
    const auto stats = store_->stats();
    nlohmann::json body = {{"status", "ok"}, {"count", stats.count}};
    body["lastWriteMs"] = stats.last_write_ms ? nlohmann::json(*stats.last_write_ms) : nullptr;
    return json_response(200, body);
  } catch (const StoreError& ex) {
    return json_response(503, {{"status", "unavailable"}, {"error", ex.what()}});
  }
}

IngestServer::IngestServer(IngestService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  const std::size_t threads = service_.config().threads;
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  server_->set_payload_max_length(kMaxBody);
  server_->set_tcp_nodelay(true);
  server_->set_keep_alive_max_count(1000);

  auto send = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  auto param = [](const httplib::Request& req, const char* name) -> std::optional<std::string> {
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
  };

  server_->Post("/v1/events", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.handle_post_event(req.body, req.remote_addr));
  });
  server_->Get("/v1/events",
               [this, send, param](const httplib::Request& req, httplib::Response& res) {
                 std::optional<std::string> key;
                 if (req.has_header("X-Api-Key")) key = req.get_header_value("X-Api-Key");
                 send(res, service_.handle_get_events(param(req, "since"), param(req, "until"), key,
                                                      req.remote_addr));
               });
  server_->Get("/healthz", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, service_.handle_health());
  });
}

IngestServer::~IngestServer() { stop(); }

int IngestServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw IoError(fmt::format("cannot bind {}:{}", host, port));
  return bound;
}

void IngestServer::serve() { server_->listen_after_bind(); }

void IngestServer::stop() {
  if (server_) server_->stop();
}

bool IngestServer::running() const { return server_->is_running(); }

}  // namespace perfpower::ingest
