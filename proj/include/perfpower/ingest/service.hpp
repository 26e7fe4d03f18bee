#pragma once

// HTTP front of the event store.
//
//   POST /v1/events                 one canonical event JSON per request
//   GET  /v1/events?since=&until=   X-Api-Key required; line-delimited JSON
//   GET  /healthz                   stored event count and last write time
//
// The service speaks plain HTTP; TLS is expected from a fronting proxy.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "perfpower/ingest/rate_limiter.hpp"
#include "perfpower/ingest/store.hpp"
#include "perfpower/kv_config.hpp"

namespace httplib {
class Server;
}

namespace perfpower::ingest {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string api_read_key;
  double rate_per_second = 20;
  double rate_burst = 100;
  std::filesystem::path store_path = "events.store";
  std::size_t threads = 64;

  // Throws InvalidConfig for an empty key or a nonpositive rate.
  void check() const;

  // Keys: service.listen (host:port), service.apiReadKey,
  // service.rateLimit.perSecond, service.rateLimit.burst, service.storePath,
  // service.threads.
  static ServiceConfig from_config(const KvConfig& config);
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class IngestService {
 public:
  using WallClock = std::function<std::int64_t()>;

  IngestService(ServiceConfig config, std::shared_ptr<EventStore> store, WallClock now_ms = {},
                RateLimiter::Clock limiter_clock = {});

  HttpResponse handle_post_event(std::string_view body, std::string_view source_addr);
  HttpResponse handle_get_events(const std::optional<std::string>& since,
                                 const std::optional<std::string>& until,
                                 const std::optional<std::string>& api_key,
                                 std::string_view source_addr);
  HttpResponse handle_health() const;

  const ServiceConfig& config() const { return config_; }

 private:
  ServiceConfig config_;
  std::shared_ptr<EventStore> store_;
  WallClock now_ms_;
  RateLimiter limiter_;
};

// Binds IngestService handlers to an HTTP listener.
class IngestServer {
 public:
  explicit IngestServer(IngestService& service);
  ~IngestServer();

  IngestServer(const IngestServer&) = delete;
  IngestServer& operator=(const IngestServer&) = delete;

  // Binds host:port (port 0 picks a free port) and returns the bound port.
  // Throws IoError if binding fails.
  int bind(const std::string& host, int port);
  // Serves until stop(); blocks.
  void serve();
  void stop();
  bool running() const;

 private:
  IngestService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace perfpower::ingest
