// perfpower-ingestd: click-event ingestion service.

#include <csignal>
#include <iostream>
#include <memory>
#include <pthread.h>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "perfpower/errors.hpp"
#include "perfpower/ingest/service.hpp"

using namespace perfpower;

int main(int argc, char** argv) {
  CLI::App app{"Click-event ingestion service"};
  std::string config_path;
  std::optional<int> port;
  app.add_option("--config", config_path, "Key-value config file")->required();
  app.add_option("--port", port, "Override the port of service.listen (0 picks a free port)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  // Block the stop signals in every thread; a dedicated thread waits for them.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  try {
    auto config = ingest::ServiceConfig::from_config(KvConfig::load(config_path));
    if (port) config.port = *port;
    auto store = std::make_shared<ingest::FileEventStore>(config.store_path);
    ingest::IngestService service(config, store);
    ingest::IngestServer server(service);
    const int bound = server.bind(config.host, config.port);

    std::cout << fmt::format("listening on {}:{} (store {}, {} events)\n", config.host, bound,
                             config.store_path.string(), store->stats().count)
              << std::flush;
    std::thread waiter([&] {
      int sig = 0;
      sigwait(&stop_signals, &sig);
      server.stop();
    });
    server.serve();
    if (waiter.joinable()) {
      // serve() can also return on its own; wake the waiter so it exits.
      pthread_kill(waiter.native_handle(), SIGTERM);
      waiter.join();
    }
    return 0;
  } catch (const InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
