// arise: admin command line for the backend service.
//
//   arise [--config PATH] serve
//   arise [--config PATH] ingest --use-case NAME
//   arise [--config PATH] refresh-gallery --use-case NAME
//   arise [--config PATH] simulate --use-case NAME [--water-level M] [--temp-delta C]
//   arise [--config PATH] export-mesh --use-case NAME [--vertical-exaggeration X]
//
// $ARISE_CONFIG, when set, takes precedence over --config; the fallback is
// ./arise.json.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <string>

#include <CLI11.hpp>

#include "arise/config.hpp"
#include "arise/errors.hpp"
#include "arise/http_server.hpp"
#include "arise/service.hpp"
#include "arise/terra.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitFailure = 1;

void log_line(const std::string& line) { std::cerr << "arise: " << line << std::endl; }

int serve(arise::ServiceConfig config) {
  // Block termination signals in every thread; the main thread collects them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const auto host = config.listen_host;
  const auto port = config.listen_port;
  arise::Service service(std::move(config), {arise::system_now, true, log_line});
  arise::HttpServer server(service);
  const auto bound = server.start(host, port);
  std::cout << "listening on " << host << ":" << bound << std::endl;
  service.start_scheduler();

  int received = 0;
  sigwait(&signals, &received);
  log_line("shutting down");
  server.stop();
  service.stop_scheduler();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ARISE backend: reports, reviews, artworks and climate scenarios"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("-c,--config", config_path, "Service configuration (JSON)");

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");

  std::string use_case;
  auto* ingest_cmd = app.add_subcommand("ingest", "Recompute PoI statistics from the review fixture");
  ingest_cmd->add_option("--use-case", use_case, "Use case name")->required();

  auto* refresh_cmd = app.add_subcommand("refresh-gallery", "Regenerate artworks whose sentiment band changed");
  refresh_cmd->add_option("--use-case", use_case, "Use case name")->required();

  std::optional<double> water_level;
  double temp_delta = 0.0;
  auto* simulate_cmd = app.add_subcommand("simulate", "Print a climate scenario as JSON");
  simulate_cmd->add_option("--use-case", use_case, "Use case name")->required();
  simulate_cmd->add_option("--water-level", water_level, "Water surface elevation in meters (omit for baseline)");
  simulate_cmd->add_option("--temp-delta", temp_delta, "Warming in degrees C");

  double exaggeration = 1.0;
  auto* mesh_cmd = app.add_subcommand("export-mesh", "Write the terrain mesh as OBJ text to stdout");
  mesh_cmd->add_option("--use-case", use_case, "Use case name")->required();
  mesh_cmd->add_option("--vertical-exaggeration", exaggeration, "Elevation scale")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  if (const char* env = std::getenv("ARISE_CONFIG"); env && *env) {
    config_path = env;
  } else if (config_path.empty()) {
    config_path = "arise.json";
  }

  arise::ServiceConfig config;
  try {
    config = arise::load_config(config_path);
  } catch (const arise::Error& e) {
    std::cerr << "arise: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*serve_cmd) return serve(std::move(config));

    if (*mesh_cmd) {
      const auto* uc = config.find_use_case(use_case);
      if (!uc) throw arise::NotFoundError("unknown use case '" + use_case + "'");
      arise::terra::write_obj(std::cout, arise::terra::mesh_from_heightmap(arise::terra::load_heightmap(uc->heightmap_path),
                                                                          exaggeration));
      return 0;
    }

    const bool auto_ingest = !*ingest_cmd && !*simulate_cmd;
    arise::Service service(std::move(config), {arise::system_now, auto_ingest, log_line});
    if (*ingest_cmd) {
      std::cout << arise::to_json(service.ingest(use_case)).dump(2) << "\n";
    } else if (*refresh_cmd) {
      std::cout << arise::to_json(service.refresh_gallery(use_case)).dump(2) << "\n";
    } else if (*simulate_cmd) {
      std::cout << service.simulate(use_case, water_level, temp_delta).dump() << "\n";
    }
    return 0;
  } catch (const arise::ConfigError& e) {
    std::cerr << "arise: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "arise: " << e.what() << "\n";
    return kExitFailure;
  }
}
