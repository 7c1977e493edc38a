#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arise/gamify.hpp"
#include "arise/reports.hpp"
#include "arise/terra.hpp"

namespace arise {

struct UseCaseConfig {
  std::string name;
  std::filesystem::path poi_registry_path;
  std::filesystem::path review_fixture_path;
  std::filesystem::path heightmap_path;
  std::vector<terra::CellIndex> flood_seeds;
  std::filesystem::path veg_base_path;
};

struct ServiceConfig {
  std::string listen_host = "127.0.0.1";
  std::uint16_t listen_port = 8080;  // 0 picks a free port
  std::filesystem::path data_dir = "arise-data";
  double onsite_radius_m = 2000.0;
  double refresh_period_h = 24.0;  // 0 disables the background refresh
  std::optional<std::string> external_generator_url;
  std::chrono::milliseconds external_generator_timeout{std::chrono::seconds{30}};
  std::filesystem::path lexicon_path;
  reports::FlowOptions chat;
  gamify::PointsTable points;
  terra::VegetationModel vegetation;
  std::vector<UseCaseConfig> use_cases;

  const UseCaseConfig* find_use_case(const std::string& name) const;
};

// Relative paths are resolved against `base_dir`. Throws ConfigError for
// unknown types, missing required keys or referenced files that do not
// exist. The data directory need not exist yet.
ServiceConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ServiceConfig load_config(const std::filesystem::path& path);

}  // namespace arise
