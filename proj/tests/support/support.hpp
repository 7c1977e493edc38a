#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arise/config.hpp"
#include "arise/geo.hpp"
#include "arise/smda.hpp"
#include "arise/terra.hpp"

namespace arise::testing {

std::filesystem::path data_dir();       // shipped data/
std::filesystem::path test_data_dir();  // tests/data/
std::optional<std::filesystem::path> cli_path();

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// Writes a config pointing at the shipped piedmont use case with data_dir
// under `dir`; `overrides` are merged on top. Returns the config path.
std::filesystem::path write_fixture_config(const std::filesystem::path& dir, const nlohmann::json& overrides = {});

// Great-circle distance through the chord length of the two unit vectors.
// Shares no code with the library's haversine form.
double chord_distance_oracle(double lat1, double lon1, double lat2, double lon2);

// Cells in a connected component of dry-land-under-threshold (elevation <=
// level, not nodata) that contains at least one seed. Union-find labelling,
// no breadth-first search.
terra::InundationMask flood_oracle(const terra::HeightMap& hm, double level, std::span<const terra::CellIndex> seeds);

terra::HeightMap random_heightmap(std::mt19937_64& rng, std::size_t nrows, std::size_t ncols, double nodata_fraction = 0.0);

struct DecodedPng {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;
};

// Full decode with libpng; nullopt when the bytes are not a valid PNG.
std::optional<DecodedPng> decode_png(std::span<const std::uint8_t> bytes);

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs `argv` to completion, capturing both streams. `env` entries are set in
// the child; an empty value unsets the variable.
ProcessResult run_process(const std::vector<std::string>& argv, const std::map<std::string, std::string>& env = {});

// Spawned child that is killed with SIGKILL on destruction.
class ChildProcess {
 public:
  ChildProcess(const std::vector<std::string>& argv, const std::map<std::string, std::string>& env = {});
  ~ChildProcess();
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  // Reads stdout until a line starting with `prefix` appears; returns it.
  std::optional<std::string> wait_for_line(const std::string& prefix, int timeout_ms);
  void kill_hard();
  int pid() const noexcept { return pid_; }

 private:
  int pid_ = -1;
  int stdout_fd_ = -1;
  std::string buffer_;
};

// Minimal HTTP/1.1 client calls via cpp-httplib.
struct HttpReply {
  int status = 0;
  std::string content_type;
  std::string body;
};
HttpReply http_get(int port, const std::string& path);
HttpReply http_post(int port, const std::string& path, const std::string& body,
                    const std::string& content_type = "application/json");

// Webhook payloads for a complete report: start, location, hazard type,
// description, one photo, skipped video, one measurement, one impact, one
// risk element and the confirmation.
std::vector<nlohmann::json> happy_path_messages(const std::string& session, double lat, double lon);

// PoI statistics computed straight from the module functions: registry and
// fixture read from disk, aggregated per use case, keyed by poi_id.
std::map<std::string, smda::PoiStats> module_poi_stats(const ServiceConfig& config);

}  // namespace arise::testing
