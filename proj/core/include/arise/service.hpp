#pragma once

#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "arise/artworks.hpp"
#include "arise/config.hpp"
#include "arise/gamify.hpp"
#include "arise/geo.hpp"
#include "arise/reports.hpp"
#include "arise/smda.hpp"
#include "arise/store.hpp"
#include "arise/terra.hpp"

namespace arise {

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lowercase names
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;

  nlohmann::json json() const { return nlohmann::json::parse(body); }
};

struct IngestSummary {
  std::string use_case;
  std::vector<smda::PoiStats> stats;
  std::size_t review_count = 0;
  std::size_t skipped = 0;
  std::size_t unmatched = 0;
  std::vector<std::string> problems;
};

nlohmann::json to_json(const IngestSummary& summary);
nlohmann::json to_json(const artworks::GalleryDelta& delta);

// The deployable backend: owns the store and every module's live state, and
// answers API requests. Each endpoint is a thin translation onto a module
// function applied to the current state.
class Service {
 public:
  struct Options {
    Clock clock = system_now;
    // Ingest review fixtures for use cases without a stored snapshot.
    bool ingest_missing = true;
    std::function<void(const std::string&)> log;
  };

  // Loads every configured input, then replays the store. Throws
  // ConfigError for inconsistent inputs (e.g. vegetation grid size differs
  // from the heightmap, flood seed outside the grid).
  explicit Service(ServiceConfig config);
  Service(ServiceConfig config, Options options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  ApiResponse handle(const ApiRequest& request);

  IngestSummary ingest(const std::string& use_case);
  artworks::GalleryDelta refresh_gallery(const std::string& use_case);

  // water_level nullopt is the baseline (no water).
  nlohmann::json simulate(const std::string& use_case, std::optional<double> water_level, double temp_delta) const;
  nlohmann::json terrain(const std::string& use_case, double vertical_exaggeration = 1.0) const;

  std::vector<smda::PoiStats> poi_stats(const std::string& use_case) const;
  std::vector<smda::PoiInfo> pois(const std::string& use_case) const;
  std::optional<reports::HazardReport> report(const std::string& id) const;
  std::size_t report_count() const;
  const artworks::Gallery& gallery() const noexcept { return *gallery_; }
  const gamify::RewardLedger& ledger() const noexcept { return *ledger_; }
  const smda::Lexicon& lexicon() const noexcept { return lexicon_; }
  const ServiceConfig& config() const noexcept { return config_; }

  // Background gallery refresh every refresh_period_h (no-op when 0). The
  // first pass runs immediately.
  void start_scheduler();
  void stop_scheduler();

 private:
  struct UseCase {
    UseCaseConfig config;
    std::vector<smda::PoiInfo> pois;
    terra::HeightMap heightmap;
    terra::Grid<double> veg_base;
  };

  const UseCase& use_case(const std::string& name) const;
  void replay();
  void apply_stats(const std::string& use_case, std::vector<smda::PoiStats> stats);
  void persist_report(const reports::HazardReport& report);
  void log(const std::string& line) const;

  ApiResponse route(const ApiRequest& request);
  ApiResponse chat_webhook(const ApiRequest& request);
  ApiResponse onsite_reports(const ApiRequest& request) const;
  ApiResponse onsite_pois(const ApiRequest& request) const;
  ApiResponse offsite_simulate(const ApiRequest& request) const;
  ApiResponse offsite_gallery(const std::string& use_case) const;
  ApiResponse artwork_image(const std::string& artwork_id) const;
  ApiResponse post_event(const ApiRequest& request);
  ApiResponse get_profile(const ApiRequest& request, const std::string& user_id) const;

  ServiceConfig config_;
  Options options_;
  std::unique_ptr<store::Store> store_;
  smda::Lexicon lexicon_;
  std::map<std::string, UseCase> use_cases_;
  std::map<std::string, std::pair<std::string, smda::PoiInfo>> poi_by_id_;  // poi_id -> (use case, info)
  geo::SpatialIndex poi_index_;

  mutable std::shared_mutex stats_mutex_;
  std::map<std::string, std::vector<smda::PoiStats>> stats_by_use_case_;
  std::map<std::string, smda::PoiStats> stats_by_poi_;

  mutable std::shared_mutex reports_mutex_;
  std::map<std::string, reports::HazardReport> reports_;
  geo::SpatialIndex report_index_;

  std::unique_ptr<artworks::GeneratorAdapter> external_generator_;
  std::unique_ptr<reports::ChatEngine> chat_;
  std::unique_ptr<artworks::Gallery> gallery_;
  std::unique_ptr<gamify::RewardLedger> ledger_;

  std::mutex scheduler_mutex_;
  std::condition_variable scheduler_cv_;
  bool scheduler_stop_ = false;
  std::thread scheduler_;
};

}  // namespace arise
