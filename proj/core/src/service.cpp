#include "arise/service.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "arise/errors.hpp"
#include "arise/wire.hpp"

namespace arise {
using nlohmann::json;

namespace {

ApiResponse json_response(int status, const json& body) {
  return ApiResponse{status, "application/json", body.dump()};
}

ApiResponse error_response(int status, const std::string& error, const std::string& detail) {
  return json_response(status, wire::error_body(error, detail));
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos < path.size()) {
    if (path[pos] == '/') {
      ++pos;
      continue;
    }
    const auto next = path.find('/', pos);
    const auto end = next == std::string_view::npos ? path.size() : next;
    parts.emplace_back(path.substr(pos, end - pos));
    pos = end;
  }
  return parts;
}

double parse_number(const std::string& name, const std::string& text) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw DomainError(name + " must be a finite number, got '" + text + "'");
  }
  return value;
}

double query_number(const ApiRequest& req, const std::string& name, std::optional<double> fallback = std::nullopt) {
  const auto found = req.query.find(name);
  if (found == req.query.end()) {
    if (fallback) return *fallback;
    throw DomainError("missing query parameter '" + name + "'");
  }
  return parse_number(name, found->second);
}

geo::GeoPoint query_center(const ApiRequest& req) {
  const double lat = query_number(req, "lat");
  const double lon = query_number(req, "lon");
  if (!geo::GeoPoint::valid(lat, lon)) throw DomainError("lat must be within [-90, 90] and lon within [-180, 180]");
  return geo::GeoPoint(lat, lon);
}

json parse_body(const ApiRequest& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw ParseError(std::string("request body is not valid JSON: ") + e.what());
  }
}

std::string image_url(const std::string& artwork_id) { return "/offsite/artworks/" + artwork_id + ".png"; }

}  // namespace

json to_json(const IngestSummary& s) {
  json stats = json::array();
  for (const auto& st : s.stats) stats.push_back(wire::to_json(st));
  return json{{"use_case", s.use_case}, {"reviews", s.review_count}, {"skipped", s.skipped},
              {"unmatched", s.unmatched}, {"problems", s.problems}, {"stats", std::move(stats)}};
}

json to_json(const artworks::GalleryDelta& d) { return json{{"created", d.created}, {"retained", d.retained}}; }

Service::Service(ServiceConfig config) : Service(std::move(config), Options{}) {}

Service::Service(ServiceConfig config, Options options) : config_(std::move(config)), options_(std::move(options)) {
  if (!options_.clock) options_.clock = system_now;
  config_.points.validate();
  lexicon_ = smda::Lexicon::load(config_.lexicon_path);

  for (const auto& uc_config : config_.use_cases) {
    UseCase uc;
    uc.config = uc_config;
    uc.pois = smda::load_poi_registry(uc_config.poi_registry_path);
    for (auto& poi : uc.pois) {
      if (poi.use_case.empty()) poi.use_case = uc_config.name;
      if (poi.use_case != uc_config.name) {
        throw ConfigError("PoI " + poi.poi_id + " in the registry of '" + uc_config.name + "' belongs to '" +
                          poi.use_case + "'");
      }
      if (!poi_by_id_.emplace(poi.poi_id, std::make_pair(uc_config.name, poi)).second) {
        throw ConfigError("PoI id " + poi.poi_id + " is registered twice");
      }
      poi_index_.insert(poi.poi_id, poi.location);
    }
    try {
      uc.heightmap = terra::load_heightmap(uc_config.heightmap_path);
      uc.veg_base = terra::load_coverage(uc_config.veg_base_path);
    } catch (const ParseError& e) {
      throw ConfigError(std::string("use case '") + uc_config.name + "': " + e.what());
    }
    if (uc.veg_base.nrows != uc.heightmap.nrows() || uc.veg_base.ncols != uc.heightmap.ncols()) {
      throw ConfigError("use case '" + uc_config.name + "': vegetation grid is " + std::to_string(uc.veg_base.nrows) +
                        "x" + std::to_string(uc.veg_base.ncols) + " but the heightmap is " +
                        std::to_string(uc.heightmap.nrows()) + "x" + std::to_string(uc.heightmap.ncols()));
    }
    for (const auto& seed : uc_config.flood_seeds) {
      if (seed.row >= uc.heightmap.nrows() || seed.col >= uc.heightmap.ncols()) {
        throw ConfigError("use case '" + uc_config.name + "': flood seed (" + std::to_string(seed.row) + ", " +
                          std::to_string(seed.col) + ") lies outside the heightmap");
      }
    }
    use_cases_.emplace(uc_config.name, std::move(uc));
  }

  store_ = std::make_unique<store::Store>(config_.data_dir);

  if (config_.external_generator_url) {
    external_generator_ =
        std::make_unique<artworks::HttpGenerator>(*config_.external_generator_url, config_.external_generator_timeout);
  }

  chat_ = std::make_unique<reports::ChatEngine>(
      config_.chat, [this](const reports::HazardReport& r) { persist_report(r); }, options_.clock);

  artworks::Gallery::Hooks hooks;
  hooks.on_artwork = [this](const artworks::Artwork& a) {
    store_->write_image(a.id, a.image);
    auto record = wire::artwork_record(a);
    record["type"] = "artwork";
    store_->artworks().append(record);
  };
  hooks.on_gallery = [this](const std::string& use_case, const std::vector<std::string>& ids) {
    store_->artworks().append(json{{"type", "gallery"}, {"use_case", use_case}, {"artwork_ids", ids}});
  };
  hooks.log = [this](const std::string& line) { log(line); };
  gallery_ = std::make_unique<artworks::Gallery>(std::move(hooks), options_.clock);

  ledger_ = std::make_unique<gamify::RewardLedger>(
      config_.points, [this](const std::string& user_id, gamify::EventType event) {
        store_->profiles().append(json{{"user_id", user_id},
                                       {"event_type", gamify::to_string(event)},
                                       {"at", format_rfc3339(options_.clock())}});
      });

  replay();

  if (options_.ingest_missing) {
    for (const auto& uc : config_.use_cases) {
      bool missing = false;
      {
        std::shared_lock lock(stats_mutex_);
        missing = !stats_by_use_case_.contains(uc.name);
      }
      if (missing) {
        const auto summary = ingest(uc.name);
        log("ingested " + std::to_string(summary.review_count) + " reviews for '" + uc.name + "'");
      }
    }
  }
}

Service::~Service() { stop_scheduler(); }

void Service::log(const std::string& line) const {
  if (options_.log) options_.log(line);
}

const Service::UseCase& Service::use_case(const std::string& name) const {
  const auto found = use_cases_.find(name);
  if (found == use_cases_.end()) throw NotFoundError("unknown use case '" + name + "'");
  return found->second;
}

void Service::replay() {
  store_->reports().replay([this](const json& record) {
    auto report = wire::report_from_json(record);
    report_index_.insert(report.id, report.location);
    reports_.insert_or_assign(report.id, std::move(report));
  });

  store_->poi_stats().replay([this](const json& record) {
    const auto name = record.at("use_case").get<std::string>();
    if (!use_cases_.contains(name)) return;
    std::vector<smda::PoiStats> stats;
    for (const auto& item : record.at("stats")) stats.push_back(wire::poi_stats_from_json(item));
    apply_stats(name, std::move(stats));
  });

  store_->artworks().replay([this](const json& record) {
    const auto type = record.value("type", "");
    if (type == "artwork") {
      auto artwork = wire::artwork_from_record(record);
      try {
        artwork.image = store_->read_image(artwork.id);
      } catch (const NotFoundError&) {
        log("artwork " + artwork.id + " has no image on disk; dropped");
        return;
      }
      gallery_->restore_artwork(std::move(artwork));
    } else if (type == "gallery") {
      const auto ids = record.at("artwork_ids").get<std::vector<std::string>>();
      try {
        gallery_->restore_current(record.at("use_case").get<std::string>(), ids);
      } catch (const NotFoundError& e) {
        log(std::string("gallery record skipped: ") + e.what());
      }
    } else {
      throw StoreError("unknown record type '" + type + "' in " + store_->artworks().path().string());
    }
  });

  store_->profiles().replay([this](const json& record) {
    ledger_->restore_event(record.at("user_id").get<std::string>(),
                           gamify::parse_event_type(record.at("event_type").get<std::string>()));
  });
}

void Service::apply_stats(const std::string& name, std::vector<smda::PoiStats> stats) {
  std::unique_lock lock(stats_mutex_);
  if (const auto old = stats_by_use_case_.find(name); old != stats_by_use_case_.end()) {
    for (const auto& s : old->second) stats_by_poi_.erase(s.poi_id);
  }
  for (const auto& s : stats) stats_by_poi_.insert_or_assign(s.poi_id, s);
  stats_by_use_case_.insert_or_assign(name, std::move(stats));
}

void Service::persist_report(const reports::HazardReport& report) {
  reports::validate(report);
  store_->reports().append(wire::to_json(report));
  std::unique_lock lock(reports_mutex_);
  report_index_.insert(report.id, report.location);
  reports_.insert_or_assign(report.id, report);
}

IngestSummary Service::ingest(const std::string& name) {
  const auto& uc = use_case(name);
  smda::FixtureReviewSource source;
  smda::FixtureReviewSource::Entry entry;
  entry.fixture = uc.config.review_fixture_path;
  for (const auto& poi : uc.pois) entry.poi_ids.insert(poi.poi_id);
  source.add_use_case(name, std::move(entry));

  auto fetched = smda::ingest_reviews(source, name);
  IngestSummary summary;
  summary.use_case = name;
  summary.review_count = fetched.reviews.size();
  summary.skipped = fetched.skipped;
  summary.unmatched = fetched.unmatched;
  summary.problems = std::move(fetched.problems);
  summary.stats = smda::aggregate_use_case(uc.pois, fetched.reviews, lexicon_);

  json stats = json::array();
  for (const auto& s : summary.stats) stats.push_back(wire::to_json(s));
  store_->poi_stats().append(
      json{{"use_case", name}, {"ingested_at", format_rfc3339(options_.clock())}, {"stats", std::move(stats)}});
  apply_stats(name, summary.stats);
  return summary;
}

artworks::GalleryDelta Service::refresh_gallery(const std::string& name) {
  const auto& uc = use_case(name);
  const auto stats = poi_stats(name);
  const auto photo_for = [&uc](const std::string& poi_id) -> std::filesystem::path {
    for (const auto& poi : uc.pois) {
      if (poi.poi_id == poi_id) return poi.photo_path;
    }
    return {};
  };
  return gallery_->refresh(name, stats, photo_for, external_generator_.get());
}

json Service::simulate(const std::string& name, std::optional<double> water_level, double temp_delta) const {
  const auto& uc = use_case(name);
  if (water_level && !std::isfinite(*water_level)) throw DomainError("water_level must be finite");
  if (!std::isfinite(temp_delta)) throw DomainError("temp_delta must be finite");
  terra::IndicatorState state;
  state.water_level = water_level.value_or(terra::kNoWater);
  state.temp_delta = temp_delta;
  state.veg_base = uc.veg_base;
  const auto result = terra::simulate(uc.heightmap, state, uc.config.flood_seeds, config_.vegetation);

  json body{{"use_case", name},
            {"water_level", water_level ? json(*water_level) : json(nullptr)},
            {"temp_delta", temp_delta},
            {"illustrative", true}};
  body.update(wire::to_json(result));
  return body;
}

json Service::terrain(const std::string& name, double vertical_exaggeration) const {
  const auto& uc = use_case(name);
  const auto& hm = uc.heightmap;
  return json{{"use_case", name},
              {"nrows", hm.nrows()},
              {"ncols", hm.ncols()},
              {"cell_size", hm.cell_size},
              {"vertical_exaggeration", vertical_exaggeration},
              {"min_elevation", hm.min_elevation()},
              {"max_elevation", hm.max_elevation()},
              {"mesh", wire::to_json(terra::mesh_from_heightmap(hm, vertical_exaggeration))},
              {"baseline", {{"water_level", nullptr}, {"temp_delta", 0.0}, {"veg_base", wire::coverage_to_json(uc.veg_base)}}}};
}

std::vector<smda::PoiStats> Service::poi_stats(const std::string& name) const {
  use_case(name);
  std::shared_lock lock(stats_mutex_);
  const auto found = stats_by_use_case_.find(name);
  return found == stats_by_use_case_.end() ? std::vector<smda::PoiStats>{} : found->second;
}

std::vector<smda::PoiInfo> Service::pois(const std::string& name) const { return use_case(name).pois; }

std::optional<reports::HazardReport> Service::report(const std::string& id) const {
  std::shared_lock lock(reports_mutex_);
  const auto found = reports_.find(id);
  if (found == reports_.end()) return std::nullopt;
  return found->second;
}

std::size_t Service::report_count() const {
  std::shared_lock lock(reports_mutex_);
  return reports_.size();
}

void Service::start_scheduler() {
  if (config_.refresh_period_h <= 0.0 || scheduler_.joinable()) return;
  {
    std::lock_guard lock(scheduler_mutex_);
    scheduler_stop_ = false;
  }
  const auto period = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::duration<double, std::ratio<3600>>(config_.refresh_period_h));
  scheduler_ = std::thread([this, period] {
    std::unique_lock lock(scheduler_mutex_);
    while (!scheduler_stop_) {
      lock.unlock();
      for (const auto& uc : config_.use_cases) {
        try {
          const auto delta = refresh_gallery(uc.name);
          log("gallery '" + uc.name + "': " + std::to_string(delta.created.size()) + " created, " +
              std::to_string(delta.retained.size()) + " retained");
        } catch (const std::exception& e) {
          log("gallery refresh for '" + uc.name + "' failed: " + e.what());
        }
      }
      lock.lock();
      scheduler_cv_.wait_for(lock, period, [this] { return scheduler_stop_; });
    }
  });
}

void Service::stop_scheduler() {
  {
    std::lock_guard lock(scheduler_mutex_);
    scheduler_stop_ = true;
  }
  scheduler_cv_.notify_all();
  if (scheduler_.joinable()) scheduler_.join();
}

ApiResponse Service::handle(const ApiRequest& request) {
  try {
    return route(request);
  } catch (const NotFoundError& e) {
    return error_response(404, "not_found", e.what());
  } catch (const ParseError& e) {
    return error_response(400, "bad_request", e.what());
  } catch (const DomainError& e) {
    return error_response(400, "validation_error", e.what());
  } catch (const StateError& e) {
    return error_response(409, "conflict", e.what());
  } catch (const json::exception& e) {
    return error_response(400, "bad_request", e.what());
  } catch (const std::exception& e) {
    log(request.method + " " + request.path + " failed: " + e.what());
    return error_response(500, "internal_error", e.what());
  }
}

ApiResponse Service::route(const ApiRequest& req) {
  const auto parts = split_path(req.path);
  const bool get = req.method == "GET";
  const bool post = req.method == "POST";
  const auto method_not_allowed = [&] {
    return error_response(405, "method_not_allowed", req.method + " is not supported on " + req.path);
  };

  if (parts.size() == 1 && parts[0] == "health") {
    return get ? json_response(200, json{{"status", "ok"}}) : method_not_allowed();
  }
  if (parts.size() == 2 && parts[0] == "chat" && parts[1] == "webhook") {
    return post ? chat_webhook(req) : method_not_allowed();
  }
  if (parts.size() == 2 && parts[0] == "onsite") {
    if (parts[1] == "reports") return get ? onsite_reports(req) : method_not_allowed();
    if (parts[1] == "pois") return get ? onsite_pois(req) : method_not_allowed();
  }
  if (parts.size() == 3 && parts[0] == "offsite") {
    if (parts[1] == "terrain") {
      if (!get) return method_not_allowed();
      const double exaggeration = query_number(req, "vertical_exaggeration", 1.0);
      return json_response(200, terrain(parts[2], exaggeration));
    }
    if (parts[1] == "gallery") return get ? offsite_gallery(parts[2]) : method_not_allowed();
    if (parts[1] == "artworks") {
      if (!get) return method_not_allowed();
      constexpr std::string_view suffix = ".png";
      const auto& name = parts[2];
      if (name.size() <= suffix.size() || !name.ends_with(suffix)) throw NotFoundError("no such artwork image");
      return artwork_image(name.substr(0, name.size() - suffix.size()));
    }
  }
  if (parts.size() == 2 && parts[0] == "offsite" && parts[1] == "simulate") {
    return post ? offsite_simulate(req) : method_not_allowed();
  }
  if (parts.size() == 1 && parts[0] == "events") {
    return post ? post_event(req) : method_not_allowed();
  }
  if (parts.size() == 2 && parts[0] == "profile") {
    return get ? get_profile(req, parts[1]) : method_not_allowed();
  }
  return error_response(404, "not_found", "no route for " + req.method + " " + req.path);
}

ApiResponse Service::chat_webhook(const ApiRequest& req) {
  // Either one JSON object or JSON lines; all are checked before any is
  // applied so a malformed batch changes nothing.
  std::vector<reports::ChatMessage> messages;
  bool single = false;
  const auto decode = [&messages](const json& j) {
    auto msg = wire::chat_message_from_json(j);
    if (auto problem = reports::wire_problem(msg)) throw ParseError("malformed chat message: " + *problem);
    messages.push_back(std::move(msg));
  };

  json whole;
  bool whole_ok = true;
  try {
    whole = json::parse(req.body);
  } catch (const json::exception&) {
    whole_ok = false;
  }
  try {
    if (whole_ok && whole.is_object()) {
      single = true;
      decode(whole);
    } else {
      std::istringstream lines(req.body);
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(lines, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
          j = json::parse(line);
        } catch (const json::exception& e) {
          throw ParseError("line " + std::to_string(line_no) + " is not valid JSON: " + e.what());
        }
        if (!j.is_object()) throw ParseError("line " + std::to_string(line_no) + " is not a JSON object");
        decode(j);
      }
    }
  } catch (const DomainError& e) {
    throw ParseError(std::string("malformed chat message: ") + e.what());
  }
  if (messages.empty()) throw ParseError("request body holds no chat message");

  if (single) return json_response(200, wire::to_json(chat_->handle(messages.front())));
  std::string out;
  for (const auto& msg : messages) {
    out += wire::to_json(chat_->handle(msg)).dump();
    out += '\n';
  }
  return ApiResponse{200, "application/x-ndjson", std::move(out)};
}

ApiResponse Service::onsite_reports(const ApiRequest& req) const {
  const auto center = query_center(req);
  const double radius = query_number(req, "radius_m", config_.onsite_radius_m);
  if (radius < 0.0) throw DomainError("radius_m must be non-negative");
  json cards = json::array();
  std::shared_lock lock(reports_mutex_);
  for (const auto& hit : report_index_.query_radius(center, radius)) {
    const auto found = reports_.find(hit.id);
    if (found != reports_.end()) cards.push_back(wire::report_card(found->second, hit.distance_m));
  }
  return json_response(200, cards);
}

ApiResponse Service::onsite_pois(const ApiRequest& req) const {
  const auto center = query_center(req);
  const double radius = query_number(req, "radius_m", config_.onsite_radius_m);
  if (radius < 0.0) throw DomainError("radius_m must be non-negative");
  json out = json::array();
  std::shared_lock lock(stats_mutex_);
  for (const auto& hit : poi_index_.query_radius(center, radius)) {
    const auto& [use_case_name, info] = poi_by_id_.at(hit.id);
    json item;
    if (const auto stats = stats_by_poi_.find(hit.id); stats != stats_by_poi_.end()) {
      item = wire::to_json(stats->second);
    } else {
      item = wire::to_json(smda::PoiStats{info.poi_id, info.name, info.location, 0, 0.0, 0.0});
    }
    item["use_case"] = use_case_name;
    item["distance_m"] = hit.distance_m;
    out.push_back(std::move(item));
  }
  return json_response(200, out);
}

ApiResponse Service::offsite_simulate(const ApiRequest& req) const {
  const auto body = parse_body(req);
  if (!body.is_object()) throw ParseError("request body must be a JSON object");
  const auto uc = body.find("use_case");
  if (uc == body.end() || !uc->is_string()) throw DomainError("use_case must be a string");
  std::optional<double> water_level;
  if (const auto wl = body.find("water_level"); wl != body.end() && !wl->is_null()) {
    if (!wl->is_number()) throw DomainError("water_level must be a number or null");
    water_level = wl->get<double>();
  }
  double temp_delta = 0.0;
  if (const auto td = body.find("temp_delta"); td != body.end() && !td->is_null()) {
    if (!td->is_number()) throw DomainError("temp_delta must be a number");
    temp_delta = td->get<double>();
  }
  return json_response(200, simulate(uc->get<std::string>(), water_level, temp_delta));
}

ApiResponse Service::offsite_gallery(const std::string& name) const {
  use_case(name);
  json out = json::array();
  if (const auto snapshot = gallery_->current(name)) {
    for (const auto& artwork : *snapshot) out.push_back(wire::gallery_entry(*artwork, image_url(artwork->id)));
  }
  return json_response(200, out);
}

ApiResponse Service::artwork_image(const std::string& artwork_id) const {
  const auto artwork = gallery_->find(artwork_id);
  if (!artwork) throw NotFoundError("no artwork '" + artwork_id + "'");
  return ApiResponse{200, "image/png", std::string(artwork->image.begin(), artwork->image.end())};
}

ApiResponse Service::post_event(const ApiRequest& req) {
  const auto body = parse_body(req);
  if (!body.is_object()) throw ParseError("request body must be a JSON object");
  const auto user = body.find("user_id");
  if (user == body.end() || !user->is_string() || user->get<std::string>().empty()) {
    throw DomainError("user_id must be a non-empty string");
  }
  const auto event = body.find("event_type");
  if (event == body.end() || !event->is_string()) throw DomainError("event_type must be a string");
  const auto user_id = user->get<std::string>();
  // Stub authentication: a caller that identifies itself may only act as itself.
  if (const auto caller = req.headers.find("x-arise-user"); caller != req.headers.end() && caller->second != user_id) {
    return error_response(403, "forbidden", "caller '" + caller->second + "' cannot record events for '" + user_id + "'");
  }
  const auto type = gamify::parse_event_type(event->get<std::string>());
  return json_response(200, wire::to_json(ledger_->record_event(user_id, type)));
}

ApiResponse Service::get_profile(const ApiRequest& req, const std::string& user_id) const {
  if (const auto caller = req.headers.find("x-arise-user"); caller != req.headers.end() && caller->second != user_id) {
    return error_response(403, "forbidden", "caller '" + caller->second + "' cannot read the profile of '" + user_id + "'");
  }
  const auto profile = ledger_->profile(user_id);
  if (!profile) throw NotFoundError("no profile for '" + user_id + "'");
  return json_response(200, wire::to_json(*profile));
}

}  // namespace arise
