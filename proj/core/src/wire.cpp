#include "arise/wire.hpp"

#include "arise/errors.hpp"
#include "arise/time.hpp"

namespace arise::wire {
namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw DomainError("expected a JSON object");
  const auto found = j.find(key);
  if (found == j.end()) throw DomainError(std::string("missing field '") + key + "'");
  return *found;
}

std::string string_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw DomainError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

double number_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) throw DomainError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  const auto found = j.find(key);
  if (found == j.end() || found->is_null()) return std::nullopt;
  if (!found->is_string()) throw DomainError(std::string("field '") + key + "' must be a string");
  return found->get<std::string>();
}

json media_json(const std::vector<reports::MediaRef>& media) {
  json out = json::array();
  for (const auto& m : media) out.push_back({{"kind", reports::to_string(m.kind)}, {"uri", m.uri}});
  return out;
}

}  // namespace

json to_json(const reports::HazardReport& r) {
  json measurements = json::array();
  for (const auto& m : r.measurements) {
    measurements.push_back({{"measurement_type", m.measurement_type}, {"value", m.value}, {"unit", m.unit}});
  }
  json impacts = json::array();
  for (const auto& i : r.impact_indicators) impacts.push_back({{"indicator", i.indicator}, {"severity", i.severity}});
  return json{
      {"id", r.id},
      {"location", {{"lat", r.location.lat()}, {"lon", r.location.lon()}}},
      {"hazard_type", reports::to_string(r.hazard_type)},
      {"description", r.description},
      {"media", media_json(r.media)},
      {"measurements", std::move(measurements)},
      {"impact_indicators", std::move(impacts)},
      {"risk_elements", r.risk_elements},
      {"created_at", format_rfc3339(r.created_at)},
      {"reporter", r.reporter},
  };
}

reports::HazardReport report_from_json(const json& j) {
  reports::HazardReport r;
  r.id = string_field(j, "id");
  const auto& loc = field(j, "location");
  r.location = geo::GeoPoint(number_field(loc, "lat"), number_field(loc, "lon"));
  const auto hazard = reports::parse_hazard_type(string_field(j, "hazard_type"));
  if (!hazard) throw DomainError("unknown hazard_type");
  r.hazard_type = *hazard;
  r.description = string_field(j, "description");
  for (const auto& m : field(j, "media")) {
    const auto kind = reports::parse_media_kind(string_field(m, "kind"));
    if (!kind) throw DomainError("unknown media kind");
    r.media.push_back({*kind, string_field(m, "uri")});
  }
  for (const auto& m : field(j, "measurements")) {
    r.measurements.push_back({string_field(m, "measurement_type"), number_field(m, "value"), string_field(m, "unit")});
  }
  for (const auto& i : field(j, "impact_indicators")) {
    const auto& sev = field(i, "severity");
    if (!sev.is_number_integer()) throw DomainError("severity must be an integer");
    r.impact_indicators.push_back({string_field(i, "indicator"), sev.get<int>()});
  }
  for (const auto& e : field(j, "risk_elements")) {
    if (!e.is_string()) throw DomainError("risk_elements must be strings");
    r.risk_elements.push_back(e.get<std::string>());
  }
  r.created_at = parse_rfc3339(string_field(j, "created_at"));
  r.reporter = string_field(j, "reporter");
  reports::validate(r);
  return r;
}

json report_card(const reports::HazardReport& r, double distance_m) {
  return json{
      {"id", r.id},
      {"hazard_type", reports::to_string(r.hazard_type)},
      {"description", r.description},
      {"distance_m", distance_m},
      {"media", media_json(r.media)},
      {"created_at", format_rfc3339(r.created_at)},
  };
}

reports::ChatMessage chat_message_from_json(const json& j) {
  if (!j.is_object()) throw DomainError("chat message must be a JSON object");
  reports::ChatMessage m;
  m.session_id = string_field(j, "session_id");
  const auto kind = reports::parse_message_kind(string_field(j, "kind"));
  if (!kind) throw DomainError("unknown message kind '" + j.at("kind").get<std::string>() + "'");
  m.kind = *kind;
  m.text = optional_string(j, "text");
  m.media_uri = optional_string(j, "media_uri");
  if (const auto loc = j.find("location"); loc != j.end() && !loc->is_null()) {
    m.location = reports::LatLon{number_field(*loc, "lat"), number_field(*loc, "lon")};
  }
  if (auto problem = reports::wire_problem(m)) throw DomainError(*problem);
  return m;
}

json to_json(const reports::ChatMessage& m) {
  json j{{"session_id", m.session_id}, {"kind", reports::to_string(m.kind)}};
  if (m.text) j["text"] = *m.text;
  if (m.location) j["location"] = {{"lat", m.location->lat}, {"lon", m.location->lon}};
  if (m.media_uri) j["media_uri"] = *m.media_uri;
  return j;
}

json to_json(const reports::BotReply& r) {
  json j{
      {"session_id", r.session_id}, {"state", reports::to_string(r.state)}, {"text", r.text},
      {"options", r.options},       {"valid", r.valid},
  };
  j["report_id"] = r.report_id ? json(*r.report_id) : json(nullptr);
  return j;
}

reports::BotReply bot_reply_from_json(const json& j) {
  reports::BotReply r;
  r.session_id = string_field(j, "session_id");
  const auto state = string_field(j, "state");
  bool known = false;
  for (const auto s : reports::kChatStates) {
    if (reports::to_string(s) == state) {
      r.state = s;
      known = true;
    }
  }
  if (!known) throw DomainError("unknown chat state '" + state + "'");
  r.text = string_field(j, "text");
  r.options = field(j, "options").get<std::vector<std::string>>();
  r.valid = field(j, "valid").get<bool>();
  r.report_id = optional_string(j, "report_id");
  return r;
}

json to_json(const smda::Review& r) {
  return json{
      {"poi_id", r.poi_id},
      {"text", r.text},
      {"rating", r.rating ? json(*r.rating) : json(nullptr)},
      {"created_at", format_rfc3339(r.created_at)},
  };
}

smda::Review review_from_json(const json& j) {
  smda::Review r;
  r.poi_id = string_field(j, "poi_id");
  r.text = string_field(j, "text");
  if (const auto rating = j.find("rating"); rating != j.end() && !rating->is_null()) r.rating = rating->get<int>();
  r.created_at = parse_rfc3339(string_field(j, "created_at"));
  return r;
}

json to_json(const smda::PoiStats& s) {
  return json{
      {"poi_id", s.poi_id},
      {"name", s.name},
      {"lat", s.location.lat()},
      {"lon", s.location.lon()},
      {"review_count", s.review_count},
      {"mean_sentiment", s.mean_sentiment},
      {"importance", s.importance},
  };
}

smda::PoiStats poi_stats_from_json(const json& j) {
  smda::PoiStats s;
  s.poi_id = string_field(j, "poi_id");
  s.name = string_field(j, "name");
  s.location = geo::GeoPoint(number_field(j, "lat"), number_field(j, "lon"));
  s.review_count = field(j, "review_count").get<std::size_t>();
  s.mean_sentiment = number_field(j, "mean_sentiment");
  s.importance = number_field(j, "importance");
  return s;
}

json artwork_record(const artworks::Artwork& a) {
  return json{
      {"id", a.id},
      {"use_case", a.use_case},
      {"poi_id", a.poi_id},
      {"prompt",
       {{"poi_id", a.prompt.poi_id},
        {"base_photo", a.prompt.base_photo.string()},
        {"sentiment", a.prompt.sentiment},
        {"prompt_text", a.prompt.prompt_text},
        {"seed", a.prompt.seed}}},
      {"band", artworks::to_string(a.prompt.band())},
      {"generator", artworks::to_string(a.generator)},
      {"generated_at", format_rfc3339(a.generated_at)},
  };
}

artworks::Artwork artwork_from_record(const json& j) {
  artworks::Artwork a;
  a.id = string_field(j, "id");
  a.use_case = string_field(j, "use_case");
  a.poi_id = string_field(j, "poi_id");
  const auto& p = field(j, "prompt");
  a.prompt.poi_id = string_field(p, "poi_id");
  a.prompt.base_photo = string_field(p, "base_photo");
  a.prompt.sentiment = number_field(p, "sentiment");
  a.prompt.prompt_text = string_field(p, "prompt_text");
  a.prompt.seed = field(p, "seed").get<std::uint64_t>();
  const auto gen = artworks::parse_generator_kind(string_field(j, "generator"));
  if (!gen) throw DomainError("unknown generator kind");
  a.generator = *gen;
  a.generated_at = parse_rfc3339(string_field(j, "generated_at"));
  return a;
}

json gallery_entry(const artworks::Artwork& a, const std::string& image_url) {
  return json{
      {"artwork_id", a.id},
      {"poi_id", a.poi_id},
      {"prompt_text", a.prompt.prompt_text},
      {"image_url", image_url},
      {"generated_at", format_rfc3339(a.generated_at)},
  };
}

json to_json(const gamify::UserProfile& p) {
  json counts = json::object();
  for (const auto& [event, n] : p.event_counts) counts[std::string(gamify::to_string(event))] = n;
  return json{{"user_id", p.user_id}, {"points", p.points}, {"level", p.level}, {"event_counts", std::move(counts)}};
}

json to_json(const terra::TerrainMesh& mesh) {
  json vertices = json::array();
  for (const auto& v : mesh.vertices) vertices.push_back({v.x, v.y, v.z});
  json triangles = json::array();
  for (const auto& t : mesh.triangles) triangles.push_back({t[0], t[1], t[2]});
  return json{{"vertices", std::move(vertices)}, {"triangles", std::move(triangles)}};
}

json coverage_to_json(const terra::Grid<double>& grid) {
  json rows = json::array();
  for (std::size_t r = 0; r < grid.nrows; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < grid.ncols; ++c) row.push_back(grid.at(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const terra::ScenarioResult& result) {
  json mask = json::array();
  for (std::size_t r = 0; r < result.mask.nrows; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < result.mask.ncols; ++c) row.push_back(result.mask.at(r, c) ? 1 : 0);
    mask.push_back(std::move(row));
  }
  return json{
      {"mask", std::move(mask)},
      {"coverage", coverage_to_json(result.coverage)},
      {"summary",
       {{"inundated_cell_count", result.summary.inundated_cell_count},
        {"inundated_area_m2", result.summary.inundated_area_m2},
        {"mean_coverage", result.summary.mean_coverage}}},
  };
}

json error_body(const std::string& error, const std::string& detail) {
  return json{{"error", error}, {"detail", detail}};
}

}  // namespace arise::wire
