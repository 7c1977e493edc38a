#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "arise/artworks.hpp"
#include "arise/gamify.hpp"
#include "arise/reports.hpp"
#include "arise/smda.hpp"
#include "arise/terra.hpp"

// JSON shapes shared by the HTTP API, the CLI and the JSON-lines store.
// Keys are lowercase snake_case. Decoders throw DomainError naming the
// offending field.
namespace arise::wire {

using nlohmann::json;

json to_json(const reports::HazardReport& r);
reports::HazardReport report_from_json(const json& j);

// Onsite popup card: {id, hazard_type, description, distance_m, media, created_at}.
json report_card(const reports::HazardReport& r, double distance_m);

reports::ChatMessage chat_message_from_json(const json& j);
json to_json(const reports::ChatMessage& m);
json to_json(const reports::BotReply& r);
reports::BotReply bot_reply_from_json(const json& j);

json to_json(const smda::Review& r);
smda::Review review_from_json(const json& j);

json to_json(const smda::PoiStats& s);
smda::PoiStats poi_stats_from_json(const json& j);

// Artwork metadata; the PNG bytes are stored separately.
json artwork_record(const artworks::Artwork& a);
artworks::Artwork artwork_from_record(const json& j);
// Gallery entry: {artwork_id, poi_id, prompt_text, image_url, generated_at}.
json gallery_entry(const artworks::Artwork& a, const std::string& image_url);

json to_json(const gamify::UserProfile& p);

json to_json(const terra::TerrainMesh& mesh);
json to_json(const terra::ScenarioResult& result);
json coverage_to_json(const terra::Grid<double>& grid);

// {error, detail}
json error_body(const std::string& error, const std::string& detail);

}  // namespace arise::wire
