#include <gtest/gtest.h>

#include <algorithm>

#include "arise/errors.hpp"
#include "arise/service.hpp"
#include "arise/time.hpp"
#include "arise/wire.hpp"
#include "support.hpp"

namespace arise {
namespace {

using arise::testing::TempDir;
using arise::testing::write_fixture_config;
using nlohmann::json;

ApiRequest get(const std::string& path, std::map<std::string, std::string> query = {}) {
  return ApiRequest{"GET", path, std::move(query), {}, ""};
}

ApiRequest post(const std::string& path, const std::string& body) { return ApiRequest{"POST", path, {}, {}, body}; }

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override { config_ = load_config(write_fixture_config(dir_.path())); }

  std::unique_ptr<Service> make(bool ingest_missing = true) {
    Service::Options options;
    options.clock = [] { return parse_rfc3339("2026-10-19T09:00:00.000Z"); };
    options.ingest_missing = ingest_missing;
    options.log = [this](const std::string& line) { log_.push_back(line); };
    return std::make_unique<Service>(config_, options);
  }

  TempDir dir_;
  ServiceConfig config_;
  std::vector<std::string> log_;
};

TEST_F(ServiceTest, Health) {
  auto svc = make();
  const auto r = svc->handle(get("/health"));
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.json()["status"], "ok");
}

TEST_F(ServiceTest, UnknownRouteAndWrongMethod) {
  auto svc = make();
  EXPECT_EQ(svc->handle(get("/nowhere")).status, 404);
  EXPECT_EQ(svc->handle(get("/nowhere")).json()["error"], "not_found");
  const auto r = svc->handle(get("/chat/webhook"));
  EXPECT_EQ(r.status, 405);
  EXPECT_EQ(r.json()["error"], "method_not_allowed");
  EXPECT_EQ(svc->handle(post("/onsite/pois", "{}")).status, 405);
}

TEST_F(ServiceTest, WebhookHappyPathStoresQueryableReport) {
  auto svc = make();
  json last;
  for (const auto& m : arise::testing::happy_path_messages("tg-1", 45.0703, 7.6869)) {
    const auto r = svc->handle(post("/chat/webhook", m.dump()));
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(r.content_type, "application/json");
    last = r.json();
  }
  ASSERT_TRUE(last["report_id"].is_string()) << last.dump();
  const auto id = last["report_id"].get<std::string>();
  const auto stored = svc->report(id);
  ASSERT_TRUE(stored);
  EXPECT_EQ(stored->hazard_type, reports::HazardType::flood);
  EXPECT_EQ(stored->measurements.size(), 1u);
  EXPECT_EQ(stored->impact_indicators.size(), 1u);
  EXPECT_EQ(stored->risk_elements, std::vector<std::string>{"foundations"});

  const auto near = svc->handle(get("/onsite/reports", {{"lat", "45.0703"}, {"lon", "7.6869"}}));
  ASSERT_EQ(near.status, 200);
  const auto cards = near.json();
  ASSERT_EQ(cards.size(), 1u);
  EXPECT_EQ(cards[0], wire::report_card(*stored, 0.0));
  const auto far = svc->handle(get("/onsite/reports", {{"lat", "41.9"}, {"lon", "12.5"}}));
  EXPECT_TRUE(far.json().empty());
}

TEST_F(ServiceTest, WebhookAcceptsJsonLines) {
  auto svc = make();
  std::string body;
  for (const auto& m : arise::testing::happy_path_messages("tg-2", 45.06, 7.69)) body += m.dump() + "\n";
  const auto r = svc->handle(post("/chat/webhook", body));
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(r.content_type, "application/x-ndjson");
  std::vector<json> replies;
  std::istringstream in(r.body);
  for (std::string line; std::getline(in, line);) replies.push_back(json::parse(line));
  ASSERT_EQ(replies.size(), 10u);
  EXPECT_TRUE(replies.back()["report_id"].is_string());
  EXPECT_EQ(svc->report_count(), 1u);
}

TEST_F(ServiceTest, MalformedWebhookBatchChangesNothing) {
  auto svc = make();
  const auto msgs = arise::testing::happy_path_messages("tg-3", 45.06, 7.69);
  EXPECT_EQ(svc->handle(post("/chat/webhook", "{not json")).status, 400);
  std::string body;
  for (const auto& m : msgs) body += m.dump() + "\n";
  body += "{\"session_id\":\"tg-3\",\"kind\":\"location\"}\n";
  const auto r = svc->handle(post("/chat/webhook", body));
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.json()["error"], "bad_request");
  EXPECT_EQ(svc->report_count(), 0u);
  EXPECT_EQ(svc->handle(post("/chat/webhook", "")).status, 400);
  EXPECT_EQ(svc->handle(post("/chat/webhook", R"({"session_id":"s","kind":"smoke"})")).status, 400);
}

TEST_F(ServiceTest, OutOfRangeLocationGetsValidationReply) {
  auto svc = make();
  svc->handle(post("/chat/webhook", R"({"session_id":"s","kind":"command","text":"/report"})"));
  const auto r = svc->handle(
      post("/chat/webhook", R"({"session_id":"s","kind":"location","location":{"lat":91,"lon":7}})"));
  ASSERT_EQ(r.status, 200);
  EXPECT_FALSE(r.json()["valid"].get<bool>());
  EXPECT_EQ(r.json()["state"], "await_location");
}

TEST_F(ServiceTest, OnsiteQueriesValidateParameters) {
  auto svc = make();
  for (const auto& q : std::vector<std::map<std::string, std::string>>{
           {{"lat", "95"}, {"lon", "7"}}, {{"lat", "45"}}, {{"lat", "x"}, {"lon", "7"}},
           {{"lat", "45"}, {"lon", "7"}, {"radius_m", "-5"}}, {{"lat", "nan"}, {"lon", "7"}}}) {
    for (const char* path : {"/onsite/reports", "/onsite/pois"}) {
      const auto r = svc->handle(get(path, q));
      EXPECT_EQ(r.status, 400) << path;
      EXPECT_EQ(r.json()["error"], "validation_error");
    }
  }
}

TEST_F(ServiceTest, PoisMatchModuleComputation) {
  auto svc = make();
  const auto expected = arise::testing::module_poi_stats(config_);
  const auto r = svc->handle(get("/onsite/pois", {{"lat", "45.06"}, {"lon", "7.69"}, {"radius_m", "50000"}}));
  ASSERT_EQ(r.status, 200);
  const auto items = r.json();
  ASSERT_EQ(items.size(), expected.size());
  double prev = 0.0;
  for (const auto& item : items) {
    const auto id = item["poi_id"].get<std::string>();
    ASSERT_TRUE(expected.contains(id)) << id;
    auto want = wire::to_json(expected.at(id));
    want["use_case"] = "piedmont";
    want["distance_m"] = item["distance_m"];
    EXPECT_EQ(item, want);
    EXPECT_GE(item["distance_m"].get<double>(), prev);
    prev = item["distance_m"].get<double>();
  }
  const auto none = svc->handle(get("/onsite/pois", {{"lat", "-33"}, {"lon", "151"}}));
  EXPECT_TRUE(none.json().empty());
}

TEST_F(ServiceTest, PoisWithoutStatsReportZeros) {
  auto svc = make(false);
  const auto r = svc->handle(get("/onsite/pois", {{"lat", "45.06"}, {"lon", "7.69"}, {"radius_m", "50000"}}));
  for (const auto& item : r.json()) {
    EXPECT_EQ(item["review_count"], 0);
    EXPECT_EQ(item["importance"], 0.0);
  }
}

TEST_F(ServiceTest, SimulateMatchesKernel) {
  auto svc = make();
  const auto hm = terra::load_heightmap(config_.use_cases[0].heightmap_path);
  terra::IndicatorState state;
  state.veg_base = terra::load_coverage(config_.use_cases[0].veg_base_path);
  for (const auto& [level, delta] : std::vector<std::pair<double, double>>{{hm.min_elevation() + 5.0, 1.5},
                                                                           {hm.max_elevation(), 0.0},
                                                                           {hm.min_elevation() - 1.0, -2.0}}) {
    state.water_level = level;
    state.temp_delta = delta;
    const auto want = wire::to_json(terra::simulate(hm, state, config_.use_cases[0].flood_seeds, config_.vegetation));
    const auto r = svc->handle(post("/offsite/simulate",
                                    json{{"use_case", "piedmont"}, {"water_level", level}, {"temp_delta", delta}}.dump()));
    ASSERT_EQ(r.status, 200) << r.body;
    const auto body = r.json();
    EXPECT_EQ(body["mask"], want["mask"]);
    EXPECT_EQ(body["coverage"], want["coverage"]);
    EXPECT_EQ(body["summary"], want["summary"]);
    EXPECT_TRUE(body["illustrative"].get<bool>());
    EXPECT_EQ(body, svc->simulate("piedmont", level, delta));
  }
}

TEST_F(ServiceTest, SimulateBaselineAndErrors) {
  auto svc = make();
  const auto base = svc->handle(post("/offsite/simulate", R"({"use_case":"piedmont","water_level":null})"));
  ASSERT_EQ(base.status, 200);
  EXPECT_EQ(base.json()["summary"]["inundated_cell_count"], 0);
  EXPECT_TRUE(base.json()["water_level"].is_null());
  EXPECT_EQ(svc->handle(post("/offsite/simulate", R"({"use_case":"atlantis"})")).status, 404);
  EXPECT_EQ(svc->handle(post("/offsite/simulate", R"({"use_case":"piedmont","water_level":"high"})")).status, 400);
  EXPECT_EQ(svc->handle(post("/offsite/simulate", "[1,2]")).status, 400);
  EXPECT_EQ(svc->handle(post("/offsite/simulate", "nope")).status, 400);
}

TEST_F(ServiceTest, TerrainMesh) {
  auto svc = make();
  const auto r = svc->handle(get("/offsite/terrain/piedmont", {{"vertical_exaggeration", "2"}}));
  ASSERT_EQ(r.status, 200);
  const auto body = r.json();
  EXPECT_EQ(body["nrows"], 40);
  EXPECT_EQ(body["ncols"], 60);
  EXPECT_EQ(body["mesh"]["vertices"].size(), 40u * 60u);
  EXPECT_EQ(body["mesh"]["triangles"].size(), 2u * 39u * 59u);
  EXPECT_EQ(body["baseline"]["veg_base"].size(), 40u);
  EXPECT_EQ(svc->handle(get("/offsite/terrain/piedmont", {{"vertical_exaggeration", "0"}})).status, 400);
  EXPECT_EQ(svc->handle(get("/offsite/terrain/atlantis")).status, 404);
}

TEST_F(ServiceTest, GalleryAndImages) {
  auto svc = make();
  EXPECT_TRUE(svc->handle(get("/offsite/gallery/piedmont")).json().empty());
  const auto delta = svc->refresh_gallery("piedmont");
  EXPECT_EQ(delta.created.size(), 5u);
  const auto entries = svc->handle(get("/offsite/gallery/piedmont")).json();
  ASSERT_EQ(entries.size(), 5u);
  for (const auto& e : entries) {
    const auto img = svc->handle(get(e["image_url"].get<std::string>()));
    ASSERT_EQ(img.status, 200);
    EXPECT_EQ(img.content_type, "image/png");
    const std::vector<std::uint8_t> bytes(img.body.begin(), img.body.end());
    const auto decoded = arise::testing::decode_png(bytes);
    ASSERT_TRUE(decoded);
    EXPECT_EQ(decoded->width, 512u);
  }
  EXPECT_TRUE(svc->refresh_gallery("piedmont").created.empty());
  EXPECT_EQ(svc->handle(get("/offsite/artworks/art-0.png")).status, 404);
  EXPECT_EQ(svc->handle(get("/offsite/artworks/x")).status, 404);
  EXPECT_EQ(svc->handle(get("/offsite/gallery/atlantis")).status, 404);
}

TEST_F(ServiceTest, EventsAndProfiles) {
  auto svc = make();
  auto r = svc->handle(post("/events", R"({"user_id":"u1","event_type":"submit_report"})"));
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(r.json()["points"], 10);
  r = svc->handle(get("/profile/u1"));
  EXPECT_EQ(r.json()["event_counts"]["submit_report"], 1);
  EXPECT_EQ(svc->handle(get("/profile/u2")).status, 404);
  EXPECT_EQ(svc->handle(post("/events", R"({"user_id":"u1","event_type":"dance"})")).status, 400);
  EXPECT_EQ(svc->handle(post("/events", R"({"event_type":"view_report"})")).status, 400);

  ApiRequest forged = post("/events", R"({"user_id":"u1","event_type":"view_report"})");
  forged.headers["x-arise-user"] = "mallory";
  EXPECT_EQ(svc->handle(forged).status, 403);
  ApiRequest peek = get("/profile/u1");
  peek.headers["x-arise-user"] = "mallory";
  EXPECT_EQ(svc->handle(peek).status, 403);
  peek.headers["x-arise-user"] = "u1";
  EXPECT_EQ(svc->handle(peek).status, 200);
  EXPECT_EQ(svc->ledger().profile("u1")->points, 10u);
}

TEST_F(ServiceTest, RestartRestoresState) {
  std::string report_id;
  json gallery_before, profile_before;
  {
    auto svc = make();
    json last;
    for (const auto& m : arise::testing::happy_path_messages("tg-9", 45.07, 7.68)) {
      last = svc->handle(post("/chat/webhook", m.dump())).json();
    }
    report_id = last["report_id"].get<std::string>();
    svc->refresh_gallery("piedmont");
    svc->handle(post("/events", R"({"user_id":"u1","event_type":"run_simulation"})"));
    svc->handle(post("/events", R"({"user_id":"u1","event_type":"view_artwork"})"));
    gallery_before = svc->handle(get("/offsite/gallery/piedmont")).json();
    profile_before = svc->handle(get("/profile/u1")).json();
  }
  auto svc = make();
  EXPECT_TRUE(svc->report(report_id));
  EXPECT_EQ(svc->handle(get("/offsite/gallery/piedmont")).json(), gallery_before);
  EXPECT_EQ(svc->handle(get("/profile/u1")).json(), profile_before);
  EXPECT_TRUE(svc->refresh_gallery("piedmont").created.empty());
  for (const auto& e : gallery_before) EXPECT_EQ(svc->handle(get(e["image_url"].get<std::string>())).status, 200);
}

TEST_F(ServiceTest, ArtworkWithoutImageIsDroppedOnReplay) {
  std::string victim;
  {
    auto svc = make();
    victim = svc->refresh_gallery("piedmont").created.front();
  }
  std::filesystem::remove(config_.data_dir / "artworks" / (victim + ".png"));
  auto svc = make();
  EXPECT_FALSE(svc->gallery().find(victim));
  EXPECT_TRUE(std::any_of(log_.begin(), log_.end(), [&](const std::string& l) { return l.find(victim) != std::string::npos; }));
  // The next refresh regenerates the missing artwork.
  EXPECT_EQ(svc->refresh_gallery("piedmont").created, std::vector<std::string>{victim});
}

TEST_F(ServiceTest, IngestIsIdempotent) {
  auto svc = make();
  const auto first = svc->poi_stats("piedmont");
  const auto summary = svc->ingest("piedmont");
  EXPECT_EQ(summary.stats, first);
  EXPECT_EQ(summary.review_count, 54u);
  EXPECT_EQ(summary.unmatched, 1u);
  EXPECT_EQ(summary.skipped, 0u);
  EXPECT_EQ(svc->ingest("piedmont").stats, first);
  EXPECT_THROW(svc->ingest("atlantis"), NotFoundError);
  svc.reset();
  auto again = make();
  EXPECT_EQ(again->poi_stats("piedmont"), first);
}

TEST_F(ServiceTest, InconsistentInputsAreRejected) {
  auto bad_seed = config_;
  bad_seed.use_cases[0].flood_seeds = {{40, 0}};
  EXPECT_THROW(Service(bad_seed, Service::Options{}), ConfigError);

  auto bad_veg = config_;
  arise::testing::write_file(dir_ / "veg.asc", "ncols 2 nrows 2 cellsize 25 nodata -9999\n0.1 0.2\n0.3 0.4\n");
  bad_veg.use_cases[0].veg_base_path = dir_ / "veg.asc";
  EXPECT_THROW(Service(bad_veg, Service::Options{}), ConfigError);

  auto dup = config_;
  dup.use_cases.push_back(dup.use_cases[0]);
  dup.use_cases[1].name = "copy";
  EXPECT_THROW(Service(dup, Service::Options{}), ConfigError);
}

}  // namespace
}  // namespace arise
