#include "arise/config.hpp"

#include <charconv>
#include <fstream>
#include <set>

#include "arise/errors.hpp"

namespace arise {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() ? base / path : path;
}

fs::path existing_file(const json& obj, const char* key, const fs::path& base, const std::string& where) {
  const auto found = obj.find(key);
  if (found == obj.end() || !found->is_string()) {
    throw ConfigError(where + ": '" + key + "' must be a path string");
  }
  auto path = resolve(base, found->get<std::string>());
  if (!fs::is_regular_file(path)) throw ConfigError(where + ": " + key + " " + path.string() + " does not exist");
  return path;
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  const auto found = obj.find(key);
  if (found == obj.end() || found->is_null()) return fallback;
  try {
    return found->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

void parse_listen(const std::string& listen, ServiceConfig& cfg) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw ConfigError("listen must be 'host:port', got '" + listen + "'");
  cfg.listen_host = listen.substr(0, colon);
  unsigned port = 0;
  const auto port_text = std::string_view(listen).substr(colon + 1);
  const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port > 65535 || cfg.listen_host.empty()) {
    throw ConfigError("listen must be 'host:port', got '" + listen + "'");
  }
  cfg.listen_port = static_cast<std::uint16_t>(port);
}

}  // namespace

const UseCaseConfig* ServiceConfig::find_use_case(const std::string& name) const {
  for (const auto& uc : use_cases) {
    if (uc.name == name) return &uc;
  }
  return nullptr;
}

ServiceConfig parse_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ServiceConfig cfg;

  parse_listen(get_or<std::string>(doc, "listen", "127.0.0.1:8080"), cfg);
  cfg.data_dir = resolve(base_dir, get_or<std::string>(doc, "data_dir", "arise-data"));
  cfg.onsite_radius_m = get_or<double>(doc, "onsite_radius_m", 2000.0);
  if (!(cfg.onsite_radius_m >= 0.0)) throw ConfigError("onsite_radius_m must be non-negative");
  cfg.refresh_period_h = get_or<double>(doc, "refresh_period_h", 24.0);
  if (!(cfg.refresh_period_h >= 0.0)) throw ConfigError("refresh_period_h must be non-negative");
  if (auto url = get_or<std::string>(doc, "external_generator_url", ""); !url.empty()) {
    cfg.external_generator_url = std::move(url);
  }
  const double timeout_s = get_or<double>(doc, "external_generator_timeout_s", 30.0);
  if (!(timeout_s > 0.0)) throw ConfigError("external_generator_timeout_s must be positive");
  cfg.external_generator_timeout = std::chrono::milliseconds{static_cast<std::int64_t>(timeout_s * 1000.0)};
  cfg.lexicon_path = existing_file(doc, "lexicon_path", base_dir, "config");

  cfg.chat.idle_timeout = std::chrono::minutes{get_or<std::int64_t>(doc, "session_idle_timeout_min", 30)};
  if (const auto vocab = doc.find("vocabulary"); vocab != doc.end()) {
    cfg.chat.vocabulary.measurement_types =
        get_or<std::vector<std::string>>(*vocab, "measurement_types", cfg.chat.vocabulary.measurement_types);
    cfg.chat.vocabulary.impact_indicators =
        get_or<std::vector<std::string>>(*vocab, "impact_indicators", cfg.chat.vocabulary.impact_indicators);
    cfg.chat.vocabulary.risk_elements =
        get_or<std::vector<std::string>>(*vocab, "risk_elements", cfg.chat.vocabulary.risk_elements);
  }

  if (const auto points = doc.find("points"); points != doc.end()) {
    if (!points->is_object()) throw ConfigError("points must be an object");
    for (const auto& [name, value] : points->items()) {
      try {
        cfg.points.points[gamify::parse_event_type(name)] = value.get<std::uint64_t>();
      } catch (const std::exception& e) {
        throw ConfigError("points." + name + ": " + e.what());
      }
    }
  }
  cfg.points.level_thresholds = get_or<std::vector<std::uint64_t>>(doc, "level_thresholds", cfg.points.level_thresholds);
  cfg.points.validate();

  if (const auto veg = doc.find("vegetation"); veg != doc.end()) {
    cfg.vegetation.alpha = get_or<double>(*veg, "alpha", cfg.vegetation.alpha);
    cfg.vegetation.beta = get_or<double>(*veg, "beta", cfg.vegetation.beta);
  }

  const auto use_cases = doc.find("use_cases");
  if (use_cases == doc.end() || !use_cases->is_array()) throw ConfigError("use_cases must be an array");
  std::set<std::string> names;
  for (const auto& item : *use_cases) {
    UseCaseConfig uc;
    uc.name = get_or<std::string>(item, "name", "");
    if (uc.name.empty()) throw ConfigError("every use case needs a name");
    if (!names.insert(uc.name).second) throw ConfigError("duplicate use case '" + uc.name + "'");
    const std::string where = "use case '" + uc.name + "'";
    uc.poi_registry_path = existing_file(item, "poi_registry_path", base_dir, where);
    uc.review_fixture_path = existing_file(item, "review_fixture_path", base_dir, where);
    uc.heightmap_path = existing_file(item, "heightmap_path", base_dir, where);
    uc.veg_base_path = existing_file(item, "veg_base_path", base_dir, where);
    for (const auto& seed : get_or<json>(item, "flood_seeds", json::array())) {
      if (!seed.is_array() || seed.size() != 2 || !seed[0].is_number_unsigned() || !seed[1].is_number_unsigned()) {
        throw ConfigError(where + ": flood_seeds entries must be [row, col] pairs of non-negative integers");
      }
      uc.flood_seeds.push_back({seed[0].get<std::size_t>(), seed[1].get<std::size_t>()});
    }
    cfg.use_cases.push_back(std::move(uc));
  }
  return cfg;
}

ServiceConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, fs::absolute(path).parent_path());
}

}  // namespace arise
