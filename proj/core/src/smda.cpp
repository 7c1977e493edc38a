#include "arise/smda.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "arise/errors.hpp"

namespace arise::smda {
namespace {

std::string_view trim(std::string_view s) noexcept {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lowercase_token(std::string_view token) {
  const auto tokens = tokenize(token);
  if (tokens.size() != 1) throw DomainError("lexicon token must be a single word: '" + std::string(token) + "'");
  return tokens.front();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SentimentScore::SentimentScore(double value) : value_(std::isnan(value) ? 0.0 : std::clamp(value, -1.0, 1.0)) {}

Lexicon Lexicon::parse(std::string_view text) {
  Lexicon lex;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw ParseError("lexicon line lacks a tab separator", line_no);
    const auto key = trim(line.substr(0, tab));
    const auto value = trim(line.substr(tab + 1));
    try {
      if (key == "@negator") {
        lex.add_negator(value);
        continue;
      }
      double valence = 0.0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), valence);
      if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ParseError("lexicon valence is not a number", line_no, tab + 2);
      }
      lex.add(key, valence);
    } catch (const DomainError& e) {
      throw ParseError(std::string("invalid lexicon entry: ") + e.what(), line_no);
    }
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open lexicon file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void Lexicon::add(std::string_view token, double valence) {
  if (!(valence >= -1.0 && valence <= 1.0)) {
    throw DomainError("valence for '" + std::string(token) + "' outside [-1, 1]");
  }
  entries_.insert_or_assign(lowercase_token(token), valence);
}

void Lexicon::add_negator(std::string_view token) { negators_.insert(lowercase_token(token)); }

std::optional<double> Lexicon::valence(std::string_view lowercase_token) const {
  const auto found = entries_.find(std::string(lowercase_token));
  if (found == entries_.end()) return std::nullopt;
  return found->second;
}

bool Lexicon::is_negator(std::string_view lowercase_token) const {
  return negators_.contains(std::string(lowercase_token));
}

std::vector<std::string> tokenize(std::string_view utf8) {
  std::vector<std::string> tokens;
  std::string current;
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(utf8.data());
  const auto length = static_cast<std::int32_t>(utf8.size());
  std::int32_t i = 0;
  while (i < length) {
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    if (c >= 0 && u_isalnum(c)) {
      const UChar32 lower = u_tolower(c);
      std::uint8_t buf[U8_MAX_LENGTH];
      std::int32_t n = 0;
      U8_APPEND_UNSAFE(buf, n, lower);
      current.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

SentimentScore analyze_sentiment(std::string_view text, const Lexicon& lexicon) {
  const auto tokens = tokenize(text);
  double sum = 0.0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto v = lexicon.valence(tokens[i]);
    if (!v) continue;
    const bool negated = i > 0 && lexicon.is_negator(tokens[i - 1]);
    sum += negated ? -*v : *v;
    ++matched;
  }
  if (matched == 0) return SentimentScore{0.0};
  return SentimentScore{sum / static_cast<double>(matched)};
}

double importance_score(double mean_sentiment, std::size_t n_reviews, std::size_t n_max) {
  if (n_reviews > n_max) {
    throw DomainError("review count " + std::to_string(n_reviews) + " exceeds use-case maximum " +
                      std::to_string(n_max));
  }
  if (!(mean_sentiment >= -1.0 && mean_sentiment <= 1.0)) {
    throw DomainError("mean sentiment outside [-1, 1]");
  }
  if (n_reviews == 0 || n_max == 0) return 0.0;
  const double tone = (mean_sentiment + 1.0) / 2.0;
  const double volume = std::log10(1.0 + static_cast<double>(n_reviews)) / std::log10(1.0 + static_cast<double>(n_max));
  return std::clamp(tone * volume, 0.0, 1.0);
}

PoiStats aggregate_poi(const PoiInfo& poi, std::span<const Review> reviews, const Lexicon& lexicon,
                       std::size_t n_max) {
  PoiStats stats;
  stats.poi_id = poi.poi_id;
  stats.name = poi.name;
  stats.location = poi.location;
  stats.review_count = reviews.size();
  if (!reviews.empty()) {
    double sum = 0.0;
    for (const auto& r : reviews) sum += analyze_sentiment(r.text, lexicon).value();
    stats.mean_sentiment = std::clamp(sum / static_cast<double>(reviews.size()), -1.0, 1.0);
  }
  stats.importance = importance_score(stats.mean_sentiment, stats.review_count, n_max);
  return stats;
}

std::vector<PoiStats> aggregate_use_case(std::span<const PoiInfo> pois, std::span<const Review> reviews,
                                         const Lexicon& lexicon) {
  std::map<std::string, std::vector<Review>> by_poi;
  for (const auto& p : pois) by_poi[p.poi_id];
  for (const auto& r : reviews) {
    if (const auto found = by_poi.find(r.poi_id); found != by_poi.end()) found->second.push_back(r);
  }
  std::size_t n_max = 0;
  for (const auto& [id, list] : by_poi) n_max = std::max(n_max, list.size());

  std::vector<PoiStats> out;
  out.reserve(pois.size());
  for (const auto& p : pois) out.push_back(aggregate_poi(p, by_poi.at(p.poi_id), lexicon, n_max));
  return out;
}

std::vector<PoiStats> top_k_by_reviews(std::span<const PoiStats> stats, std::size_t k) {
  std::vector<PoiStats> sorted(stats.begin(), stats.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const PoiStats& a, const PoiStats& b) {
    if (a.review_count != b.review_count) return a.review_count > b.review_count;
    return a.poi_id < b.poi_id;
  });
  if (sorted.size() > k) sorted.resize(k);
  return sorted;
}

std::vector<PoiInfo> load_poi_registry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open PoI registry " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("PoI registry " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_array()) throw ConfigError("PoI registry " + path.string() + " must be a JSON array");

  std::vector<PoiInfo> pois;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    try {
      PoiInfo p;
      p.poi_id = item.at("poi_id").get<std::string>();
      p.name = item.at("name").get<std::string>();
      p.location = geo::GeoPoint(item.at("lat").get<double>(), item.at("lon").get<double>());
      p.use_case = item.at("use_case").get<std::string>();
      p.photo_path = item.at("photo_path").get<std::string>();
      if (p.poi_id.empty()) throw DomainError("empty poi_id");
      if (!seen.insert(p.poi_id).second) throw DomainError("duplicate poi_id " + p.poi_id);
      if (p.photo_path.is_relative()) p.photo_path = path.parent_path() / p.photo_path;
      pois.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw ConfigError("PoI registry " + path.string() + " entry " + std::to_string(i) + ": " + e.what());
    }
  }
  return pois;
}

IngestResult read_review_fixture(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IngestError("review fixture not found: " + path.string());
  const std::string content = read_file(path);

  IngestResult result;
  std::istringstream lines(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      Review r;
      r.poi_id = obj.at("poi_id").get<std::string>();
      if (r.poi_id.empty()) throw DomainError("empty poi_id");
      r.text = obj.at("text").get<std::string>();
      if (const auto rating = obj.find("rating"); rating != obj.end() && !rating->is_null()) {
        if (!rating->is_number_integer()) throw DomainError("rating must be an integer or null");
        const int value = rating->get<int>();
        if (value < 1 || value > 5) throw DomainError("rating outside 1..5");
        r.rating = value;
      }
      r.created_at = parse_rfc3339(obj.at("created_at").get<std::string>());
      result.reviews.push_back(std::move(r));
    } catch (const std::exception& e) {
      ++result.skipped;
      result.problems.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return result;
}

void FixtureReviewSource::add_use_case(const std::string& use_case, Entry entry) {
  use_cases_.insert_or_assign(use_case, std::move(entry));
}

IngestResult FixtureReviewSource::fetch(const std::string& use_case) {
  const auto found = use_cases_.find(use_case);
  if (found == use_cases_.end()) throw NotFoundError("unknown use case '" + use_case + "'");
  auto result = read_review_fixture(found->second.fixture);
  const auto& ids = found->second.poi_ids;
  const auto before = result.reviews.size();
  std::erase_if(result.reviews, [&](const Review& r) { return !ids.contains(r.poi_id); });
  result.unmatched = before - result.reviews.size();
  return result;
}

IngestResult ingest_reviews(ReviewSource& source, const std::string& use_case) { return source.fetch(use_case); }

}  // namespace arise::smda
