#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "arise/geo.hpp"
#include "arise/time.hpp"

// Social media data analysis: review ingestion, lexicon sentiment and the
// per-PoI importance score.
namespace arise::smda {

struct Review {
  std::string poi_id;
  std::string text;
  std::optional<int> rating;  // carried through, not used for scoring
  Timestamp created_at{};

  friend bool operator==(const Review&, const Review&) = default;
};

// A sentiment value, always clamped into [-1, 1].
class SentimentScore {
 public:
  constexpr SentimentScore() = default;
  explicit SentimentScore(double value);

  double value() const noexcept { return value_; }

 private:
  double value_ = 0.0;
};

// Token valences plus the negator set. Tokens are stored in lowercase form.
//
// File format (UTF-8), one entry per line:
//   <token>\t<valence>      valence within [-1, 1]
//   @negator\t<token>
// Blank lines and lines starting with '#' are ignored.
class Lexicon {
 public:
  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::filesystem::path& path);

  // Throws DomainError for a valence outside [-1, 1] or an empty token.
  void add(std::string_view token, double valence);
  void add_negator(std::string_view token);

  std::optional<double> valence(std::string_view lowercase_token) const;
  bool is_negator(std::string_view lowercase_token) const;

  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_map<std::string, double> entries_;
  std::unordered_set<std::string> negators_;
};

// Splits UTF-8 text on every non-alphanumeric code point and lowercases
// each token (Unicode simple case mapping). Invalid byte sequences act as
// separators.
std::vector<std::string> tokenize(std::string_view utf8);

// Mean effective valence of the matched tokens; a matched token's valence
// flips sign when the token right before it is a negator. 0 when nothing
// matches.
SentimentScore analyze_sentiment(std::string_view text, const Lexicon& lexicon);

// ((mean_sentiment + 1) / 2) * log10(1 + n_reviews) / log10(1 + n_max), and
// 0 when either count is 0. Throws DomainError when n_reviews > n_max or the
// sentiment is outside [-1, 1].
double importance_score(double mean_sentiment, std::size_t n_reviews, std::size_t n_max);

// Registry entry for a point of interest.
struct PoiInfo {
  std::string poi_id;
  std::string name;
  geo::GeoPoint location{0.0, 0.0};
  std::string use_case;
  std::filesystem::path photo_path;
};

struct PoiStats {
  std::string poi_id;
  std::string name;
  geo::GeoPoint location{0.0, 0.0};
  std::size_t review_count = 0;
  double mean_sentiment = 0.0;
  double importance = 0.0;

  friend bool operator==(const PoiStats&, const PoiStats&) = default;
};

// `reviews` must all belong to `poi`; n_max is the largest review count
// across the PoI's use case.
PoiStats aggregate_poi(const PoiInfo& poi, std::span<const Review> reviews, const Lexicon& lexicon,
                       std::size_t n_max);

// Aggregates every registered PoI of one use case. Reviews for other PoIs are
// ignored. Output follows registry order.
std::vector<PoiStats> aggregate_use_case(std::span<const PoiInfo> pois, std::span<const Review> reviews,
                                         const Lexicon& lexicon);

// Descending by review_count, ties by ascending poi_id.
std::vector<PoiStats> top_k_by_reviews(std::span<const PoiStats> stats, std::size_t k = 5);

// Reads a JSON array of {poi_id, name, lat, lon, use_case, photo_path}.
// Relative photo paths resolve against the registry's directory.
std::vector<PoiInfo> load_poi_registry(const std::filesystem::path& path);

struct IngestResult {
  std::vector<Review> reviews;
  std::size_t skipped = 0;              // malformed records
  std::size_t unmatched = 0;            // well-formed records for PoIs outside the use case
  std::vector<std::string> problems;    // "line N: reason" for each skipped record
};

// Parses a JSON-lines review fixture. Malformed records are skipped and
// reported; a missing file throws IngestError naming the path.
IngestResult read_review_fixture(const std::filesystem::path& path);

class ReviewSource {
 public:
  virtual ~ReviewSource() = default;
  virtual IngestResult fetch(const std::string& use_case) = 0;
};

// Serves reviews from one fixture file per use case, keeping only reviews of
// the use case's registered PoIs.
class FixtureReviewSource final : public ReviewSource {
 public:
  struct Entry {
    std::filesystem::path fixture;
    std::set<std::string> poi_ids;
  };

  void add_use_case(const std::string& use_case, Entry entry);
  IngestResult fetch(const std::string& use_case) override;

 private:
  std::map<std::string, Entry> use_cases_;
};

IngestResult ingest_reviews(ReviewSource& source, const std::string& use_case);

}  // namespace arise::smda
