#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "arise/smda.hpp"
#include "arise/time.hpp"

// Sentiment-conditioned artwork generation and the per-use-case gallery.
namespace arise::artworks {

// Score intervals, lower bounds inclusive:
//   stormy [-1, -0.5)  melancholic [-0.5, 0)  serene [0, 0.5)  vibrant [0.5, 1]
enum class SentimentBand { stormy, melancholic, serene, vibrant };

SentimentBand band_for(double sentiment) noexcept;
std::string_view descriptor(SentimentBand band) noexcept;
std::string_view to_string(SentimentBand band) noexcept;
std::optional<SentimentBand> parse_band(std::string_view text) noexcept;

struct ArtPrompt {
  std::string poi_id;
  std::filesystem::path base_photo;
  double sentiment = 0.0;
  std::string prompt_text;
  std::uint64_t seed = 0;

  SentimentBand band() const noexcept { return band_for(sentiment); }
  friend bool operator==(const ArtPrompt&, const ArtPrompt&) = default;
};

std::uint64_t prompt_seed(std::string_view poi_id, std::string_view prompt_text) noexcept;

// "<name>, <band descriptor>, painting". Throws DomainError for an empty
// photo path and NotFoundError when the photo does not exist.
ArtPrompt build_prompt(const smda::PoiStats& poi, const std::filesystem::path& photo);

enum class GeneratorKind { procedural, external };
std::string_view to_string(GeneratorKind kind) noexcept;
std::optional<GeneratorKind> parse_generator_kind(std::string_view text) noexcept;

struct Artwork {
  std::string id;
  std::string use_case;
  std::string poi_id;
  ArtPrompt prompt;
  std::vector<std::uint8_t> image;  // PNG, 512x512
  GeneratorKind generator = GeneratorKind::procedural;
  Timestamp generated_at{};
};

// "art-" followed by the hex prompt seed.
std::string artwork_id(const ArtPrompt& prompt);

class GeneratorAdapter {
 public:
  virtual ~GeneratorAdapter() = default;
  virtual GeneratorKind kind() const noexcept = 0;
  // PNG bytes of a 512x512 image. Throws GenerationError.
  virtual std::vector<std::uint8_t> render(const ArtPrompt& prompt) = 0;
};

// Deterministic stand-in for a diffusion model: a diagonal two-colour
// gradient chosen by sentiment band, modulated by value noise seeded from the
// prompt seed.
class ProceduralGenerator final : public GeneratorAdapter {
 public:
  static constexpr std::uint32_t kSize = 512;

  GeneratorKind kind() const noexcept override { return GeneratorKind::procedural; }
  std::vector<std::uint8_t> render(const ArtPrompt& prompt) override;
};

// Posts {prompt_text, seed, base_photo_b64} as JSON to `url` and expects PNG
// bytes back.
class HttpGenerator final : public GeneratorAdapter {
 public:
  explicit HttpGenerator(std::string url, std::chrono::milliseconds timeout = std::chrono::seconds{30});

  GeneratorKind kind() const noexcept override { return GeneratorKind::external; }
  std::vector<std::uint8_t> render(const ArtPrompt& prompt) override;

  const std::string& url() const noexcept { return url_; }

 private:
  std::string url_;
  std::chrono::milliseconds timeout_;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);

// Runs one adapter. Throws GenerationError when the adapter fails or returns
// something other than a 512x512 PNG.
Artwork generate(const ArtPrompt& prompt, GeneratorAdapter& adapter, const std::string& use_case, Timestamp now);

// Uses `external` when given, falling back to the procedural generator on
// any generation error. `log` receives a line describing the fallback.
Artwork generate_with_fallback(const ArtPrompt& prompt, GeneratorAdapter* external, const std::string& use_case,
                               Timestamp now, const std::function<void(const std::string&)>& log = {});

struct GalleryDelta {
  std::vector<std::string> created;
  std::vector<std::string> retained;
};

using PhotoLookup = std::function<std::filesystem::path(const std::string& poi_id)>;

// Artwork catalog plus the current gallery of each use case. Artworks are
// keyed by (poi_id, sentiment band): a PoI gets a new artwork only when its
// band changes to one it has no artwork for. Every artwork ever generated
// stays in the catalog; only the current gallery is served.
//
// One refresh per use case runs at a time. Readers get immutable snapshots
// and never block on generation.
class Gallery {
 public:
  struct Hooks {
    std::function<void(const Artwork&)> on_artwork;
    std::function<void(const std::string& use_case, const std::vector<std::string>& artwork_ids)> on_gallery;
    std::function<void(const std::string&)> log;
  };

  using Snapshot = std::shared_ptr<const std::vector<std::shared_ptr<const Artwork>>>;

  explicit Gallery(Hooks hooks = {}, Clock clock = system_now);

  // Takes the top five PoIs by review count and makes sure each has an
  // artwork for its current band.
  GalleryDelta refresh(const std::string& use_case, std::span<const smda::PoiStats> stats,
                       const PhotoLookup& photo_for, GeneratorAdapter* external = nullptr);

  Snapshot current(const std::string& use_case) const;
  std::shared_ptr<const Artwork> find(const std::string& artwork_id) const;
  std::shared_ptr<const Artwork> find(const std::string& poi_id, SentimentBand band) const;
  std::size_t artwork_count() const;

  // Rebuild from persisted records, without invoking hooks.
  void restore_artwork(Artwork artwork);
  // Throws NotFoundError if an id is not in the catalog.
  void restore_current(const std::string& use_case, const std::vector<std::string>& artwork_ids);

 private:
  std::mutex& use_case_mutex(const std::string& use_case);
  void insert_locked(std::shared_ptr<const Artwork> artwork);

  Hooks hooks_;
  Clock clock_;

  mutable std::mutex catalog_mutex_;
  std::map<std::string, std::shared_ptr<const Artwork>> by_id_;
  std::map<std::pair<std::string, SentimentBand>, std::string> by_key_;
  std::map<std::string, Snapshot> current_;

  std::mutex refresh_locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> refresh_locks_;
};

}  // namespace arise::artworks
