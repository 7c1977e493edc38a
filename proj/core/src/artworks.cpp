#include "arise/artworks.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "arise/errors.hpp"
#include "arise/hash.hpp"
#include "arise/png.hpp"

namespace arise::artworks {
namespace {

struct Rgb {
  double r, g, b;
};

struct Palette {
  Rgb from;
  Rgb to;
};

Palette palette_for(SentimentBand band) noexcept {
  switch (band) {
    case SentimentBand::vibrant: return {{255, 196, 61}, {255, 94, 120}};
    case SentimentBand::serene: return {{140, 200, 230}, {200, 232, 210}};
    case SentimentBand::melancholic: return {{118, 128, 148}, {62, 72, 98}};
    case SentimentBand::stormy: return {{48, 44, 78}, {8, 10, 22}};
  }
  return {{0, 0, 0}, {0, 0, 0}};
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice(std::uint64_t seed, std::uint32_t octave, std::int64_t ix, std::int64_t iy) noexcept {
  std::uint64_t h = splitmix64(seed ^ (std::uint64_t{octave} << 56));
  h = splitmix64(h ^ static_cast<std::uint64_t>(ix));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(iy) << 1));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smooth(double t) noexcept { return t * t * (3.0 - 2.0 * t); }

double value_noise(std::uint64_t seed, std::uint32_t octave, double x, double y) noexcept {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const double tx = smooth(x - fx);
  const double ty = smooth(y - fy);
  const double a = lattice(seed, octave, ix, iy);
  const double b = lattice(seed, octave, ix + 1, iy);
  const double c = lattice(seed, octave, ix, iy + 1);
  const double d = lattice(seed, octave, ix + 1, iy + 1);
  const double top = a + (b - a) * tx;
  const double bottom = c + (d - c) * tx;
  return top + (bottom - top) * ty;
}

std::uint8_t to_byte(double v) noexcept { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); }

}  // namespace

SentimentBand band_for(double s) noexcept {
  if (s >= 0.5) return SentimentBand::vibrant;
  if (s >= 0.0) return SentimentBand::serene;
  if (s >= -0.5) return SentimentBand::melancholic;
  return SentimentBand::stormy;
}

std::string_view descriptor(SentimentBand band) noexcept {
  switch (band) {
    case SentimentBand::vibrant: return "vibrant, luminous, joyful impressionist";
    case SentimentBand::serene: return "serene, soft watercolor";
    case SentimentBand::melancholic: return "muted, melancholic tones";
    case SentimentBand::stormy: return "dark, stormy expressionist";
  }
  return "";
}

std::string_view to_string(SentimentBand band) noexcept {
  switch (band) {
    case SentimentBand::vibrant: return "vibrant";
    case SentimentBand::serene: return "serene";
    case SentimentBand::melancholic: return "melancholic";
    case SentimentBand::stormy: return "stormy";
  }
  return "";
}

std::optional<SentimentBand> parse_band(std::string_view text) noexcept {
  for (const auto b : {SentimentBand::stormy, SentimentBand::melancholic, SentimentBand::serene, SentimentBand::vibrant}) {
    if (to_string(b) == text) return b;
  }
  return std::nullopt;
}

std::string_view to_string(GeneratorKind kind) noexcept {
  return kind == GeneratorKind::external ? "external" : "procedural";
}

std::optional<GeneratorKind> parse_generator_kind(std::string_view text) noexcept {
  if (text == "procedural") return GeneratorKind::procedural;
  if (text == "external") return GeneratorKind::external;
  return std::nullopt;
}

std::uint64_t prompt_seed(std::string_view poi_id, std::string_view prompt_text) noexcept {
  std::uint64_t h = fnv1a64(poi_id);
  h = fnv1a64("\x1f", h);
  return fnv1a64(prompt_text, h);
}

ArtPrompt build_prompt(const smda::PoiStats& poi, const std::filesystem::path& photo) {
  if (photo.empty()) throw DomainError("PoI " + poi.poi_id + " has no photo to generate from");
  if (!std::filesystem::is_regular_file(photo)) {
    throw NotFoundError("photo for PoI " + poi.poi_id + " not found: " + photo.string());
  }
  ArtPrompt p;
  p.poi_id = poi.poi_id;
  p.base_photo = photo;
  p.sentiment = std::clamp(poi.mean_sentiment, -1.0, 1.0);
  p.prompt_text = poi.name + ", " + std::string(descriptor(band_for(p.sentiment))) + ", painting";
  p.seed = prompt_seed(p.poi_id, p.prompt_text);
  return p;
}

std::string artwork_id(const ArtPrompt& prompt) { return "art-" + to_hex(prompt.seed); }

std::vector<std::uint8_t> ProceduralGenerator::render(const ArtPrompt& prompt) {
  const Palette pal = palette_for(prompt.band());
  constexpr std::array<double, 3> kScales{128.0, 48.0, 16.0};
  constexpr std::array<double, 3> kWeights{0.5, 0.3, 0.2};

  std::vector<std::uint8_t> rgb(std::size_t{kSize} * kSize * 3);
  std::size_t at = 0;
  for (std::uint32_t y = 0; y < kSize; ++y) {
    for (std::uint32_t x = 0; x < kSize; ++x) {
      const double t = (static_cast<double>(x) + static_cast<double>(y)) / (2.0 * (kSize - 1));
      double n = 0.0;
      for (std::uint32_t o = 0; o < kScales.size(); ++o) {
        n += kWeights[o] * value_noise(prompt.seed, o, x / kScales[o], y / kScales[o]);
      }
      const double shade = 0.65 + 0.7 * n;
      rgb[at++] = to_byte((pal.from.r + (pal.to.r - pal.from.r) * t) * shade);
      rgb[at++] = to_byte((pal.from.g + (pal.to.g - pal.from.g) * t) * shade);
      rgb[at++] = to_byte((pal.from.b + (pal.to.b - pal.from.b) * t) * shade);
    }
  }
  return png::encode_rgb(kSize, kSize, rgb);
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (const std::size_t rest = bytes.size() - i; rest > 0) {
    std::uint32_t v = std::uint32_t{bytes[i]} << 16;
    if (rest == 2) v |= std::uint32_t{bytes[i + 1]} << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

Artwork generate(const ArtPrompt& prompt, GeneratorAdapter& adapter, const std::string& use_case, Timestamp now) {
  Artwork art;
  art.image = adapter.render(prompt);
  const auto header = png::read_header(art.image);
  if (!header || header->width != ProceduralGenerator::kSize || header->height != ProceduralGenerator::kSize) {
    throw GenerationError("generator did not return a 512x512 PNG");
  }
  art.id = artwork_id(prompt);
  art.use_case = use_case;
  art.poi_id = prompt.poi_id;
  art.prompt = prompt;
  art.generator = adapter.kind();
  art.generated_at = now;
  return art;
}

Artwork generate_with_fallback(const ArtPrompt& prompt, GeneratorAdapter* external, const std::string& use_case,
                               Timestamp now, const std::function<void(const std::string&)>& log) {
  if (external != nullptr) {
    try {
      return generate(prompt, *external, use_case, now);
    } catch (const GenerationError& e) {
      if (log) log("external generator failed for " + prompt.poi_id + ", using procedural: " + e.what());
    }
  }
  ProceduralGenerator procedural;
  return generate(prompt, procedural, use_case, now);
}

Gallery::Gallery(Hooks hooks, Clock clock) : hooks_(std::move(hooks)), clock_(std::move(clock)) {}

std::mutex& Gallery::use_case_mutex(const std::string& use_case) {
  std::lock_guard lock(refresh_locks_mutex_);
  auto& slot = refresh_locks_[use_case];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void Gallery::insert_locked(std::shared_ptr<const Artwork> artwork) {
  by_key_.insert_or_assign({artwork->poi_id, artwork->prompt.band()}, artwork->id);
  by_id_.insert_or_assign(artwork->id, std::move(artwork));
}

GalleryDelta Gallery::refresh(const std::string& use_case, std::span<const smda::PoiStats> stats,
                              const PhotoLookup& photo_for, GeneratorAdapter* external) {
  std::lock_guard refresh_lock(use_case_mutex(use_case));

  GalleryDelta delta;
  std::vector<std::shared_ptr<const Artwork>> next;
  for (const auto& poi : smda::top_k_by_reviews(stats, 5)) {
    const ArtPrompt prompt = build_prompt(poi, photo_for(poi.poi_id));
    if (auto existing = find(poi.poi_id, prompt.band())) {
      delta.retained.push_back(existing->id);
      next.push_back(std::move(existing));
      continue;
    }
    auto art = std::make_shared<const Artwork>(generate_with_fallback(prompt, external, use_case, clock_(), hooks_.log));
    if (hooks_.on_artwork) hooks_.on_artwork(*art);
    {
      std::lock_guard lock(catalog_mutex_);
      insert_locked(art);
    }
    delta.created.push_back(art->id);
    next.push_back(std::move(art));
  }

  std::vector<std::string> ids;
  for (const auto& a : next) ids.push_back(a->id);
  if (hooks_.on_gallery) hooks_.on_gallery(use_case, ids);

  std::lock_guard lock(catalog_mutex_);
  current_[use_case] = std::make_shared<const std::vector<std::shared_ptr<const Artwork>>>(std::move(next));
  return delta;
}

Gallery::Snapshot Gallery::current(const std::string& use_case) const {
  std::lock_guard lock(catalog_mutex_);
  if (const auto found = current_.find(use_case); found != current_.end()) return found->second;
  return std::make_shared<const std::vector<std::shared_ptr<const Artwork>>>();
}

std::shared_ptr<const Artwork> Gallery::find(const std::string& artwork_id) const {
  std::lock_guard lock(catalog_mutex_);
  if (const auto found = by_id_.find(artwork_id); found != by_id_.end()) return found->second;
  return nullptr;
}

std::shared_ptr<const Artwork> Gallery::find(const std::string& poi_id, SentimentBand band) const {
  std::lock_guard lock(catalog_mutex_);
  const auto key = by_key_.find({poi_id, band});
  if (key == by_key_.end()) return nullptr;
  return by_id_.at(key->second);
}

std::size_t Gallery::artwork_count() const {
  std::lock_guard lock(catalog_mutex_);
  return by_id_.size();
}

void Gallery::restore_artwork(Artwork artwork) {
  std::lock_guard lock(catalog_mutex_);
  insert_locked(std::make_shared<const Artwork>(std::move(artwork)));
}

void Gallery::restore_current(const std::string& use_case, const std::vector<std::string>& artwork_ids) {
  std::lock_guard lock(catalog_mutex_);
  std::vector<std::shared_ptr<const Artwork>> items;
  for (const auto& id : artwork_ids) {
    const auto found = by_id_.find(id);
    if (found == by_id_.end()) throw NotFoundError("gallery references unknown artwork " + id);
    items.push_back(found->second);
  }
  current_[use_case] = std::make_shared<const std::vector<std::shared_ptr<const Artwork>>>(std::move(items));
}

}  // namespace arise::artworks
