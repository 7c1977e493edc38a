#include "arise/geo.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "arise/errors.hpp"

namespace arise::geo {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::int64_t cell_coord(double deg) noexcept {
  return static_cast<std::int64_t>(std::floor(deg / SpatialIndex::kCellSizeDeg));
}

}  // namespace

GeoPoint::GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {
  if (!valid(lat, lon)) {
    throw DomainError("coordinates out of range: lat=" + std::to_string(lat) +
                      " lon=" + std::to_string(lon));
  }
}

bool GeoPoint::valid(double lat, double lon) noexcept {
  return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0;
}

std::optional<GeoPoint> GeoPoint::try_make(double lat, double lon) noexcept {
  if (!valid(lat, lon)) return std::nullopt;
  return GeoPoint(Unchecked{}, lat, lon);
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) noexcept {
  const double lat1 = a.lat() * kDegToRad;
  const double lat2 = b.lat() * kDegToRad;
  const double dlat = lat2 - lat1;
  const double dlon = (b.lon() - a.lon()) * kDegToRad;
  const double s_lat = std::sin(dlat / 2.0);
  const double s_lon = std::sin(dlon / 2.0);
  double h = s_lat * s_lat + std::cos(lat1) * std::cos(lat2) * s_lon * s_lon;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

CellKey SpatialIndex::cell_of(const GeoPoint& p) noexcept {
  return CellKey{cell_coord(p.lat()), cell_coord(p.lon())};
}

void SpatialIndex::insert(const std::string& id, const GeoPoint& p) {
  std::unique_lock lock(mutex_);
  erase_locked(id);
  cells_[cell_of(p)].push_back(Entry{id, p});
  locations_.insert_or_assign(id, p);
}

bool SpatialIndex::erase(const std::string& id) {
  std::unique_lock lock(mutex_);
  if (!locations_.contains(id)) return false;
  erase_locked(id);
  return true;
}

void SpatialIndex::erase_locked(const std::string& id) {
  const auto found = locations_.find(id);
  if (found == locations_.end()) return;
  const auto cell = cells_.find(cell_of(found->second));
  if (cell != cells_.end()) {
    std::erase_if(cell->second, [&](const Entry& e) { return e.id == id; });
    if (cell->second.empty()) cells_.erase(cell);
  }
  locations_.erase(found);
}

std::size_t SpatialIndex::size() const {
  std::shared_lock lock(mutex_);
  return locations_.size();
}

std::optional<GeoPoint> SpatialIndex::location_of(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto found = locations_.find(id);
  if (found == locations_.end()) return std::nullopt;
  return found->second;
}

std::vector<std::string> SpatialIndex::ids_in_cell(const CellKey& key) const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  if (const auto cell = cells_.find(key); cell != cells_.end()) {
    for (const auto& e : cell->second) ids.push_back(e.id);
  }
  return ids;
}

std::vector<Neighbor> SpatialIndex::query_radius(const GeoPoint& center, double radius_m) const {
  if (!(radius_m >= 0.0)) throw DomainError("query radius must be non-negative");

  // Bounding box of the spherical cap. Any point within angular distance
  // `ang` differs from the center by at most `ang` in latitude and by
  // asin(sin(ang) / cos(lat)) in longitude, unless the cap covers a pole.
  const double ang = radius_m / kEarthRadiusM;
  double lat_lo = -90.0;
  double lat_hi = 90.0;
  double lon_lo = -180.0;
  double lon_hi = 180.0;
  if (ang < std::numbers::pi) {
    lat_lo = std::max(-90.0, center.lat() - ang * kRadToDeg);
    lat_hi = std::min(90.0, center.lat() + ang * kRadToDeg);
    const double cos_lat = std::cos(center.lat() * kDegToRad);
    const bool covers_pole = lat_lo <= -90.0 || lat_hi >= 90.0;
    if (!covers_pole && std::sin(ang) < cos_lat) {
      const double dlon = std::asin(std::sin(ang) / cos_lat) * kRadToDeg;
      lon_lo = std::max(-180.0, center.lon() - dlon);
      lon_hi = std::min(180.0, center.lon() + dlon);
    }
  }
  // One cell of padding absorbs rounding in the box arithmetic.
  const std::int64_t row_lo = cell_coord(lat_lo) - 1;
  const std::int64_t row_hi = cell_coord(lat_hi) + 1;
  const std::int64_t col_lo = cell_coord(lon_lo) - 1;
  const std::int64_t col_hi = cell_coord(lon_hi) + 1;

  std::vector<Neighbor> out;
  std::shared_lock lock(mutex_);

  const auto scan = [&](const std::vector<Entry>& entries) {
    for (const auto& e : entries) {
      const double d = haversine_distance(center, e.location);
      if (d <= radius_m) out.push_back(Neighbor{e.id, e.location, d});
    }
  };

  const auto box_cells = static_cast<double>(row_hi - row_lo + 1) * static_cast<double>(col_hi - col_lo + 1);
  if (box_cells > static_cast<double>(cells_.size())) {
    for (const auto& [key, entries] : cells_) {
      if (key.row >= row_lo && key.row <= row_hi && key.col >= col_lo && key.col <= col_hi) scan(entries);
    }
  } else {
    for (std::int64_t r = row_lo; r <= row_hi; ++r) {
      for (std::int64_t c = col_lo; c <= col_hi; ++c) {
        if (const auto cell = cells_.find(CellKey{r, c}); cell != cells_.end()) scan(cell->second);
      }
    }
  }
  lock.unlock();

  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.distance_m != b.distance_m) return a.distance_m < b.distance_m;
    return a.id < b.id;
  });
  return out;
}

}  // namespace arise::geo
