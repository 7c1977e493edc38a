#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace arise::geo {

// Mean Earth radius of the spherical model used for every distance.
inline constexpr double kEarthRadiusM = 6'371'000.0;

// A WGS84-ish latitude/longitude pair in degrees. Always in range: the
// constructor throws DomainError otherwise.
class GeoPoint {
 public:
  GeoPoint(double lat, double lon);

  static std::optional<GeoPoint> try_make(double lat, double lon) noexcept;
  static bool valid(double lat, double lon) noexcept;

  double lat() const noexcept { return lat_; }
  double lon() const noexcept { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  struct Unchecked {};
  GeoPoint(Unchecked, double lat, double lon) noexcept : lat_(lat), lon_(lon) {}

  double lat_;
  double lon_;
};

// Great-circle distance in meters (haversine form).
double haversine_distance(const GeoPoint& a, const GeoPoint& b) noexcept;

struct CellKey {
  std::int64_t row = 0;
  std::int64_t col = 0;
  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    return std::hash<std::int64_t>{}(k.row * 73856093LL ^ k.col * 19349663LL);
  }
};

struct Neighbor {
  std::string id;
  GeoPoint location;
  double distance_m;
};

// Uniform lat/lon grid of 0.01 degree cells. Cells do not wrap at the
// antimeridian, so queries straddling +/-180 degrees miss the far side.
//
// Thread-safe: queries take a shared lock, mutations an exclusive one.
class SpatialIndex {
 public:
  static constexpr double kCellSizeDeg = 0.01;

  static CellKey cell_of(const GeoPoint& p) noexcept;

  // Inserting an id that is already present moves it.
  void insert(const std::string& id, const GeoPoint& p);
  bool erase(const std::string& id);

  std::size_t size() const;
  std::optional<GeoPoint> location_of(const std::string& id) const;
  std::vector<std::string> ids_in_cell(const CellKey& key) const;

  // Items with haversine_distance(center, item) <= radius_m, sorted by
  // ascending distance then id. Throws DomainError for a negative or NaN
  // radius.
  std::vector<Neighbor> query_radius(const GeoPoint& center, double radius_m) const;

 private:
  struct Entry {
    std::string id;
    GeoPoint location;
  };

  void erase_locked(const std::string& id);

  mutable std::shared_mutex mutex_;
  std::unordered_map<CellKey, std::vector<Entry>, CellKeyHash> cells_;
  std::unordered_map<std::string, GeoPoint> locations_;
};

}  // namespace arise::geo
