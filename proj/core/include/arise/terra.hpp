#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

// Heightmaps, terrain meshes and the climate what-if kernel.
namespace arise::terra {

// Row-major grid.
template <typename T>
struct Grid {
  std::size_t nrows = 0;
  std::size_t ncols = 0;
  std::vector<T> cells;

  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{}) : nrows(rows), ncols(cols), cells(rows * cols, fill) {}

  T& at(std::size_t r, std::size_t c) { return cells[r * ncols + c]; }
  const T& at(std::size_t r, std::size_t c) const { return cells[r * ncols + c]; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

struct HeightMap {
  double cell_size = 1.0;  // meters
  double nodata = -9999.0;
  Grid<double> elevations;

  std::size_t nrows() const noexcept { return elevations.nrows; }
  std::size_t ncols() const noexcept { return elevations.ncols; }
  bool is_nodata(std::size_t r, std::size_t c) const noexcept { return elevations.at(r, c) == nodata; }
  double min_elevation() const;  // over non-nodata cells
  double max_elevation() const;
};

// ASCII grid:
//   ncols <n> nrows <n> cellsize <m> nodata <v>
// followed by nrows lines of ncols whitespace-separated numbers. Throws
// ParseError with the 1-based grid row and column of the first problem.
HeightMap parse_heightmap(std::string_view text);
HeightMap load_heightmap(const std::filesystem::path& path);
// Shortest round-trip formatting: parse(write(hm)) reproduces hm bit for bit.
void write_heightmap(std::ostream& out, const HeightMap& hm);

// Coverage fractions in the same ASCII grid layout. Every value must lie in
// [0, 1]; nodata is not allowed.
Grid<double> load_coverage(const std::filesystem::path& path);
Grid<double> parse_coverage(std::string_view text);

struct Vertex {
  double x, y, z;
};

struct TerrainMesh {
  std::vector<Vertex> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
};

// One vertex per grid node at (col * cell_size, row * cell_size,
// elevation * exaggeration); two counter-clockwise triangles (seen from +z)
// per cell. Nodata nodes sit at the minimum valid elevation.
TerrainMesh mesh_from_heightmap(const HeightMap& hm, double vertical_exaggeration = 1.0);

// Wavefront-style "v x y z" and "f i j k" lines, 1-based indices.
void write_obj(std::ostream& out, const TerrainMesh& mesh);

struct CellIndex {
  std::size_t row;
  std::size_t col;
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

using InundationMask = Grid<std::uint8_t>;

// Cells reachable from a seed through 4-connected cells whose elevation is
// <= water_level. Nodata cells block; a seed above the level floods nothing.
// Throws DomainError for a seed outside the grid.
InundationMask flood_extent(const HeightMap& hm, double water_level, std::span<const CellIndex> seeds);

inline constexpr double kNoWater = -std::numeric_limits<double>::infinity();

struct IndicatorState {
  double water_level = kNoWater;  // absolute elevation of the water surface
  double temp_delta = 0.0;        // degrees C relative to baseline
  Grid<double> veg_base;          // coverage fractions in [0, 1]
};

// Illustrative vegetation model; not calibrated against observations.
struct VegetationModel {
  double alpha = 0.05;  // coverage lost per degree of warming
  double beta = 1.0;    // coverage lost when inundated
};

// clamp(base - alpha * max(temp_delta, 0) - beta * inundated, 0, 1)
Grid<double> vegetation_response(const IndicatorState& state, const InundationMask& mask,
                                 const VegetationModel& model = {});

struct ScenarioSummary {
  std::size_t inundated_cell_count = 0;
  double inundated_area_m2 = 0.0;
  double mean_coverage = 0.0;
};

struct ScenarioResult {
  InundationMask mask;
  Grid<double> coverage;
  ScenarioSummary summary;
};

ScenarioResult simulate(const HeightMap& hm, const IndicatorState& state, std::span<const CellIndex> seeds,
                        const VegetationModel& model = {});

}  // namespace arise::terra
