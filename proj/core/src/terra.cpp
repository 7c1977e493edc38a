#include "arise/terra.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>

#include "arise/errors.hpp"

namespace arise::terra {
namespace {

struct RawGrid {
  std::size_t nrows = 0;
  std::size_t ncols = 0;
  double cell_size = 0.0;
  double nodata = 0.0;
  std::vector<double> values;
};

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

RawGrid parse_grid(std::string_view text, std::string_view what) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }

  // Header: four key/value pairs, on one line or spread over several.
  std::map<std::string, std::string_view> header;
  std::size_t li = 0;
  std::size_t header_tokens = 0;
  while (li < lines.size() && header_tokens < 8) {
    const auto f = fields_of(lines[li++]);
    if (f.size() % 2 != 0 || header_tokens + f.size() > 8) {
      throw ParseError(std::string(what) + " header must be 'ncols <n> nrows <n> cellsize <m> nodata <v>'");
    }
    for (std::size_t k = 0; k < f.size(); k += 2) {
      std::string key(f[k]);
      std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
      if (key == "nodata_value") key = "nodata";
      header[key] = f[k + 1];
    }
    header_tokens += f.size();
  }
  for (const char* key : {"ncols", "nrows", "cellsize", "nodata"}) {
    if (!header.contains(key)) throw ParseError(std::string(what) + " header lacks '" + key + "'");
  }

  RawGrid g;
  const auto count = [&](const char* key) {
    std::size_t n = 0;
    const auto s = header[key];
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc{} || ptr != s.data() + s.size() || n == 0) {
      throw ParseError(std::string(what) + " header value " + key + " must be a positive integer");
    }
    return n;
  };
  g.ncols = count("ncols");
  g.nrows = count("nrows");
  const auto cs = to_double(header["cellsize"]);
  if (!cs || *cs <= 0.0) throw ParseError(std::string(what) + " cellsize must be a positive number");
  g.cell_size = *cs;
  const auto nd = to_double(header["nodata"]);
  if (!nd) throw ParseError(std::string(what) + " nodata must be a number");
  g.nodata = *nd;

  g.values.reserve(g.nrows * g.ncols);
  std::size_t row = 0;
  for (; li < lines.size(); ++li) {
    const auto f = fields_of(lines[li]);
    if (f.empty()) continue;
    ++row;
    if (row > g.nrows) throw ParseError(std::string(what) + " has more rows than declared", row);
    if (f.size() != g.ncols) {
      throw ParseError(std::string(what) + " row has " + std::to_string(f.size()) + " values, expected " +
                           std::to_string(g.ncols),
                       row);
    }
    for (std::size_t c = 0; c < f.size(); ++c) {
      const auto v = to_double(f[c]);
      if (!v) throw ParseError(std::string(what) + " cell '" + std::string(f[c]) + "' is not a number", row, c + 1);
      g.values.push_back(*v);
    }
  }
  if (row != g.nrows) {
    throw ParseError(std::string(what) + " has " + std::to_string(row) + " rows, expected " + std::to_string(g.nrows),
                     row + 1);
  }
  return g;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

double HeightMap::min_elevation() const {
  double m = std::numeric_limits<double>::infinity();
  for (const double v : elevations.cells) {
    if (v != nodata) m = std::min(m, v);
  }
  return m;
}

double HeightMap::max_elevation() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const double v : elevations.cells) {
    if (v != nodata) m = std::max(m, v);
  }
  return m;
}

HeightMap parse_heightmap(std::string_view text) {
  RawGrid g = parse_grid(text, "heightmap");
  if (std::all_of(g.values.begin(), g.values.end(), [&](double v) { return v == g.nodata; })) {
    throw ParseError("heightmap has no valid cells");
  }
  HeightMap hm;
  hm.cell_size = g.cell_size;
  hm.nodata = g.nodata;
  hm.elevations.nrows = g.nrows;
  hm.elevations.ncols = g.ncols;
  hm.elevations.cells = std::move(g.values);
  return hm;
}

HeightMap load_heightmap(const std::filesystem::path& path) {
  try {
    return parse_heightmap(read_text(path));
  } catch (const ParseError& e) {
    throw e.with_context(path.string());
  }
}

void write_heightmap(std::ostream& out, const HeightMap& hm) {
  out << "ncols " << hm.ncols() << " nrows " << hm.nrows() << " cellsize " << format_double(hm.cell_size)
      << " nodata " << format_double(hm.nodata) << "\n";
  for (std::size_t r = 0; r < hm.nrows(); ++r) {
    for (std::size_t c = 0; c < hm.ncols(); ++c) {
      if (c) out << ' ';
      out << format_double(hm.elevations.at(r, c));
    }
    out << "\n";
  }
}

Grid<double> parse_coverage(std::string_view text) {
  RawGrid g = parse_grid(text, "coverage grid");
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const double v = g.values[i];
    if (v == g.nodata || v < 0.0 || v > 1.0) {
      throw ParseError("coverage value outside [0, 1]", i / g.ncols + 1, i % g.ncols + 1);
    }
  }
  Grid<double> out;
  out.nrows = g.nrows;
  out.ncols = g.ncols;
  out.cells = std::move(g.values);
  return out;
}

Grid<double> load_coverage(const std::filesystem::path& path) {
  try {
    return parse_coverage(read_text(path));
  } catch (const ParseError& e) {
    throw e.with_context(path.string());
  }
}

TerrainMesh mesh_from_heightmap(const HeightMap& hm, double vertical_exaggeration) {
  if (!(vertical_exaggeration > 0.0)) throw DomainError("vertical exaggeration must be positive");
  const std::size_t rows = hm.nrows();
  const std::size_t cols = hm.ncols();
  const double floor_z = hm.min_elevation();

  TerrainMesh mesh;
  mesh.vertices.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double z = hm.is_nodata(r, c) ? floor_z : hm.elevations.at(r, c);
      mesh.vertices.push_back(Vertex{static_cast<double>(c) * hm.cell_size, static_cast<double>(r) * hm.cell_size,
                                     z * vertical_exaggeration});
    }
  }
  if (rows >= 2 && cols >= 2) {
    mesh.triangles.reserve(2 * (rows - 1) * (cols - 1));
    for (std::size_t r = 0; r + 1 < rows; ++r) {
      for (std::size_t c = 0; c + 1 < cols; ++c) {
        const auto v00 = static_cast<std::uint32_t>(r * cols + c);
        const auto v01 = v00 + 1;
        const auto v10 = static_cast<std::uint32_t>((r + 1) * cols + c);
        const auto v11 = v10 + 1;
        mesh.triangles.push_back({v00, v01, v11});
        mesh.triangles.push_back({v00, v11, v10});
      }
    }
  }
  return mesh;
}

void write_obj(std::ostream& out, const TerrainMesh& mesh) {
  for (const auto& v : mesh.vertices) {
    out << "v " << format_double(v.x) << ' ' << format_double(v.y) << ' ' << format_double(v.z) << "\n";
  }
  for (const auto& t : mesh.triangles) {
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << "\n";
  }
}

InundationMask flood_extent(const HeightMap& hm, double water_level, std::span<const CellIndex> seeds) {
  const std::size_t rows = hm.nrows();
  const std::size_t cols = hm.ncols();
  for (const auto& s : seeds) {
    if (s.row >= rows || s.col >= cols) {
      throw DomainError("flood seed (" + std::to_string(s.row) + ", " + std::to_string(s.col) +
                        ") outside " + std::to_string(rows) + "x" + std::to_string(cols) + " grid");
    }
  }

  InundationMask mask(rows, cols, 0);
  const auto floodable = [&](std::size_t r, std::size_t c) {
    return !hm.is_nodata(r, c) && hm.elevations.at(r, c) <= water_level;
  };

  std::queue<CellIndex> frontier;
  for (const auto& s : seeds) {
    if (floodable(s.row, s.col) && !mask.at(s.row, s.col)) {
      mask.at(s.row, s.col) = 1;
      frontier.push(s);
    }
  }
  while (!frontier.empty()) {
    const auto [r, c] = frontier.front();
    frontier.pop();
    const auto visit = [&](std::size_t nr, std::size_t nc) {
      if (!mask.at(nr, nc) && floodable(nr, nc)) {
        mask.at(nr, nc) = 1;
        frontier.push({nr, nc});
      }
    };
    if (r > 0) visit(r - 1, c);
    if (r + 1 < rows) visit(r + 1, c);
    if (c > 0) visit(r, c - 1);
    if (c + 1 < cols) visit(r, c + 1);
  }
  return mask;
}

Grid<double> vegetation_response(const IndicatorState& state, const InundationMask& mask,
                                 const VegetationModel& model) {
  const auto& base = state.veg_base;
  if (base.nrows != mask.nrows || base.ncols != mask.ncols) {
    throw DomainError("vegetation grid and inundation mask differ in size");
  }
  const double warming = model.alpha * std::max(state.temp_delta, 0.0);
  Grid<double> out(base.nrows, base.ncols, 0.0);
  for (std::size_t i = 0; i < base.cells.size(); ++i) {
    const double flooded = mask.cells[i] ? model.beta : 0.0;
    out.cells[i] = std::clamp(base.cells[i] - warming - flooded, 0.0, 1.0);
  }
  return out;
}

ScenarioResult simulate(const HeightMap& hm, const IndicatorState& state, std::span<const CellIndex> seeds,
                        const VegetationModel& model) {
  ScenarioResult result;
  result.mask = flood_extent(hm, state.water_level, seeds);
  result.coverage = vegetation_response(state, result.mask, model);
  result.summary.inundated_cell_count =
      static_cast<std::size_t>(std::count(result.mask.cells.begin(), result.mask.cells.end(), std::uint8_t{1}));
  result.summary.inundated_area_m2 =
      static_cast<double>(result.summary.inundated_cell_count) * hm.cell_size * hm.cell_size;
  if (!result.coverage.cells.empty()) {
    result.summary.mean_coverage = std::accumulate(result.coverage.cells.begin(), result.coverage.cells.end(), 0.0) /
                                   static_cast<double>(result.coverage.cells.size());
  }
  return result;
}

}  // namespace arise::terra
