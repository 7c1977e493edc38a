#include "support.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <stdexcept>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>
#include <png.h>

namespace arise::testing {
namespace fs = std::filesystem;

fs::path data_dir() { return ARISE_DATA_DIR; }
fs::path test_data_dir() { return ARISE_TEST_DATA_DIR; }

std::optional<fs::path> cli_path() {
#ifdef ARISE_CLI_PATH
  return fs::path(ARISE_CLI_PATH);
#else
  return std::nullopt;
#endif
}

TempDir::TempDir() {
  std::string pattern = (fs::temp_directory_path() / "arise-test-XXXXXX").string();
  if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path write_fixture_config(const fs::path& dir, const nlohmann::json& overrides) {
  const auto uc = data_dir() / "use_cases" / "piedmont";
  nlohmann::json cfg{
      {"listen", "127.0.0.1:0"},
      {"data_dir", (dir / "store").string()},
      {"lexicon_path", (data_dir() / "lexicon" / "en.tsv").string()},
      {"refresh_period_h", 0},
      {"use_cases",
       {{{"name", "piedmont"},
         {"poi_registry_path", (uc / "pois.json").string()},
         {"review_fixture_path", (uc / "reviews.jsonl").string()},
         {"heightmap_path", (uc / "heightmap.asc").string()},
         {"veg_base_path", (uc / "veg_base.asc").string()},
         {"flood_seeds", {{0, 30}, {39, 30}}}}}},
  };
  if (!overrides.is_null()) cfg.merge_patch(overrides);
  const auto path = dir / "config.json";
  write_file(path, cfg.dump(2));
  return path;
}

double chord_distance_oracle(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kPi = 3.14159265358979323846;
  const auto unit = [](double lat, double lon) {
    const double phi = lat * kPi / 180.0;
    const double lambda = lon * kPi / 180.0;
    return std::array<double, 3>{std::cos(phi) * std::cos(lambda), std::cos(phi) * std::sin(lambda), std::sin(phi)};
  };
  const auto a = unit(lat1, lon1);
  const auto b = unit(lat2, lon2);
  const double chord = std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
  return 6371000.0 * 2.0 * std::asin(std::min(1.0, chord / 2.0));
}

terra::InundationMask flood_oracle(const terra::HeightMap& hm, double level, std::span<const terra::CellIndex> seeds) {
  const std::size_t rows = hm.nrows();
  const std::size_t cols = hm.ncols();
  std::vector<std::size_t> parent(rows * cols);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&parent](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  const auto eligible = [&](std::size_t r, std::size_t c) {
    return !hm.is_nodata(r, c) && hm.elevations.at(r, c) <= level;
  };
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (!eligible(r, c)) continue;
      if (c + 1 < cols && eligible(r, c + 1)) parent[find(r * cols + c)] = find(r * cols + c + 1);
      if (r + 1 < rows && eligible(r + 1, c)) parent[find(r * cols + c)] = find((r + 1) * cols + c);
    }
  }
  std::vector<bool> wet_root(rows * cols, false);
  for (const auto& s : seeds) {
    if (eligible(s.row, s.col)) wet_root[find(s.row * cols + s.col)] = true;
  }
  terra::InundationMask mask(rows, cols, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (eligible(r, c) && wet_root[find(r * cols + c)]) mask.at(r, c) = 1;
    }
  }
  return mask;
}

terra::HeightMap random_heightmap(std::mt19937_64& rng, std::size_t nrows, std::size_t ncols, double nodata_fraction) {
  std::uniform_real_distribution<double> elevation(0.0, 10.0);
  std::bernoulli_distribution hole(nodata_fraction);
  terra::HeightMap hm;
  hm.cell_size = 5.0;
  hm.nodata = -9999.0;
  hm.elevations = terra::Grid<double>(nrows, ncols);
  for (auto& z : hm.elevations.cells) z = hole(rng) ? hm.nodata : std::round(elevation(rng) * 10.0) / 10.0;
  return hm;
}

std::optional<DecodedPng> decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) return std::nullopt;
  DecodedPng out;
  out.width = image.width;
  out.height = image.height;
  out.channels = PNG_IMAGE_SAMPLE_CHANNELS(image.format);
  image.format = PNG_FORMAT_RGB;
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    return std::nullopt;
  }
  return out;
}

namespace {

std::vector<char*> c_argv(const std::vector<std::string>& argv) {
  std::vector<char*> out;
  for (const auto& a : argv) out.push_back(const_cast<char*>(a.c_str()));
  out.push_back(nullptr);
  return out;
}

void apply_env(const std::map<std::string, std::string>& env) {
  for (const auto& [name, value] : env) {
    if (value.empty()) {
      unsetenv(name.c_str());
    } else {
      setenv(name.c_str(), value.c_str(), 1);
    }
  }
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const std::map<std::string, std::string>& env) {
  int out_pipe[2];
  int err_pipe[2];
  if (pipe2(out_pipe, O_CLOEXEC) != 0 || pipe2(err_pipe, O_CLOEXEC) != 0) throw std::runtime_error("pipe failed");
  const auto args = c_argv(argv);
  const pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(out_pipe[0]);
    close(err_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[1]);
    apply_env(env);
    execv(args[0], args.data());
    _exit(127);
  }
  close(out_pipe[1]);
  close(err_pipe[1]);

  ProcessResult result;
  pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
  std::string* sinks[2] = {&result.out, &result.err};
  int open_fds = 2;
  char buf[4096];
  while (open_fds > 0) {
    if (poll(fds, 2, -1) < 0) break;
    for (int i = 0; i < 2; ++i) {
      if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      const ssize_t n = read(fds[i].fd, buf, sizeof buf);
      if (n > 0) {
        sinks[i]->append(buf, static_cast<std::size_t>(n));
      } else {
        close(fds[i].fd);
        fds[i].fd = -1;
        --open_fds;
      }
    }
  }
  int status = 0;
  waitpid(pid, &status, 0);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return result;
}

ChildProcess::ChildProcess(const std::vector<std::string>& argv, const std::map<std::string, std::string>& env) {
  int out_pipe[2];
  if (pipe2(out_pipe, O_CLOEXEC) != 0) throw std::runtime_error("pipe failed");
  const auto args = c_argv(argv);
  pid_ = fork();
  if (pid_ < 0) throw std::runtime_error("fork failed");
  if (pid_ == 0) {
    dup2(out_pipe[1], STDOUT_FILENO);
    const int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, STDERR_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    apply_env(env);
    execv(args[0], args.data());
    _exit(127);
  }
  close(out_pipe[1]);
  stdout_fd_ = out_pipe[0];
}

ChildProcess::~ChildProcess() {
  kill_hard();
  if (stdout_fd_ >= 0) close(stdout_fd_);
}

void ChildProcess::kill_hard() {
  if (pid_ <= 0) return;
  kill(pid_, SIGKILL);
  int status = 0;
  waitpid(pid_, &status, 0);
  pid_ = -1;
}

std::optional<std::string> ChildProcess::wait_for_line(const std::string& prefix, int timeout_ms) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  for (;;) {
    std::size_t start = 0;
    for (std::size_t nl; (nl = buffer_.find('\n', start)) != std::string::npos; start = nl + 1) {
      const auto line = buffer_.substr(start, nl - start);
      if (line.starts_with(prefix)) {
        buffer_.erase(0, nl + 1);
        return line;
      }
    }
    buffer_.erase(0, start);
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd fd{stdout_fd_, POLLIN, 0};
    if (poll(&fd, 1, static_cast<int>(left.count())) <= 0) continue;
    char buf[1024];
    const ssize_t n = read(stdout_fd_, buf, sizeof buf);
    if (n <= 0) return std::nullopt;
    buffer_.append(buf, static_cast<std::size_t>(n));
  }
}

HttpReply http_get(int port, const std::string& path) {
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(30, 0);
  const auto res = client.Get(path);
  if (!res) return {};
  return {res->status, res->get_header_value("Content-Type"), res->body};
}

HttpReply http_post(int port, const std::string& path, const std::string& body, const std::string& content_type) {
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(30, 0);
  const auto res = client.Post(path, body, content_type);
  if (!res) return {};
  return {res->status, res->get_header_value("Content-Type"), res->body};
}

std::vector<nlohmann::json> happy_path_messages(const std::string& session, double lat, double lon) {
  const auto text = [&](const std::string& t) { return nlohmann::json{{"session_id", session}, {"kind", "text"}, {"text", t}}; };
  const auto command = [&](const std::string& t) {
    return nlohmann::json{{"session_id", session}, {"kind", "command"}, {"text", t}};
  };
  return {command("/report"),
          {{"session_id", session}, {"kind", "location"}, {"location", {{"lat", lat}, {"lon", lon}}}},
          text("flood"),
          text("River overflowing onto the footpath"),
          {{"session_id", session}, {"kind", "photo"}, {"media_uri", "tg://photo/" + session}},
          command("/skip"),
          text("water_depth 0.4 m"),
          text("structural 3"),
          text("foundations"),
          text("yes")};
}

std::map<std::string, smda::PoiStats> module_poi_stats(const ServiceConfig& config) {
  const auto lexicon = smda::Lexicon::load(config.lexicon_path);
  std::map<std::string, smda::PoiStats> out;
  for (const auto& uc : config.use_cases) {
    const auto pois = smda::load_poi_registry(uc.poi_registry_path);
    const auto fixture = smda::read_review_fixture(uc.review_fixture_path);
    for (auto& s : smda::aggregate_use_case(pois, fixture.reviews, lexicon)) out.emplace(s.poi_id, std::move(s));
  }
  return out;
}

}  // namespace arise::testing
