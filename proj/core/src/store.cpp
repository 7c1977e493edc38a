#include "arise/store.hpp"

#include <iterator>
#include <sstream>

#include "arise/errors.hpp"

namespace arise::store {
namespace fs = std::filesystem;

JsonlLog::JsonlLog(fs::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path(), ec);
  if (ec) throw StoreError("cannot create directory for " + path_.string() + ": " + ec.message());

  if (fs::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    const std::string content{std::istreambuf_iterator<char>(in), {}};
    if (!content.empty() && content.back() != '\n') {
      const auto last_newline = content.rfind('\n');
      const auto keep = last_newline == std::string::npos ? 0 : last_newline + 1;
      in.close();
      fs::resize_file(path_, keep, ec);
      if (ec) throw StoreError("cannot truncate torn record in " + path_.string() + ": " + ec.message());
    }
  }

  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw StoreError("cannot open " + path_.string() + " for appending");
}

void JsonlLog::append(const nlohmann::json& record) {
  const std::string line = record.dump() + "\n";
  std::lock_guard lock(mutex_);
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.flush();
  if (!out_) throw StoreError("write to " + path_.string() + " failed");
}

std::size_t JsonlLog::replay(const std::function<void(const nlohmann::json&)>& fn) const {
  std::lock_guard lock(mutex_);
  std::ifstream in(path_, std::ios::binary);
  if (!in) return 0;
  std::string line;
  std::size_t line_no = 0;
  std::size_t records = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw StoreError(path_.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
    fn(record);
    ++records;
  }
  return records;
}

Store::Store(const fs::path& data_dir)
    : data_dir_(data_dir),
      reports_(data_dir / "reports.jsonl"),
      artworks_(data_dir / "artworks.jsonl"),
      profiles_(data_dir / "profiles.jsonl"),
      poi_stats_(data_dir / "poi_stats.jsonl") {
  std::error_code ec;
  fs::create_directories(data_dir_ / "artworks", ec);
  if (ec) throw StoreError("cannot create " + (data_dir_ / "artworks").string() + ": " + ec.message());
}

fs::path Store::image_path(const std::string& artwork_id) const { return data_dir_ / "artworks" / (artwork_id + ".png"); }

void Store::write_image(const std::string& artwork_id, std::span<const std::uint8_t> png) {
  const auto target = image_path(artwork_id);
  auto tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
    if (!out) throw StoreError("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw StoreError("cannot move image into place at " + target.string() + ": " + ec.message());
}

std::vector<std::uint8_t> Store::read_image(const std::string& artwork_id) const {
  std::ifstream in(image_path(artwork_id), std::ios::binary);
  if (!in) throw NotFoundError("image for artwork " + artwork_id + " missing");
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace arise::store
