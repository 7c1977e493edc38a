#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace arise::store {

// Append-only JSON-lines file with a single serialized writer. Each record
// is one line, flushed before append() returns.
class JsonlLog {
 public:
  // Creates the file (and parent directories) if needed. A torn final line
  // left by an interrupted append is cut off.
  explicit JsonlLog(std::filesystem::path path);

  JsonlLog(const JsonlLog&) = delete;
  JsonlLog& operator=(const JsonlLog&) = delete;

  void append(const nlohmann::json& record);

  // Calls `fn` for every record in file order. Throws StoreError on a
  // malformed line.
  std::size_t replay(const std::function<void(const nlohmann::json&)>& fn) const;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::ofstream out_;
};

// The service's on-disk state under one data directory:
//   reports.jsonl    one record per submitted report
//   artworks.jsonl   {"type":"artwork",...} and {"type":"gallery",...} records
//   profiles.jsonl   gamification events
//   poi_stats.jsonl  one snapshot per ingest run
//   artworks/<id>.png
class Store {
 public:
  explicit Store(const std::filesystem::path& data_dir);

  JsonlLog& reports() noexcept { return reports_; }
  JsonlLog& artworks() noexcept { return artworks_; }
  JsonlLog& profiles() noexcept { return profiles_; }
  JsonlLog& poi_stats() noexcept { return poi_stats_; }

  std::filesystem::path image_path(const std::string& artwork_id) const;
  // Written to a temporary name and renamed into place.
  void write_image(const std::string& artwork_id, std::span<const std::uint8_t> png);
  std::vector<std::uint8_t> read_image(const std::string& artwork_id) const;

  const std::filesystem::path& data_dir() const noexcept { return data_dir_; }

 private:
  std::filesystem::path data_dir_;
  JsonlLog reports_;
  JsonlLog artworks_;
  JsonlLog profiles_;
  JsonlLog poi_stats_;
};

}  // namespace arise::store
