#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace arise::gamify {

enum class EventType { view_report, open_poi_overlay, run_simulation, view_artwork, submit_report };

inline constexpr std::array kEventTypes{EventType::view_report, EventType::open_poi_overlay,
                                        EventType::run_simulation, EventType::view_artwork,
                                        EventType::submit_report};

std::string_view to_string(EventType e) noexcept;
// Throws DomainError for an unknown name.
EventType parse_event_type(std::string_view text);

struct PointsTable {
  std::map<EventType, std::uint64_t> points{{EventType::view_report, 1},
                                            {EventType::open_poi_overlay, 2},
                                            {EventType::view_artwork, 2},
                                            {EventType::run_simulation, 5},
                                            {EventType::submit_report, 10}};
  // thresholds[i] is the minimum score of level i + 1; must start at 0 and
  // increase strictly.
  std::vector<std::uint64_t> level_thresholds{0, 50, 150, 400};

  std::uint64_t value_of(EventType e) const;
  // Throws ConfigError.
  void validate() const;
};

struct UserProfile {
  std::string user_id;
  std::uint64_t points = 0;
  int level = 1;
  std::map<EventType, std::uint64_t> event_counts;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

int level_for(std::uint64_t points, const PointsTable& table);

// points and level recomputed from event_counts.
std::uint64_t points_for(const std::map<EventType, std::uint64_t>& counts, const PointsTable& table);

UserProfile apply_event(UserProfile profile, EventType event, const PointsTable& table);

// Per-user reward ledger. Events of one user apply in order; different users
// proceed in parallel. `sink` persists an event before it is applied.
class RewardLedger {
 public:
  using EventSink = std::function<void(const std::string& user_id, EventType event)>;

  explicit RewardLedger(PointsTable table = {}, EventSink sink = {});

  UserProfile record_event(const std::string& user_id, EventType event);
  std::optional<UserProfile> profile(const std::string& user_id) const;
  // Replay without invoking the sink.
  void restore_event(const std::string& user_id, EventType event);

  const PointsTable& table() const noexcept { return table_; }

 private:
  struct Slot {
    std::mutex mutex;
    UserProfile profile;
  };

  std::shared_ptr<Slot> slot_for(const std::string& user_id);

  PointsTable table_;
  EventSink sink_;
  mutable std::mutex users_mutex_;
  std::unordered_map<std::string, std::shared_ptr<Slot>> users_;
};

}  // namespace arise::gamify
