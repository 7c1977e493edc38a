#include "arise/gamify.hpp"

#include "arise/errors.hpp"

namespace arise::gamify {

std::string_view to_string(EventType e) noexcept {
  switch (e) {
    case EventType::view_report: return "view_report";
    case EventType::open_poi_overlay: return "open_poi_overlay";
    case EventType::run_simulation: return "run_simulation";
    case EventType::view_artwork: return "view_artwork";
    case EventType::submit_report: return "submit_report";
  }
  return "";
}

EventType parse_event_type(std::string_view text) {
  for (const auto e : kEventTypes) {
    if (to_string(e) == text) return e;
  }
  throw DomainError("unknown event_type '" + std::string(text) + "'");
}

std::uint64_t PointsTable::value_of(EventType e) const {
  const auto found = points.find(e);
  return found == points.end() ? 0 : found->second;
}

void PointsTable::validate() const {
  if (level_thresholds.empty() || level_thresholds.front() != 0) {
    throw ConfigError("level thresholds must start at 0");
  }
  for (std::size_t i = 1; i < level_thresholds.size(); ++i) {
    if (level_thresholds[i] <= level_thresholds[i - 1]) throw ConfigError("level thresholds must increase");
  }
}

int level_for(std::uint64_t points, const PointsTable& table) {
  int level = 1;
  for (std::size_t i = 0; i < table.level_thresholds.size(); ++i) {
    if (points >= table.level_thresholds[i]) level = static_cast<int>(i) + 1;
  }
  return level;
}

std::uint64_t points_for(const std::map<EventType, std::uint64_t>& counts, const PointsTable& table) {
  std::uint64_t total = 0;
  for (const auto& [event, n] : counts) total += n * table.value_of(event);
  return total;
}

UserProfile apply_event(UserProfile profile, EventType event, const PointsTable& table) {
  ++profile.event_counts[event];
  profile.points += table.value_of(event);
  profile.level = level_for(profile.points, table);
  return profile;
}

RewardLedger::RewardLedger(PointsTable table, EventSink sink) : table_(std::move(table)), sink_(std::move(sink)) {
  table_.validate();
}

std::shared_ptr<RewardLedger::Slot> RewardLedger::slot_for(const std::string& user_id) {
  if (user_id.empty()) throw DomainError("user_id must be non-empty");
  std::lock_guard lock(users_mutex_);
  auto& slot = users_[user_id];
  if (!slot) {
    slot = std::make_shared<Slot>();
    slot->profile.user_id = user_id;
  }
  return slot;
}

UserProfile RewardLedger::record_event(const std::string& user_id, EventType event) {
  const auto slot = slot_for(user_id);
  std::lock_guard lock(slot->mutex);
  if (sink_) sink_(user_id, event);
  slot->profile = apply_event(std::move(slot->profile), event, table_);
  return slot->profile;
}

void RewardLedger::restore_event(const std::string& user_id, EventType event) {
  const auto slot = slot_for(user_id);
  std::lock_guard lock(slot->mutex);
  slot->profile = apply_event(std::move(slot->profile), event, table_);
}

std::optional<UserProfile> RewardLedger::profile(const std::string& user_id) const {
  std::shared_ptr<Slot> slot;
  {
    std::lock_guard lock(users_mutex_);
    const auto found = users_.find(user_id);
    if (found == users_.end()) return std::nullopt;
    slot = found->second;
  }
  std::lock_guard lock(slot->mutex);
  return slot->profile;
}

}  // namespace arise::gamify
