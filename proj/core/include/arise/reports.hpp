#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "arise/geo.hpp"
#include "arise/time.hpp"

namespace arise::reports {

enum class HazardType { fire, flood, storm, landslide, erosion, vandalism, other };

inline constexpr std::array kHazardTypes{HazardType::fire,    HazardType::flood,     HazardType::storm,
                                         HazardType::landslide, HazardType::erosion, HazardType::vandalism,
                                         HazardType::other};

std::string_view to_string(HazardType t) noexcept;
// Case-insensitive, surrounding whitespace ignored.
std::optional<HazardType> parse_hazard_type(std::string_view text) noexcept;

enum class MediaKind { photo, video, voice };
std::string_view to_string(MediaKind k) noexcept;
std::optional<MediaKind> parse_media_kind(std::string_view text) noexcept;

struct MediaRef {
  MediaKind kind;
  std::string uri;
  friend bool operator==(const MediaRef&, const MediaRef&) = default;
};

struct Measurement {
  std::string measurement_type;
  double value;
  std::string unit;
  friend bool operator==(const Measurement&, const Measurement&) = default;
};

struct ImpactIndicator {
  std::string indicator;
  int severity;  // 1..5
  friend bool operator==(const ImpactIndicator&, const ImpactIndicator&) = default;
};

struct HazardReport {
  std::string id;
  geo::GeoPoint location{0.0, 0.0};
  HazardType hazard_type = HazardType::other;
  std::string description;
  std::vector<MediaRef> media;
  std::vector<Measurement> measurements;
  std::vector<ImpactIndicator> impact_indicators;
  std::vector<std::string> risk_elements;
  Timestamp created_at{};
  std::string reporter;

  friend bool operator==(const HazardReport&, const HazardReport&) = default;
};

// Throws DomainError when a persisted report would break its invariants.
void validate(const HazardReport& report);

// Co-created vocabularies offered by the chat flow. Risk elements are free
// text unless `risk_elements` is non-empty.
struct Vocabulary {
  std::vector<std::string> measurement_types{"water_depth", "wind_speed", "crack_width"};
  std::vector<std::string> impact_indicators{"structural", "access", "visitor_safety"};
  std::vector<std::string> risk_elements{};
};

enum class ChatState {
  idle,
  await_location,
  await_hazard_type,
  await_description,
  await_media,
  await_measurements,
  await_impact,
  await_risk,
  confirm,
};

inline constexpr std::array kChatStates{ChatState::idle,          ChatState::await_location,
                                        ChatState::await_hazard_type, ChatState::await_description,
                                        ChatState::await_media,   ChatState::await_measurements,
                                        ChatState::await_impact,  ChatState::await_risk,
                                        ChatState::confirm};

std::string_view to_string(ChatState s) noexcept;

struct ReportDraft {
  std::optional<geo::GeoPoint> location;
  std::optional<HazardType> hazard_type;
  std::optional<std::string> description;
  std::vector<MediaRef> media;
  std::vector<Measurement> measurements;
  std::vector<ImpactIndicator> impact_indicators;
  std::vector<std::string> risk_elements;

  friend bool operator==(const ReportDraft&, const ReportDraft&) = default;
};

struct ChatSession {
  std::string session_id;
  ChatState state = ChatState::idle;
  ReportDraft draft;
  Timestamp updated_at{};
};

enum class MessageKind { text, location, photo, video, voice, command };
std::string_view to_string(MessageKind k) noexcept;
std::optional<MessageKind> parse_message_kind(std::string_view text) noexcept;

// Raw coordinates as received on the wire; range checks happen in the flow
// so that an out-of-range position becomes a validation reply.
struct LatLon {
  double lat;
  double lon;
};

struct ChatMessage {
  std::string session_id;
  MessageKind kind = MessageKind::text;
  std::optional<std::string> text;
  std::optional<LatLon> location;
  std::optional<std::string> media_uri;
};

// Returns a description of the first structural problem, e.g. a location
// message without a location field.
std::optional<std::string> wire_problem(const ChatMessage& msg);

struct BotReply {
  std::string session_id;
  ChatState state = ChatState::idle;
  std::string text;
  std::vector<std::string> options;
  bool valid = true;  // false for validation replies that did not advance
  std::optional<std::string> report_id;
};

// What a message means in the state it arrives in. The transition table is
// defined over these classes only, which keeps it small enough to enumerate.
enum class InputClass {
  start,        // "/report" in idle
  cancel,       // "/cancel" anywhere but idle
  accepted,     // value for the current step parsed and stored
  media_added,  // photo/video/voice while collecting media
  skip,         // "/skip" (or "/done") on an optional step
  confirm_yes,
  confirm_no,
  invalid,      // anything else: validation reply, no state change
};

inline constexpr std::array kInputClasses{InputClass::start,       InputClass::cancel,     InputClass::accepted,
                                          InputClass::media_added, InputClass::skip,       InputClass::confirm_yes,
                                          InputClass::confirm_no,  InputClass::invalid};

// The transition table. nullopt means the class cannot occur in `from`.
std::optional<ChatState> next_state(ChatState from, InputClass input) noexcept;

struct AdvanceResult {
  ChatSession session;
  BotReply reply;
  InputClass input = InputClass::invalid;
  std::optional<HazardReport> report;  // set when the message confirmed a submission
};

struct FlowOptions {
  Vocabulary vocabulary;
  std::chrono::minutes idle_timeout{30};
};

// Applies one message to a session. Pure apart from `make_id`, which is only
// called when a submission is confirmed. Sessions idle for longer than the
// timeout are reset to idle before the message is interpreted.
AdvanceResult advance(const ChatSession& session, const ChatMessage& msg, const FlowOptions& options,
                      Timestamp now, const std::function<std::string()>& make_id);

struct SubmitResult {
  ChatSession session;                 // reset to idle
  std::optional<HazardReport> report;  // nullopt when the draft was discarded
};

// Finalizes the draft of a session waiting for confirmation. Throws
// StateError outside the confirm state or when a mandatory field is missing.
SubmitResult submit(const ChatSession& session, bool confirmed, std::string id, Timestamp now);

// Stable pseudonym for the reporter of a session.
std::string reporter_pseudonym(std::string_view session_id);

// Random report ids, unique across threads.
std::string random_report_id();

// Stateful front of the flow. Messages for one session are applied in
// order; different sessions proceed in parallel. `sink` persists a
// confirmed report and may throw to reject it, in which case the session
// stays in the confirm state.
class ChatEngine {
 public:
  using ReportSink = std::function<void(const HazardReport&)>;

  ChatEngine(FlowOptions options, ReportSink sink, Clock clock = system_now,
             std::function<std::string()> make_id = random_report_id);

  BotReply handle(const ChatMessage& msg);

  std::optional<ChatSession> session(const std::string& session_id) const;
  std::size_t session_count() const;

 private:
  struct Slot {
    std::mutex mutex;
    ChatSession session;
  };

  std::shared_ptr<Slot> slot_for(const std::string& session_id);

  FlowOptions options_;
  ReportSink sink_;
  Clock clock_;
  std::function<std::string()> make_id_;

  mutable std::mutex sessions_mutex_;
  std::unordered_map<std::string, std::shared_ptr<Slot>> sessions_;
};

}  // namespace arise::reports
