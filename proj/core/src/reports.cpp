#include "arise/reports.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "arise/errors.hpp"
#include "arise/hash.hpp"

namespace arise::reports {
namespace {

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split(std::string_view s, std::string_view separators) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = s.find_first_of(separators, start);
    const auto piece = trim(s.substr(start, end == std::string_view::npos ? s.size() - start : end - start));
    if (!piece.empty()) parts.push_back(piece);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

bool contains(const std::vector<std::string>& list, std::string_view value) {
  return std::find(list.begin(), list.end(), value) != list.end();
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

// Command text ("/skip") if the message is a command, either explicitly or
// as a text message starting with a slash.
std::optional<std::string> command_of(const ChatMessage& msg) {
  if (!msg.text) return std::nullopt;
  const auto t = trim(*msg.text);
  if (msg.kind == MessageKind::command || (msg.kind == MessageKind::text && t.starts_with('/'))) {
    return lower(t);
  }
  return std::nullopt;
}

std::optional<std::vector<Measurement>> parse_measurements(std::string_view text, const Vocabulary& vocab,
                                                           std::string& problem) {
  std::vector<Measurement> out;
  for (const auto item : split(text, ";\n")) {
    const auto fields = split(item, " \t");
    if (fields.size() < 3) {
      problem = "Use the form '<type> <value> <unit>', e.g. 'water_depth 0.4 m'.";
      return std::nullopt;
    }
    const std::string type = lower(fields[0]);
    if (!contains(vocab.measurement_types, type)) {
      problem = "Unknown measurement type '" + std::string(fields[0]) + "'. Choose one of: " +
                join(vocab.measurement_types, ", ") + ".";
      return std::nullopt;
    }
    double value = 0.0;
    const auto [end, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), value);
    if (ec != std::errc{} || end != fields[1].data() + fields[1].size() || !std::isfinite(value)) {
      problem = "'" + std::string(fields[1]) + "' is not a number.";
      return std::nullopt;
    }
    std::string unit;
    for (std::size_t i = 2; i < fields.size(); ++i) {
      if (i > 2) unit += ' ';
      unit += fields[i];
    }
    out.push_back(Measurement{type, value, unit});
  }
  if (out.empty()) {
    problem = "Send at least one measurement or /skip.";
    return std::nullopt;
  }
  return out;
}

std::optional<std::vector<ImpactIndicator>> parse_impacts(std::string_view text, const Vocabulary& vocab,
                                                          std::string& problem) {
  std::vector<ImpactIndicator> out;
  for (const auto item : split(text, ";,\n")) {
    const auto fields = split(item, " \t");
    if (fields.size() != 2) {
      problem = "Use the form '<indicator> <severity 1-5>', e.g. 'structural 3'.";
      return std::nullopt;
    }
    const std::string name = lower(fields[0]);
    if (!contains(vocab.impact_indicators, name)) {
      problem = "Unknown impact indicator '" + std::string(fields[0]) + "'. Choose one of: " +
                join(vocab.impact_indicators, ", ") + ".";
      return std::nullopt;
    }
    int severity = 0;
    const auto [end, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), severity);
    if (ec != std::errc{} || end != fields[1].data() + fields[1].size() || severity < 1 || severity > 5) {
      problem = "Severity must be an integer from 1 to 5.";
      return std::nullopt;
    }
    out.push_back(ImpactIndicator{name, severity});
  }
  if (out.empty()) {
    problem = "Send at least one impact indicator or /skip.";
    return std::nullopt;
  }
  return out;
}

std::optional<std::vector<std::string>> parse_risks(std::string_view text, const Vocabulary& vocab,
                                                    std::string& problem) {
  std::vector<std::string> out;
  for (const auto item : split(text, ";,\n")) {
    std::string element(item);
    if (!vocab.risk_elements.empty()) {
      element = lower(element);
      if (!contains(vocab.risk_elements, element)) {
        problem = "Unknown risk element '" + std::string(item) + "'. Choose from: " +
                  join(vocab.risk_elements, ", ") + ".";
        return std::nullopt;
      }
    }
    out.push_back(std::move(element));
  }
  if (out.empty()) {
    problem = "Name at least one element at risk or /skip.";
    return std::nullopt;
  }
  return out;
}

std::vector<std::string> with_skip(std::vector<std::string> options) {
  options.push_back("/skip");
  return options;
}

std::string summary(const ReportDraft& d) {
  std::ostringstream os;
  os << "Please confirm your report.\n";
  if (d.location) os << "Location: " << d.location->lat() << ", " << d.location->lon() << "\n";
  if (d.hazard_type) os << "Hazard: " << to_string(*d.hazard_type) << "\n";
  if (d.description) os << "Description: " << *d.description << "\n";
  os << "Media: " << d.media.size() << " item(s)\n";
  for (const auto& m : d.measurements) os << "Measurement: " << m.measurement_type << " " << m.value << " " << m.unit << "\n";
  for (const auto& i : d.impact_indicators) os << "Impact: " << i.indicator << " " << i.severity << "\n";
  for (const auto& r : d.risk_elements) os << "At risk: " << r << "\n";
  os << "Submit? (yes/no)";
  return os.str();
}

// Instruction for the state the session is now in.
void prompt(BotReply& reply, const ChatSession& s, const Vocabulary& vocab) {
  switch (s.state) {
    case ChatState::idle:
      reply.text = "Send /report to start a new hazard report.";
      reply.options = {"/report"};
      break;
    case ChatState::await_location:
      reply.text = "Share the location of the hazard.";
      reply.options = {"/cancel"};
      break;
    case ChatState::await_hazard_type:
      reply.text = "What type of hazard is it?";
      reply.options.clear();
      for (const auto t : kHazardTypes) reply.options.emplace_back(to_string(t));
      break;
    case ChatState::await_description:
      reply.text = "Briefly describe what is happening.";
      reply.options = {"/cancel"};
      break;
    case ChatState::await_media:
      reply.text = "Send photos, videos or voice messages. Send /skip when you are done.";
      reply.options = {"/skip"};
      break;
    case ChatState::await_measurements:
      reply.text = "Add measurements as '<type> <value> <unit>' separated by ';', or /skip.";
      reply.options = with_skip(vocab.measurement_types);
      break;
    case ChatState::await_impact:
      reply.text = "Rate impacts as '<indicator> <severity 1-5>' separated by ';', or /skip.";
      reply.options = with_skip(vocab.impact_indicators);
      break;
    case ChatState::await_risk:
      reply.text = "List the elements at risk separated by commas, or /skip.";
      reply.options = with_skip(vocab.risk_elements);
      break;
    case ChatState::confirm:
      reply.text = summary(s.draft);
      reply.options = {"yes", "no"};
      break;
  }
}

}  // namespace

std::string_view to_string(HazardType t) noexcept {
  switch (t) {
    case HazardType::fire: return "fire";
    case HazardType::flood: return "flood";
    case HazardType::storm: return "storm";
    case HazardType::landslide: return "landslide";
    case HazardType::erosion: return "erosion";
    case HazardType::vandalism: return "vandalism";
    case HazardType::other: return "other";
  }
  return "other";
}

std::optional<HazardType> parse_hazard_type(std::string_view text) noexcept {
  const auto t = trim(text);
  for (const auto h : kHazardTypes) {
    const auto name = to_string(h);
    if (name.size() == t.size() &&
        std::equal(name.begin(), name.end(), t.begin(), [](char a, char b) {
          return a == std::tolower(static_cast<unsigned char>(b));
        })) {
      return h;
    }
  }
  return std::nullopt;
}

std::string_view to_string(MediaKind k) noexcept {
  switch (k) {
    case MediaKind::photo: return "photo";
    case MediaKind::video: return "video";
    case MediaKind::voice: return "voice";
  }
  return "photo";
}

std::optional<MediaKind> parse_media_kind(std::string_view text) noexcept {
  if (text == "photo") return MediaKind::photo;
  if (text == "video") return MediaKind::video;
  if (text == "voice") return MediaKind::voice;
  return std::nullopt;
}

std::string_view to_string(ChatState s) noexcept {
  switch (s) {
    case ChatState::idle: return "idle";
    case ChatState::await_location: return "await_location";
    case ChatState::await_hazard_type: return "await_hazard_type";
    case ChatState::await_description: return "await_description";
    case ChatState::await_media: return "await_media";
    case ChatState::await_measurements: return "await_measurements";
    case ChatState::await_impact: return "await_impact";
    case ChatState::await_risk: return "await_risk";
    case ChatState::confirm: return "confirm";
  }
  return "idle";
}

std::string_view to_string(MessageKind k) noexcept {
  switch (k) {
    case MessageKind::text: return "text";
    case MessageKind::location: return "location";
    case MessageKind::photo: return "photo";
    case MessageKind::video: return "video";
    case MessageKind::voice: return "voice";
    case MessageKind::command: return "command";
  }
  return "text";
}

std::optional<MessageKind> parse_message_kind(std::string_view text) noexcept {
  for (const auto k : {MessageKind::text, MessageKind::location, MessageKind::photo, MessageKind::video,
                       MessageKind::voice, MessageKind::command}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::optional<std::string> wire_problem(const ChatMessage& msg) {
  if (msg.session_id.empty()) return "session_id must be a non-empty string";
  switch (msg.kind) {
    case MessageKind::location:
      if (!msg.location) return "location messages require a location field";
      break;
    case MessageKind::photo:
    case MessageKind::video:
    case MessageKind::voice:
      if (!msg.media_uri || msg.media_uri->empty()) {
        return std::string(to_string(msg.kind)) + " messages require a media_uri field";
      }
      break;
    case MessageKind::text:
    case MessageKind::command:
      if (!msg.text) return std::string(to_string(msg.kind)) + " messages require a text field";
      break;
  }
  return std::nullopt;
}

void validate(const HazardReport& r) {
  if (r.id.empty()) throw DomainError("report id is empty");
  if (trim(r.description).empty()) throw DomainError("report description is empty");
  if (!geo::GeoPoint::valid(r.location.lat(), r.location.lon())) throw DomainError("report location out of range");
  for (const auto& i : r.impact_indicators) {
    if (i.severity < 1 || i.severity > 5) {
      throw DomainError("impact severity must be within 1..5, got " + std::to_string(i.severity));
    }
  }
  for (const auto& m : r.media) {
    if (m.uri.empty()) throw DomainError("media reference without uri");
  }
  for (const auto& m : r.measurements) {
    if (m.measurement_type.empty() || !std::isfinite(m.value)) throw DomainError("malformed measurement");
  }
}

std::optional<ChatState> next_state(ChatState from, InputClass input) noexcept {
  using S = ChatState;
  using I = InputClass;
  if (input == I::invalid) return from;
  if (from == S::idle) {
    if (input == I::start) return S::await_location;
    return std::nullopt;
  }
  if (input == I::cancel) return S::idle;
  switch (from) {
    case S::await_location:
      if (input == I::accepted) return S::await_hazard_type;
      break;
    case S::await_hazard_type:
      if (input == I::accepted) return S::await_description;
      break;
    case S::await_description:
      if (input == I::accepted) return S::await_media;
      break;
    case S::await_media:
      if (input == I::media_added) return S::await_media;
      if (input == I::skip) return S::await_measurements;
      break;
    case S::await_measurements:
      if (input == I::accepted || input == I::skip) return S::await_impact;
      break;
    case S::await_impact:
      if (input == I::accepted || input == I::skip) return S::await_risk;
      break;
    case S::await_risk:
      if (input == I::accepted || input == I::skip) return S::confirm;
      break;
    case S::confirm:
      if (input == I::confirm_yes || input == I::confirm_no) return S::idle;
      break;
    case S::idle:
      break;
  }
  return std::nullopt;
}

std::string reporter_pseudonym(std::string_view session_id) {
  return "anon-" + to_hex(fnv1a64(session_id));
}

std::string random_report_id() {
  static std::atomic<std::uint64_t> counter{0};
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const std::uint64_t mixed = rng() ^ (counter.fetch_add(1) * 0x9e3779b97f4a7c15ULL);
  return "rep-" + to_hex(mixed);
}

SubmitResult submit(const ChatSession& session, bool confirmed, std::string id, Timestamp now) {
  if (session.state != ChatState::confirm) {
    throw StateError("submit called in state " + std::string(to_string(session.state)));
  }
  const auto& d = session.draft;
  if (!d.location || !d.hazard_type || !d.description) {
    throw StateError("draft is missing a mandatory field");
  }

  SubmitResult out;
  out.session.session_id = session.session_id;
  out.session.state = ChatState::idle;
  out.session.updated_at = now;
  if (!confirmed) return out;

  HazardReport r;
  r.id = std::move(id);
  r.location = *d.location;
  r.hazard_type = *d.hazard_type;
  r.description = *d.description;
  r.media = d.media;
  r.measurements = d.measurements;
  r.impact_indicators = d.impact_indicators;
  r.risk_elements = d.risk_elements;
  r.created_at = now;
  r.reporter = reporter_pseudonym(session.session_id);
  validate(r);
  out.report = std::move(r);
  return out;
}

AdvanceResult advance(const ChatSession& session, const ChatMessage& msg, const FlowOptions& options,
                      Timestamp now, const std::function<std::string()>& make_id) {
  const Vocabulary& vocab = options.vocabulary;
  ChatSession s = session;
  if (s.state != ChatState::idle && now - s.updated_at > options.idle_timeout) {
    s.state = ChatState::idle;
    s.draft = {};
  }
  s.updated_at = now;

  const auto command = command_of(msg);
  const auto text = msg.text ? trim(*msg.text) : std::string_view{};
  const bool is_skip = command && (*command == "/skip" || *command == "/done");

  InputClass input = InputClass::invalid;
  std::string problem;
  ReportDraft& d = s.draft;

  if (command && *command == "/cancel" && s.state != ChatState::idle) {
    input = InputClass::cancel;
  } else {
    switch (s.state) {
      case ChatState::idle:
        if (command && *command == "/report") input = InputClass::start;
        break;

      case ChatState::await_location:
        if (msg.kind == MessageKind::location && msg.location) {
          if (auto p = geo::GeoPoint::try_make(msg.location->lat, msg.location->lon)) {
            d.location = *p;
            input = InputClass::accepted;
          } else {
            problem = "That position is out of range: latitude must be within [-90, 90] and longitude within "
                      "[-180, 180].";
          }
        } else {
          problem = "Please share a location.";
        }
        break;

      case ChatState::await_hazard_type:
        if (!command && msg.kind == MessageKind::text) {
          if (auto h = parse_hazard_type(text)) {
            d.hazard_type = *h;
            input = InputClass::accepted;
            break;
          }
        }
        problem = "Please choose one of the listed hazard types.";
        break;

      case ChatState::await_description:
        if (!command && msg.kind == MessageKind::text && !text.empty()) {
          d.description = std::string(text);
          input = InputClass::accepted;
        } else {
          problem = "A description is required.";
        }
        break;

      case ChatState::await_media:
        if (is_skip) {
          input = InputClass::skip;
        } else if (const auto kind = parse_media_kind(to_string(msg.kind)); kind && msg.media_uri &&
                                                                          !msg.media_uri->empty()) {
          d.media.push_back(MediaRef{*kind, *msg.media_uri});
          input = InputClass::media_added;
        } else {
          problem = "Send a photo, video or voice message, or /skip.";
        }
        break;

      case ChatState::await_measurements:
        if (is_skip) {
          input = InputClass::skip;
        } else if (!command && msg.kind == MessageKind::text) {
          if (auto m = parse_measurements(text, vocab, problem)) {
            d.measurements = std::move(*m);
            input = InputClass::accepted;
          }
        } else {
          problem = "Send measurements as text, or /skip.";
        }
        break;

      case ChatState::await_impact:
        if (is_skip) {
          input = InputClass::skip;
        } else if (!command && msg.kind == MessageKind::text) {
          if (auto i = parse_impacts(text, vocab, problem)) {
            d.impact_indicators = std::move(*i);
            input = InputClass::accepted;
          }
        } else {
          problem = "Send impact indicators as text, or /skip.";
        }
        break;

      case ChatState::await_risk:
        if (is_skip) {
          input = InputClass::skip;
        } else if (!command && msg.kind == MessageKind::text) {
          if (auto r = parse_risks(text, vocab, problem)) {
            d.risk_elements = std::move(*r);
            input = InputClass::accepted;
          }
        } else {
          problem = "Send the elements at risk as text, or /skip.";
        }
        break;

      case ChatState::confirm: {
        const std::string answer = lower(text);
        if (answer == "yes" || answer == "y") {
          input = InputClass::confirm_yes;
        } else if (answer == "no" || answer == "n") {
          input = InputClass::confirm_no;
        } else {
          problem = "Please answer yes or no.";
        }
        break;
      }
    }
  }

  AdvanceResult out;
  out.input = input;
  out.reply.session_id = s.session_id;

  if (input == InputClass::confirm_yes || input == InputClass::confirm_no) {
    auto submitted = submit(s, input == InputClass::confirm_yes, input == InputClass::confirm_yes ? make_id() : "", now);
    out.session = std::move(submitted.session);
    prompt(out.reply, out.session, vocab);
    if (submitted.report) {
      out.reply.text = "Report " + submitted.report->id + " submitted. Thank you! " + out.reply.text;
      out.reply.report_id = submitted.report->id;
      out.report = std::move(submitted.report);
    } else {
      out.reply.text = "Report discarded. " + out.reply.text;
    }
    out.reply.state = out.session.state;
    return out;
  }

  if (input == InputClass::cancel) {
    s.draft = {};
  }
  s.state = next_state(s.state, input).value_or(s.state);
  out.session = std::move(s);
  prompt(out.reply, out.session, vocab);
  out.reply.state = out.session.state;
  if (input == InputClass::invalid) {
    out.reply.valid = false;
    if (!problem.empty()) out.reply.text = problem + " " + out.reply.text;
  } else if (input == InputClass::cancel) {
    out.reply.text = "Report cancelled. " + out.reply.text;
  } else if (input == InputClass::media_added) {
    out.reply.text = "Got it (" + std::to_string(out.session.draft.media.size()) + " item(s)). " + out.reply.text;
  }
  return out;
}

ChatEngine::ChatEngine(FlowOptions options, ReportSink sink, Clock clock, std::function<std::string()> make_id)
    : options_(std::move(options)), sink_(std::move(sink)), clock_(std::move(clock)), make_id_(std::move(make_id)) {}

std::shared_ptr<ChatEngine::Slot> ChatEngine::slot_for(const std::string& session_id) {
  std::lock_guard lock(sessions_mutex_);
  auto& slot = sessions_[session_id];
  if (!slot) {
    slot = std::make_shared<Slot>();
    slot->session.session_id = session_id;
    slot->session.updated_at = clock_();
  }
  return slot;
}

BotReply ChatEngine::handle(const ChatMessage& msg) {
  if (auto problem = wire_problem(msg)) throw DomainError(*problem);
  const auto slot = slot_for(msg.session_id);
  std::lock_guard lock(slot->mutex);
  auto result = advance(slot->session, msg, options_, clock_(), make_id_);
  if (result.report) {
    try {
      sink_(*result.report);
    } catch (const std::exception& e) {
      BotReply reply;
      reply.session_id = msg.session_id;
      reply.state = slot->session.state;
      reply.valid = false;
      reply.text = std::string("The report could not be stored: ") + e.what();
      reply.options = {"yes", "no"};
      return reply;
    }
  }
  slot->session = std::move(result.session);
  return std::move(result.reply);
}

std::optional<ChatSession> ChatEngine::session(const std::string& session_id) const {
  std::shared_ptr<Slot> slot;
  {
    std::lock_guard lock(sessions_mutex_);
    const auto found = sessions_.find(session_id);
    if (found == sessions_.end()) return std::nullopt;
    slot = found->second;
  }
  std::lock_guard lock(slot->mutex);
  return slot->session;
}

std::size_t ChatEngine::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

}  // namespace arise::reports
