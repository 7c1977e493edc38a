#include <gtest/gtest.h>

#include <deque>
#include <set>

#include "arise/errors.hpp"
#include "arise/reports.hpp"

namespace arise::reports {
namespace {

using namespace std::chrono_literals;

const Timestamp kT0 = Timestamp{} + 1'700'000'000'000ms;

ChatMessage text(const std::string& t, MessageKind kind = MessageKind::text) {
  ChatMessage m;
  m.session_id = "s";
  m.kind = kind;
  m.text = t;
  return m;
}
ChatMessage command(const std::string& t) { return text(t, MessageKind::command); }
ChatMessage location(double lat, double lon) {
  ChatMessage m;
  m.session_id = "s";
  m.kind = MessageKind::location;
  m.location = LatLon{lat, lon};
  return m;
}
ChatMessage media(MessageKind kind, const std::string& uri) {
  ChatMessage m;
  m.session_id = "s";
  m.kind = kind;
  m.media_uri = uri;
  return m;
}

std::vector<ChatMessage> happy_path() {
  return {command("/report"),
          location(45.0703, 7.6869),
          text("flood"),
          text("River overflowing onto the footpath"),
          media(MessageKind::photo, "tg://photo/123"),
          command("/skip"),
          text("water_depth 0.4 m"),
          text("structural 3"),
          text("foundations"),
          text("yes")};
}

struct Run {
  ChatSession session;
  std::vector<AdvanceResult> steps;
};

Run play(const std::vector<ChatMessage>& messages, FlowOptions options = {}) {
  Run run;
  run.session.session_id = "s";
  run.session.updated_at = kT0;
  int n = 0;
  for (const auto& m : messages) {
    auto r = advance(run.session, m, options, kT0 + std::chrono::seconds{n++}, [] { return std::string("rep-1"); });
    run.session = r.session;
    run.steps.push_back(std::move(r));
  }
  return run;
}

TEST(ChatTable, EveryStateReachableFromIdleAndIdleReachableFromEveryState) {
  std::set<ChatState> seen{ChatState::idle};
  std::deque<ChatState> queue{ChatState::idle};
  while (!queue.empty()) {
    const auto s = queue.front();
    queue.pop_front();
    for (const auto in : kInputClasses) {
      if (auto next = next_state(s, in); next && seen.insert(*next).second) queue.push_back(*next);
    }
  }
  EXPECT_EQ(seen.size(), kChatStates.size());

  for (const auto start : kChatStates) {
    std::set<ChatState> reach{start};
    std::deque<ChatState> q{start};
    while (!q.empty()) {
      const auto s = q.front();
      q.pop_front();
      for (const auto in : kInputClasses) {
        if (auto next = next_state(s, in); next && reach.insert(*next).second) q.push_back(*next);
      }
    }
    EXPECT_TRUE(reach.contains(ChatState::idle)) << to_string(start);
  }
}

TEST(ChatTable, NoAbsorbingNonIdleState) {
  for (const auto s : kChatStates) {
    if (s == ChatState::idle) continue;
    bool leaves = false;
    for (const auto in : kInputClasses) {
      if (auto next = next_state(s, in); next && *next != s) leaves = true;
    }
    EXPECT_TRUE(leaves) << to_string(s);
    EXPECT_EQ(next_state(s, InputClass::cancel), ChatState::idle) << to_string(s);
  }
}

TEST(ChatTable, InvalidInputNeverMoves) {
  for (const auto s : kChatStates) EXPECT_EQ(next_state(s, InputClass::invalid), s);
}

TEST(ChatTable, SkipOnlyOnOptionalSteps) {
  const std::set<ChatState> optional{ChatState::await_media, ChatState::await_measurements, ChatState::await_impact,
                                     ChatState::await_risk};
  for (const auto s : kChatStates) {
    EXPECT_EQ(next_state(s, InputClass::skip).has_value(), optional.contains(s)) << to_string(s);
  }
}

TEST(ChatFlow, ReportCommandStartsTheFlow) {
  const auto run = play({command("/report")});
  EXPECT_EQ(run.session.state, ChatState::await_location);
  EXPECT_TRUE(run.steps[0].reply.valid);
  EXPECT_NE(run.steps[0].reply.text.find("location"), std::string::npos);
}

TEST(ChatFlow, SlashTextCountsAsCommand) {
  EXPECT_EQ(play({text("/report")}).session.state, ChatState::await_location);
}

TEST(ChatFlow, OutOfRangeLocationIsAValidationReply) {
  const auto run = play({command("/report"), location(91.0, 7.0)});
  EXPECT_EQ(run.session.state, ChatState::await_location);
  EXPECT_FALSE(run.steps[1].reply.valid);
  EXPECT_EQ(run.steps[1].input, InputClass::invalid);
  EXPECT_FALSE(run.session.draft.location);
}

TEST(ChatFlow, HappyPathProducesCompleteReport) {
  const auto run = play(happy_path());
  const auto& last = run.steps.back();
  ASSERT_TRUE(last.report);
  const auto& r = *last.report;
  EXPECT_EQ(r.id, "rep-1");
  EXPECT_EQ(r.location, geo::GeoPoint(45.0703, 7.6869));
  EXPECT_EQ(r.hazard_type, HazardType::flood);
  EXPECT_EQ(r.description, "River overflowing onto the footpath");
  EXPECT_EQ(r.media, (std::vector<MediaRef>{{MediaKind::photo, "tg://photo/123"}}));
  EXPECT_EQ(r.measurements, (std::vector<Measurement>{{"water_depth", 0.4, "m"}}));
  EXPECT_EQ(r.impact_indicators, (std::vector<ImpactIndicator>{{"structural", 3}}));
  EXPECT_EQ(r.risk_elements, std::vector<std::string>{"foundations"});
  EXPECT_EQ(r.created_at, kT0 + std::chrono::seconds{9});
  EXPECT_EQ(r.reporter, reporter_pseudonym("s"));
  EXPECT_EQ(run.session.state, ChatState::idle);
  EXPECT_EQ(last.reply.report_id, "rep-1");
  for (const auto& step : run.steps) EXPECT_TRUE(step.reply.valid);
  EXPECT_NO_THROW(validate(r));
}

TEST(ChatFlow, DraftHoldsExactlyTheFieldsOfPassedStates) {
  const auto run = play(happy_path());
  for (const auto& step : run.steps) {
    const auto& s = step.session;
    const auto& d = s.draft;
    const int rank = static_cast<int>(s.state);
    if (s.state == ChatState::idle) {
      EXPECT_EQ(d, ReportDraft{});
      continue;
    }
    EXPECT_EQ(d.location.has_value(), rank > static_cast<int>(ChatState::await_location));
    EXPECT_EQ(d.hazard_type.has_value(), rank > static_cast<int>(ChatState::await_hazard_type));
    EXPECT_EQ(d.description.has_value(), rank > static_cast<int>(ChatState::await_description));
    if (rank <= static_cast<int>(ChatState::await_measurements)) {
      EXPECT_TRUE(d.measurements.empty());
    }
    if (rank <= static_cast<int>(ChatState::await_impact)) {
      EXPECT_TRUE(d.impact_indicators.empty());
    }
    if (rank <= static_cast<int>(ChatState::await_risk)) {
      EXPECT_TRUE(d.risk_elements.empty());
    }
  }
}

TEST(ChatFlow, AllSkipPathGivesEmptyExtensions) {
  const auto run = play({command("/report"), location(40.0, 14.0), text("Storm"), text("Fallen tree"), command("/skip"),
                         command("/skip"), command("/skip"), command("/skip"), text("Y")});
  ASSERT_TRUE(run.steps.back().report);
  const auto& r = *run.steps.back().report;
  EXPECT_EQ(r.hazard_type, HazardType::storm);
  EXPECT_TRUE(r.media.empty());
  EXPECT_TRUE(r.measurements.empty());
  EXPECT_TRUE(r.impact_indicators.empty());
  EXPECT_TRUE(r.risk_elements.empty());
  EXPECT_NO_THROW(validate(r));
}

TEST(ChatFlow, SkipMediaLeavesMediaEmpty) {
  const auto run = play({command("/report"), location(40.0, 14.0), text("fire"), text("Smoke"), command("/skip")});
  EXPECT_EQ(run.session.state, ChatState::await_measurements);
  EXPECT_TRUE(run.session.draft.media.empty());
}

TEST(ChatFlow, DescriptionCannotBeSkipped) {
  const auto run = play({command("/report"), location(40.0, 14.0), text("fire"), command("/skip")});
  EXPECT_EQ(run.session.state, ChatState::await_description);
  EXPECT_FALSE(run.steps.back().reply.valid);
}

TEST(ChatFlow, MediaAccumulatesUntilSkip) {
  const auto run = play({command("/report"), location(40.0, 14.0), text("fire"), text("Smoke"),
                         media(MessageKind::photo, "p1"), media(MessageKind::video, "v1"), media(MessageKind::voice, "a1"),
                         command("/done")});
  EXPECT_EQ(run.session.state, ChatState::await_measurements);
  EXPECT_EQ(run.session.draft.media.size(), 3u);
  EXPECT_EQ(run.session.draft.media[1].kind, MediaKind::video);
}

TEST(ChatFlow, MultipleMeasurementsAndImpacts) {
  auto msgs = std::vector<ChatMessage>{command("/report"), location(40.0, 14.0), text("flood"), text("x"),
                                       command("/skip"), text("water_depth 0.4 m; wind_speed 12 km/h"),
                                       text("structural 3, access 5"), text("road, bridge"), text("no")};
  const auto run = play(msgs);
  EXPECT_EQ(run.steps[5].session.draft.measurements.size(), 2u);
  EXPECT_EQ(run.steps[5].session.draft.measurements[1].unit, "km/h");
  EXPECT_EQ(run.steps[6].session.draft.impact_indicators.size(), 2u);
  EXPECT_EQ(run.steps[7].session.draft.risk_elements, (std::vector<std::string>{"road", "bridge"}));
  EXPECT_FALSE(run.steps.back().report);
  EXPECT_EQ(run.session.state, ChatState::idle);
}

TEST(ChatFlow, RejectsValuesOutsideVocabularyOrRange) {
  const std::vector<ChatMessage> prefix{command("/report"), location(40.0, 14.0), text("flood"), text("x"),
                                        command("/skip")};
  for (const char* bad : {"rainfall 3 mm", "water_depth deep m", "water_depth 0.4"}) {
    auto msgs = prefix;
    msgs.push_back(text(bad));
    const auto run = play(msgs);
    EXPECT_EQ(run.session.state, ChatState::await_measurements) << bad;
    EXPECT_FALSE(run.steps.back().reply.valid) << bad;
  }
  for (const char* bad : {"structural 6", "structural 0", "structural", "morale 2"}) {
    auto msgs = prefix;
    msgs.push_back(command("/skip"));
    msgs.push_back(text(bad));
    const auto run = play(msgs);
    EXPECT_EQ(run.session.state, ChatState::await_impact) << bad;
  }
}

TEST(ChatFlow, ConfiguredRiskVocabularyIsEnforced) {
  FlowOptions options;
  options.vocabulary.risk_elements = {"road", "bridge"};
  const std::vector<ChatMessage> prefix{command("/report"), location(40.0, 14.0), text("flood"), text("x"),
                                        command("/skip"),  command("/skip"),      command("/skip")};
  auto bad = prefix;
  bad.push_back(text("castle"));
  EXPECT_EQ(play(bad, options).session.state, ChatState::await_risk);
  auto good = prefix;
  good.push_back(text("Road"));
  const auto run = play(good, options);
  EXPECT_EQ(run.session.state, ChatState::confirm);
  EXPECT_EQ(run.session.draft.risk_elements, std::vector<std::string>{"road"});
}

TEST(ChatFlow, HazardTypeOptionsListTheClosedSet) {
  const auto run = play({command("/report"), location(40.0, 14.0)});
  EXPECT_EQ(run.steps.back().reply.options.size(), kHazardTypes.size());
  const auto bad = play({command("/report"), location(40.0, 14.0), text("meteor")});
  EXPECT_EQ(bad.session.state, ChatState::await_hazard_type);
  EXPECT_FALSE(bad.steps.back().reply.valid);
}

TEST(ChatFlow, CancelFromEveryStateResetsToIdle) {
  const auto script = happy_path();
  for (std::size_t k = 1; k + 1 < script.size(); ++k) {
    std::vector<ChatMessage> msgs(script.begin(), script.begin() + static_cast<std::ptrdiff_t>(k));
    msgs.push_back(command("/cancel"));
    const auto run = play(msgs);
    EXPECT_EQ(run.session.state, ChatState::idle) << k;
    EXPECT_EQ(run.session.draft, ReportDraft{}) << k;
    EXPECT_EQ(run.steps.back().input, InputClass::cancel) << k;
  }
}

TEST(ChatFlow, ConfirmRequiresYesOrNo) {
  auto msgs = happy_path();
  msgs.back() = text("maybe");
  const auto run = play(msgs);
  EXPECT_EQ(run.session.state, ChatState::confirm);
  EXPECT_FALSE(run.steps.back().reply.valid);
  EXPECT_EQ(run.steps.back().reply.options, (std::vector<std::string>{"yes", "no"}));
}

TEST(ChatFlow, IdleSessionResetsAfterTimeout) {
  ChatSession s;
  s.session_id = "s";
  s.state = ChatState::await_description;
  s.draft.location = geo::GeoPoint(1.0, 1.0);
  s.draft.hazard_type = HazardType::fire;
  s.updated_at = kT0;
  const auto r = advance(s, text("late description"), FlowOptions{}, kT0 + 31min, [] { return std::string("x"); });
  EXPECT_EQ(r.session.state, ChatState::idle);
  EXPECT_EQ(r.session.draft, ReportDraft{});
  EXPECT_FALSE(r.reply.valid);

  const auto fresh = advance(s, text("timely description"), FlowOptions{}, kT0 + 29min, [] { return std::string("x"); });
  EXPECT_EQ(fresh.session.state, ChatState::await_media);
}

TEST(ChatFlow, ReplayIsDeterministic) {
  const auto a = play(happy_path());
  const auto b = play(happy_path());
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(a.steps[i].session.draft, b.steps[i].session.draft);
    EXPECT_EQ(a.steps[i].reply.text, b.steps[i].reply.text);
  }
}

TEST(ChatFlow, ExhaustiveTwoStepSequencesStayInTheMachine) {
  // Every message kind in every reachable state: the resulting state always
  // matches the table entry for the input class the flow reports.
  const std::vector<ChatMessage> probes{command("/report"), command("/cancel"), command("/skip"), command("/done"),
                                        location(45.0, 7.0), location(95.0, 7.0), text("flood"), text("hello"),
                                        text("water_depth 1 m"), text("access 2"), text("yes"), text("no"),
                                        media(MessageKind::photo, "p"), media(MessageKind::voice, "v")};
  const auto script = happy_path();
  for (std::size_t k = 0; k < script.size(); ++k) {
    const std::vector<ChatMessage> prefix(script.begin(), script.begin() + static_cast<std::ptrdiff_t>(k));
    const auto base = play(prefix);
    for (const auto& p : probes) {
      const auto r = advance(base.session, p, FlowOptions{}, kT0 + 100s, [] { return std::string("rep-x"); });
      const auto expected = next_state(base.session.state, r.input);
      ASSERT_TRUE(expected) << to_string(base.session.state);
      EXPECT_EQ(r.session.state, *expected);
      EXPECT_EQ(r.reply.state, r.session.state);
      EXPECT_EQ(r.reply.valid, r.input != InputClass::invalid);
    }
  }
}

TEST(Submit, OutsideConfirmIsAStateError) {
  ChatSession s;
  s.session_id = "s";
  s.state = ChatState::await_risk;
  EXPECT_THROW(submit(s, true, "id", kT0), StateError);
}

TEST(Submit, NoDiscardsDraft) {
  auto run = play(happy_path());
  ChatSession confirm = run.steps[8].session;
  ASSERT_EQ(confirm.state, ChatState::confirm);
  const auto out = submit(confirm, false, "", kT0);
  EXPECT_FALSE(out.report);
  EXPECT_EQ(out.session.state, ChatState::idle);
  EXPECT_EQ(out.session.draft, ReportDraft{});
}

TEST(Report, ValidationRejectsBrokenInvariants) {
  HazardReport r;
  r.id = "x";
  r.description = "ok";
  EXPECT_NO_THROW(validate(r));
  auto bad = r;
  bad.description = "   ";
  EXPECT_THROW(validate(bad), DomainError);
  bad = r;
  bad.impact_indicators = {{"structural", 6}};
  EXPECT_THROW(validate(bad), DomainError);
  bad = r;
  bad.id.clear();
  EXPECT_THROW(validate(bad), DomainError);
}

TEST(HazardType, ParsesCaseInsensitively) {
  EXPECT_EQ(parse_hazard_type(" FLOOD "), HazardType::flood);
  EXPECT_FALSE(parse_hazard_type("tsunami"));
  for (const auto t : kHazardTypes) EXPECT_EQ(parse_hazard_type(to_string(t)), t);
}

TEST(WireProblem, KindDeterminesRequiredFields) {
  EXPECT_FALSE(wire_problem(location(1, 1)));
  auto m = location(1, 1);
  m.location.reset();
  EXPECT_TRUE(wire_problem(m));
  auto p = media(MessageKind::photo, "");
  EXPECT_TRUE(wire_problem(p));
  auto t = text("x");
  t.text.reset();
  EXPECT_TRUE(wire_problem(t));
  auto anon = text("x");
  anon.session_id.clear();
  EXPECT_TRUE(wire_problem(anon));
}

}  // namespace
}  // namespace arise::reports
