#include <sstream>

#include <gtest/gtest.h>

#include "cowrite/csv.hpp"
#include "cowrite/trace.hpp"
#include "cowrite/unicode.hpp"
#include "helpers.hpp"

using namespace cowrite;
using namespace cowrite::test;

TEST(Unicode, RoundTripsMultiByteText) {
  const std::string s = "naïve café 日本 🙂";
  const auto u = utf8_decode(s);
  EXPECT_EQ(u.size(), 15u);
  EXPECT_EQ(utf8_encode(u), s);
}

TEST(Unicode, RejectsInvalidBytes) { EXPECT_THROW(utf8_decode("\xff\xfe"), Utf8Error); }

TEST(Unicode, TrimmedLengthIgnoresTrailingWhitespace) {
  EXPECT_EQ(trimmed_length(U"abc  \n"), 3u);
  EXPECT_EQ(trimmed_length(U"   "), 0u);
}

TEST(Csv, QuotedFieldsRoundTrip) {
  std::ostringstream out;
  csv::write_row(out, {"a,b", "say \"hi\"", "line\nbreak", ""});
  std::istringstream in(out.str());
  const auto rows = csv::read(in);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], (csv::Row{"a,b", "say \"hi\"", "line\nbreak", ""}));
}

TEST(Csv, NumberFormatRoundTrips) {
  for (double v : {0.1, -3.25, 1e-12, 123456789.0}) EXPECT_EQ(std::stod(csv::num(v)), v);
}

TEST(ParseSession, SuggestionGetMapsToCanonicalName) {
  auto r = parse_session(R"({"event_name":"suggestion-get","event_source":"user","timestamp":3})", {});
  ASSERT_EQ(r.trace.events.size(), 1u);
  EXPECT_EQ(r.trace.events[0].name, EventName::SuggestionGet);
}

TEST(ParseSession, EmptyStreamKeepsPrompt) {
  auto r = parse_session(R"({"record":"header","prompt_text":"Once upon a time."})", {});
  EXPECT_TRUE(r.trace.events.empty());
  EXPECT_EQ(r.trace.final_text, r.trace.prompt_text);
}

TEST(ParseSession, SingleInsertOnEmptyPrompt) {
  auto r = parse_session(R"({"event_name":"text-insert","offset":0,"text":"Hi"})", {});
  EXPECT_EQ(r.trace.final_text, U"Hi");
  EXPECT_FALSE(r.trace.final_text_logged);
}

TEST(ParseSession, UnknownNamesArePreservedAsOther) {
  auto r = parse_session(R"({"event_name":"system-initialize","timestamp":0})", {});
  ASSERT_EQ(r.trace.events.size(), 1u);
  EXPECT_EQ(r.trace.events[0].name, EventName::Other);
  EXPECT_EQ(r.trace.events[0].raw_name, "system-initialize");
}

TEST(ParseSession, MalformedLinesAreReportedWithLineNumbers) {
  std::string raw;
  for (int i = 0; i < 40; ++i) raw += R"({"event_name":"cursor-forward","timestamp":1})" "\n";
  raw += "{not json\n";
  auto r = parse_session(raw, {});
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].line, 41u);
  EXPECT_EQ(r.trace.events.size(), r.records - r.errors.size());
}

TEST(ParseSession, TooManyMalformedLinesRejectTheSession) {
  std::string raw = R"({"event_name":"cursor-forward"})" "\n" "garbage\n";
  EXPECT_THROW(parse_session(raw, {}), SessionParseError);
  ParseOptions lenient;
  lenient.max_malformed_fraction = 0.6;
  EXPECT_NO_THROW(parse_session(raw, {}, lenient));
}

TEST(ParseSession, EventsAreOrderedByTimestamp) {
  auto r = parse_session(R"({"event_name":"cursor-forward","timestamp":5}
{"event_name":"cursor-backward","timestamp":2})",
                         {});
  ASSERT_EQ(r.trace.events.size(), 2u);
  EXPECT_EQ(r.trace.events[0].name, EventName::CursorBackward);
}

TEST(ParseSession, CoauthorDeltasExpandToOneEventPerOp) {
  const std::string raw =
      R"({"eventName":"system-initialize","eventSource":"api","eventTimestamp":100,"currentDoc":"Hello."}
{"eventName":"text-insert","eventSource":"user","eventTimestamp":105,"textDelta":{"ops":[{"retain":6},{"insert":" Bye"}]}}
{"eventName":"text-insert","eventSource":"user","eventTimestamp":110,"textDelta":{"ops":[{"delete":1},{"retain":2},{"insert":"X"}]},"currentDoc":"elXlo. Bye"})";
  auto r = parse_session(raw, {});
  EXPECT_EQ(r.trace.prompt_text, U"Hello.");
  ASSERT_EQ(r.trace.events.size(), 4u);
  EXPECT_EQ(r.expanded, 1u);
  EXPECT_EQ(r.trace.events[1].offset, 6u);
  EXPECT_EQ(r.trace.events[2].name, EventName::TextDelete);
  EXPECT_EQ(r.trace.events[3].offset, 2u);
  EXPECT_EQ(r.trace.events[0].timestamp, 0);
  EXPECT_EQ(replay_final_text(r.trace), U"elXlo. Bye");
  EXPECT_EQ(r.trace.final_text, U"elXlo. Bye");
}

TEST(ParseSession, OffsetsCountScalarValuesNotBytes) {
  auto r = parse_session(R"({"record":"header","prompt_text":"café"}
{"event_name":"text-insert","offset":4,"text":"!"})",
                         {});
  EXPECT_EQ(r.trace.final_text, U"café!");
}

TEST(Replay, InverseOpsRestoreEmptyText) {
  auto t = make_trace("", {ins(0, "ab"), del(0, "ab")});
  EXPECT_EQ(t.final_text, U"");
}

TEST(Replay, PrependOrdering) {
  auto t = make_trace("", {ins(0, "b"), ins(0, "a")});
  EXPECT_EQ(t.final_text, U"ab");
}

TEST(Replay, YieldsOneStatePerEvent) {
  auto t = make_trace("", {ins(0, "a"), cursor(EventName::CursorBackward, 0, 0), ins(1, "b")});
  std::vector<std::u32string> texts;
  for (const auto& s : replay(t)) texts.push_back(s.text);
  EXPECT_EQ(texts, (std::vector<std::u32string>{U"a", U"a", U"ab"}));
}

TEST(Replay, OutOfBoundsNamesTheEvent) {
  SessionTrace t;
  t.events = {ins(0, "a"), ins(5, "b")};
  try {
    replay_final_text(t);
    FAIL();
  } catch (const ReplayError& e) {
    EXPECT_EQ(e.event_index(), 1u);
  }
}

TEST(Replay, DeleteMustMatchDocument) {
  SessionTrace t;
  t.prompt_text = U"abc";
  t.events = {del(0, "xy")};
  EXPECT_THROW(replay_final_text(t), ReplayError);
}

TEST(Replay, IdenticalInputsGiveIdenticalText) {
  auto a = make_trace("P.", {ins(2, " one"), del(0, "P"), ins(0, "Q")});
  auto b = make_trace("P.", {ins(2, " one"), del(0, "P"), ins(0, "Q")});
  EXPECT_EQ(a.final_text, b.final_text);
}

namespace {
SessionTrace with_meta(SessionTrace t, double pct) {
  t.meta.ownership_pct = pct;
  return t;
}
}  // namespace

TEST(Preprocess, PromptRemovalExcludesSession) {
  auto t = make_trace("Prompt.", {del(0, "Prompt."), ins(0, "New text.")});
  auto r = preprocess({t});
  ASSERT_EQ(r.excluded.size(), 1u);
  EXPECT_EQ(r.excluded[0].reason, "prompt-removed");
}

TEST(Preprocess, MissingAuthorExcludesSession) {
  auto t = make_trace("", {ins(0, "x")}, "s1", "");
  auto r = preprocess({t});
  ASSERT_EQ(r.excluded.size(), 1u);
  EXPECT_EQ(r.excluded[0].reason, "missing-author");
}

TEST(Preprocess, FinalTextMismatchExcludesSession) {
  auto t = make_trace("", {ins(0, "x")});
  t.final_text = U"y";
  auto r = preprocess({t});
  ASSERT_EQ(r.excluded.size(), 1u);
  EXPECT_EQ(r.excluded[0].reason, "final-text-mismatch");
}

TEST(Preprocess, SingleValidSessionIsKept) {
  auto r = preprocess({make_trace("", {ins(0, "x")})});
  EXPECT_EQ(r.kept.size(), 1u);
  EXPECT_TRUE(r.excluded.empty());
}

TEST(Preprocess, MedianSplitLabelsStrictlyAboveAsUser) {
  std::vector<SessionTrace> c;
  const double pcts[] = {50, 70, 76, 80, 90};
  for (int i = 0; i < 5; ++i) c.push_back(with_meta(make_trace("", {ins(0, "x")}, "s" + std::to_string(i)), pcts[i]));
  auto r = preprocess(c);
  EXPECT_DOUBLE_EQ(r.ownership_median, 76.0);
  EXPECT_EQ(r.ownership.at("s2"), OwnershipLabel::Api);
  EXPECT_EQ(r.ownership.at("s3"), OwnershipLabel::User);
  EXPECT_EQ(r.ownership.at("s0"), OwnershipLabel::Api);
}

TEST(Preprocess, PinnedMedianOverridesCorpus) {
  std::vector<SessionTrace> c{with_meta(make_trace("", {ins(0, "x")}, "a"), 60),
                              with_meta(make_trace("", {ins(0, "x")}, "b"), 80)};
  PreprocessOptions o;
  o.pinned_median = 50.0;
  auto r = preprocess(c, o);
  EXPECT_EQ(r.ownership.at("a"), OwnershipLabel::User);
}

TEST(Metadata, RoundTripsAndWarnsOnOddTemperature) {
  SessionMeta m{"s1", "w1", PromptKind::Argumentative, "p3", 0.5, 81.5};
  std::ostringstream out;
  write_metadata(out, {m});
  std::istringstream in(out.str());
  auto table = read_metadata(in);
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_EQ(table.rows[0].author_id, "w1");
  EXPECT_EQ(table.rows[0].prompt_kind, PromptKind::Argumentative);
  EXPECT_DOUBLE_EQ(table.rows[0].ownership_pct, 81.5);
  EXPECT_EQ(table.warnings.size(), 1u);
}

TEST(Metadata, MissingColumnIsDataError) {
  std::istringstream in("session_id,author_id\ns1,a1\n");
  EXPECT_THROW(read_metadata(in), DataError);
}

TEST(WriteTrace, CanonicalDialectRoundTrips) {
  auto t = make_trace("Start.", {ins(6, " More.", EventSource::Api), cursor(EventName::CursorSelect, 0, 3),
                                 named(EventName::SuggestionGet)});
  t.final_text_logged = true;
  std::ostringstream out;
  write_trace(out, t);
  auto back = parse_session(out.str(), t.meta);
  EXPECT_EQ(back.trace.prompt_text, t.prompt_text);
  EXPECT_EQ(back.trace.final_text, t.final_text);
  EXPECT_EQ(back.trace.events, t.events);
}
