#include <gtest/gtest.h>

#include "cowrite/sentence.hpp"
#include "cowrite/synthgen.hpp"
#include "helpers.hpp"

using namespace cowrite;
using namespace cowrite::test;

TEST(Segment, TwoTerminators) { EXPECT_EQ(segment_texts("A. B?"), (std::vector<std::string>{"A.", "B?"})); }

TEST(Segment, EmptyText) { EXPECT_TRUE(segment_texts("").empty()); }

// Hand-checked cases for the abbreviation list.
TEST(Segment, AbbreviationOracle) {
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
      {"Dr. Smith left.", {"Dr. Smith left."}},
      {"Mr. and Mrs. Lee came home. They slept.", {"Mr. and Mrs. Lee came home.", "They slept."}},
      {"Bring fruit, e.g. apples. Then go.", {"Bring fruit, e.g. apples.", "Then go."}},
      {"See Fig. 2 for details.", {"See Fig. 2 for details."}},
      {"See fig. 3 too.", {"See fig. 3 too."}},
      {"We met at 5 p.m. Then we ate.", {"We met at 5 p.m.", "Then we ate."}},
      {"Pens, paper, etc. Then go.", {"Pens, paper, etc.", "Then go."}},
      {"He lives on Main St. near the park.", {"He lives on Main St. near the park."}},
  };
  for (const auto& [text, expected] : cases) EXPECT_EQ(segment_texts(text), expected) << text;
}

TEST(Segment, ClosingQuotesStayWithTheirSentence) {
  EXPECT_EQ(segment_texts("He said \"Stop.\" Then he left!"),
            (std::vector<std::string>{"He said \"Stop.\"", "Then he left!"}));
}

TEST(Segment, TrailingTextIsProvisional) {
  auto spans = segment(U"One. Two", Abbreviations::builtin());
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_TRUE(spans[0].terminated);
  EXPECT_FALSE(spans[1].terminated);
  EXPECT_EQ(spans[1].text, U"Two");
}

TEST(Segment, TerminatorRunsAndNoSpaceJoin) {
  EXPECT_EQ(segment_texts("Really?! Yes. v1.2 is out."), (std::vector<std::string>{"Really?!", "Yes.", "v1.2 is out."}));
}

TEST(Segment, SpansReconstructDocument) {
  const std::u32string text = U"  First one.  Second one!\nThird   ";
  auto spans = segment(text, Abbreviations::builtin());
  std::size_t prev_end = 0;
  for (const auto& s : spans) {
    EXPECT_EQ(text.substr(s.start, s.end - s.start), s.text);
    for (std::size_t i = prev_end; i < s.start; ++i) EXPECT_TRUE(is_space(text[i]));
    prev_end = s.end;
  }
  for (std::size_t i = prev_end; i < text.size(); ++i) EXPECT_TRUE(is_space(text[i]));
}

TEST(ClassifyEdit, MisspellingFix) {
  EXPECT_EQ(classify_edit("the quik fox", "the quick fox", Dictionary::bundled()), RevisionKind::SpellingCorrection);
}

TEST(ClassifyEdit, SemanticSubstitution) {
  EXPECT_EQ(classify_edit("the cat sat", "the dog sat", Dictionary::bundled()), RevisionKind::Revision);
}

TEST(ClassifyEdit, LengthChange) {
  EXPECT_EQ(classify_edit("a b", "a b c d", Dictionary::bundled()), RevisionKind::Revision);
}

TEST(ClassifyEdit, PunctuationAndCaseAreIgnoredForLookup) {
  EXPECT_EQ(classify_edit("The quik, fox.", "The Quick, fox.", Dictionary::bundled()), RevisionKind::SpellingCorrection);
}

TEST(DetectRelocation, SwapFlagsBoth) {
  LedgerSnapshot prev{{0, U"A."}, {1, U"B."}};
  LedgerSnapshot cur{{1, U"B."}, {0, U"A."}};
  EXPECT_EQ(detect_relocation(prev, cur), (std::vector<std::size_t>{0, 1}));
}

TEST(DetectRelocation, InPlaceRevisionIsNotAMove) {
  LedgerSnapshot prev{{0, U"A."}, {1, U"B."}, {2, U"C."}};
  LedgerSnapshot cur{{0, U"A."}, {1, U"B b."}, {2, U"C."}};
  EXPECT_TRUE(detect_relocation(prev, cur).empty());
}

TEST(DetectRelocation, InsertionElsewhereIsNotAMove) {
  LedgerSnapshot prev{{0, U"A."}, {1, U"B."}};
  LedgerSnapshot cur{{2, U"N."}, {0, U"A."}, {1, U"B."}};
  EXPECT_TRUE(detect_relocation(prev, cur).empty());
}

TEST(Track, PureRemoval) {
  auto t = make_trace("", {ins(0, "Alpha beta gamma. Delta epsilon zeta."), del(17, " Delta epsilon zeta.")});
  auto ledger = track(t);
  ASSERT_EQ(ledger.entries.size(), 2u);
  EXPECT_TRUE(ledger.entries[1].removed());
  EXPECT_TRUE(ledger.entries[0].live());
  EXPECT_EQ(ledger.live_texts(), (std::vector<std::u32string>{U"Alpha beta gamma."}));
}

TEST(Track, MergerKeepsTheMostSimilarOriginal) {
  // Deleting the first period joins the sentences; the result shares more of
  // the first sentence's words.
  auto t = make_trace("X one two three. Y four.", {del(15, ".")});
  auto ledger = track(t);
  ASSERT_EQ(ledger.entries.size(), 2u);
  EXPECT_TRUE(ledger.entries[0].live());
  EXPECT_EQ(ledger.entries[0].current_text, U"X one two three Y four.");
  EXPECT_EQ(ledger.entries[1].status, EntryStatus::Merged);
  EXPECT_EQ(ledger.entries[0].history.back().kind, RevisionKind::Merger);
  EXPECT_FALSE(ledger.entries[0].history.back().tie);
}

TEST(Track, MergerPrefersSecondWhenItIsCloser) {
  auto t = make_trace("Y four. X one two three.", {del(6, ".")});
  auto ledger = track(t);
  EXPECT_EQ(ledger.entries[0].status, EntryStatus::Merged);
  EXPECT_EQ(ledger.entries[1].current_text, U"Y four X one two three.");
}

TEST(Track, EquidistantMergerBreaksTiesByLowerIndexAndFlagsIt) {
  auto t = make_trace("X one. Y two.", {del(5, ".")});
  auto ledger = track(t);
  EXPECT_TRUE(ledger.entries[0].live());
  EXPECT_EQ(ledger.entries[1].status, EntryStatus::Merged);
  EXPECT_TRUE(ledger.entries[0].history.back().tie);
}

TEST(Track, OwnershipIsFixedAtCreation) {
  auto t = make_trace("The prompt starts here.", {ins(23, " The model wrote this.", EventSource::Api),
                                                  ins(28, "user ")});
  auto ledger = track(t);
  ASSERT_EQ(ledger.entries.size(), 2u);
  EXPECT_EQ(ledger.entries[0].ownership, Owner::Prompt);
  EXPECT_EQ(ledger.entries[1].ownership, Owner::Api);
  EXPECT_EQ(ledger.entries[1].current_text, U"The user model wrote this.");
}

TEST(Track, SpellingCorrectionIsRecordedButNotCounted) {
  auto t = make_trace("The quik fox ran home.", {ins(7, "c")});
  auto ledger = track(t);
  const auto& h = ledger.entries[0].history;
  ASSERT_FALSE(h.empty());
  EXPECT_EQ(ledger.entries[0].current_text, U"The quick fox ran home.");
  EXPECT_EQ(ledger.revision_count(0), 0u);
  bool spelling = false;
  for (const auto& r : h) spelling |= r.kind == RevisionKind::SpellingCorrection;
  EXPECT_TRUE(spelling);
}

TEST(Track, CutAndPasteRelocatesWithoutNewEntries) {
  auto t = make_trace("Aa bb. Cc dd. Ee ff.", {del(0, "Aa bb. "), ins(7, "Aa bb. ")});
  EXPECT_EQ(t.final_text, U"Cc dd. Aa bb. Ee ff.");
  SentenceTracker tr(t);
  tr.step();
  const auto paste = tr.step();
  EXPECT_FALSE(paste.relocated.empty());
  const auto& ledger = tr.finish();
  EXPECT_EQ(ledger.entries.size(), 3u);
  EXPECT_EQ(ledger.live, (std::vector<std::size_t>{1, 0, 2}));
}

TEST(Track, LedgerJsonListsEveryEntry) {
  auto t = make_trace("One a. Two b.", {del(6, " Two b.")});
  auto j = to_json(track(t));
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[1]["status"], "removed");
  EXPECT_TRUE(j[1]["current_text"].is_null());
}

// Reconstruction at every step and agreement with the generator's record of
// each sentence's fate.
TEST(Track, SyntheticSessionsMatchGroundTruth) {
  std::vector<synth::BehaviorProfile> profiles{synth::bundled_profile("telling"), synth::bundled_profile("transforming"),
                                               synth::bundled_profile("baseline")};
  std::size_t checked = 0;
  for (std::size_t i = 0; i < 51; ++i) {
    auto p = profiles[i % 3];
    p.length_mean = 400;
    p.length_spread = 50;
    const auto g = synth::generate_session(p, 100 + i);
    SentenceTracker tr(g.trace);
    while (!tr.done()) {
      tr.step();
      std::vector<std::u32string> expected;
      for (const auto& s : segment(tr.state().text, Abbreviations::builtin())) expected.push_back(s.text);
      ASSERT_EQ(tr.ledger().live_texts(), expected) << "session " << i << " event " << tr.replayer().next_index();
    }
    const auto& ledger = tr.finish();
    ASSERT_EQ(ledger.live.size(), g.truth.sentences.size());
    for (std::size_t k = 0; k < ledger.live.size(); ++k) {
      const auto& e = ledger.entries[ledger.live[k]];
      const auto& s = g.truth.sentences[k];
      EXPECT_EQ(utf8_encode(e.current_text), s.final_text);
      EXPECT_EQ(utf8_encode(e.initial_text), s.initial);
      EXPECT_EQ(e.ownership, s.owner);
      EXPECT_EQ(ledger.revision_count(e.id) > 0, s.revised) << utf8_encode(e.current_text);
    }
    for (const auto& e : ledger.entries) EXPECT_FALSE(e.removed());
    ++checked;
  }
  EXPECT_EQ(checked, 51u);
}
