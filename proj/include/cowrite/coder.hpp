#pragma once

// Assigns the 14 behaviour codes to every event of a session.
//
// Most codes follow from the event name alone. The rest come from replay and
// sentence tracking:
//   COMPOSE       insert at or past the trimmed end of the document
//   REVISE_USER   in-text insert/delete attributed to a user-owned sentence
//   REVISE_SUGG   the same for a suggestion-owned sentence
//   REFLECT       a REVISE_* event once the document has reached the reflect
//                 fraction of its final length
//   RELOCATE      an edit that changes the order of unchanged sentences
//   LOW_MOD/HIGH_MOD  set on the last revision of a revision episode, by the
//                 similarity of the sentence's initial text and its text after
//                 that revision
// An episode on sentence E opens with the first revision of E and closes when
// an edit lands elsewhere, an edit happens at the end, the cursor leaves E, E
// stops being live, or the session ends.

#include <array>
#include <bitset>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cowrite/csv.hpp"
#include "cowrite/error.hpp"
#include "cowrite/sentence.hpp"
#include "cowrite/similarity.hpp"
#include "cowrite/trace.hpp"

namespace cowrite {

enum class Code : std::uint8_t {
  COMPOSE,
  RELOCATE,
  REFLECT,
  SEEK_SUGG,
  DISMISS_SUGG,
  ACCEPT_SUGG,
  HOVER_SUGG,
  CURSOR_FWD,
  CURSOR_BWD,
  CURSOR_SELECT,
  REVISE_USER,
  REVISE_SUGG,
  LOW_MOD,
  HIGH_MOD,
};

inline constexpr std::size_t kNumCodes = 14;

inline constexpr std::array<std::string_view, kNumCodes> kCodeNames{
    "COMPOSE",    "RELOCATE",   "REFLECT",       "SEEK_SUGG",   "DISMISS_SUGG", "ACCEPT_SUGG", "HOVER_SUGG",
    "CURSOR_FWD", "CURSOR_BWD", "CURSOR_SELECT", "REVISE_USER", "REVISE_SUGG",  "LOW_MOD",     "HIGH_MOD"};

inline constexpr std::string_view to_string(Code c) { return kCodeNames[static_cast<std::size_t>(c)]; }

inline Code code_from(std::string_view s) {
  for (std::size_t i = 0; i < kNumCodes; ++i)
    if (kCodeNames[i] == s) return static_cast<Code>(i);
  throw DataError("unknown code '" + std::string(s) + "'");
}

class CodeVector {
public:
  CodeVector() = default;
  CodeVector(std::initializer_list<Code> codes) {
    for (auto c : codes) set(c);
  }

  bool operator[](Code c) const { return bits_[static_cast<std::size_t>(c)]; }
  bool test(std::size_t i) const { return bits_[i]; }
  void set(Code c, bool v = true) { bits_[static_cast<std::size_t>(c)] = v; }
  void set(std::size_t i, bool v = true) { bits_[i] = v; }
  bool any() const { return bits_.any(); }
  std::size_t count() const { return bits_.count(); }
  CodeVector& operator|=(const CodeVector& o) {
    bits_ |= o.bits_;
    return *this;
  }
  friend bool operator==(const CodeVector&, const CodeVector&) = default;

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < kNumCodes; ++i) {
      if (!bits_[i]) continue;
      if (!s.empty()) s += '+';
      s += kCodeNames[i];
    }
    return s.empty() ? "-" : s;
  }

private:
  std::bitset<kNumCodes> bits_;
};

struct CodedEvent {
  std::string session_id;
  std::string author_id;
  std::size_t event_index = 0;
  std::optional<std::size_t> sentence_id;
  CodeVector codes;
  bool modification_unresolved = false;  // similarity provider failed
};

/// Codes that depend only on the event name and source.
inline CodeVector name_mapped_codes(const CanonicalEvent& e) {
  switch (e.name) {
    case EventName::SuggestionGet: return {Code::SEEK_SUGG};
    case EventName::SuggestionClose: return e.source == EventSource::User ? CodeVector{Code::DISMISS_SUGG} : CodeVector{};
    case EventName::SuggestionSelect: return {Code::ACCEPT_SUGG};
    case EventName::SuggestionHover: return {Code::HOVER_SUGG};
    case EventName::CursorForward: return {Code::CURSOR_FWD};
    case EventName::CursorBackward: return {Code::CURSOR_BWD};
    case EventName::CursorSelect: return {Code::CURSOR_SELECT};
    default: return {};
  }
}

inline bool is_name_mapped(Code c) {
  switch (c) {
    case Code::SEEK_SUGG:
    case Code::DISMISS_SUGG:
    case Code::ACCEPT_SUGG:
    case Code::HOVER_SUGG:
    case Code::CURSOR_FWD:
    case Code::CURSOR_BWD:
    case Code::CURSOR_SELECT: return true;
    default: return false;
  }
}

struct CoderOptions {
  double mod_threshold = kDefaultModificationThreshold;
  double reflect_threshold = 0.9;
  SimilarityProvider* provider = nullptr;  // lexical over the session's final sentences when null
  TrackerOptions tracker;
};

struct CodingResult {
  std::vector<CodedEvent> events;
  SentenceLedger ledger;
  std::vector<std::string> warnings;
};

inline CodingResult code_session(const SessionTrace& trace, CoderOptions options = {}) {
  const Abbreviations& abbreviations =
      options.tracker.abbreviations ? *options.tracker.abbreviations : Abbreviations::builtin();
  if (!options.tracker.model) options.tracker.model = session_model(trace, abbreviations);
  const Dictionary& dictionary = options.tracker.dictionary ? *options.tracker.dictionary : Dictionary::bundled();

  std::optional<LexicalProvider> lexical;
  SimilarityProvider* provider = options.provider;
  if (!provider) provider = &lexical.emplace(*options.tracker.model);

  CodingResult result;
  auto& out = result.events;
  out.reserve(trace.events.size());

  SentenceTracker tracker(trace, options.tracker);
  const double reflect_length = options.reflect_threshold * static_cast<double>(trace.final_text.size());
  std::size_t longest = trace.prompt_text.size();

  struct Episode {
    std::size_t entry;
    std::size_t last_event;
    std::u32string initial;
    std::u32string after;
  };
  std::optional<Episode> episode;

  auto close = [&] {
    if (!episode) return;
    Episode ep = std::move(*episode);
    episode.reset();
    if (ep.initial == ep.after) return;
    if (classify_edit(std::u32string_view(ep.initial), std::u32string_view(ep.after), dictionary) ==
        RevisionKind::SpellingCorrection)
      return;
    auto& target = out[ep.last_event];
    try {
      const double s = provider->score(utf8_encode(ep.initial), utf8_encode(ep.after)).value;
      target.codes.set(s < options.mod_threshold ? Code::HIGH_MOD : Code::LOW_MOD);
    } catch (const ProviderError& e) {
      target.modification_unresolved = true;
      result.warnings.push_back("session " + trace.meta.session_id + " event " + std::to_string(ep.last_event) +
                                ": modification unresolved: " + e.what());
    }
  };

  while (!tracker.done()) {
    const std::size_t idx = tracker.replayer().next_index();
    const auto& e = trace.events[idx];
    const bool reached = static_cast<double>(longest) >= reflect_length;
    const TrackStep step = tracker.step();
    const auto& ledger = tracker.ledger();

    CodedEvent ce;
    ce.session_id = trace.meta.session_id;
    ce.author_id = trace.meta.author_id;
    ce.event_index = idx;
    ce.sentence_id = step.entry;
    ce.codes = name_mapped_codes(e);
    out.push_back(std::move(ce));
    auto& codes = out.back().codes;

    if (step.edit) {
      if (step.at_end) {
        if (e.name == EventName::TextInsert) codes.set(Code::COMPOSE);
        close();
      } else if (step.entry) {
        const auto& entry = ledger.entries[*step.entry];
        if (episode && episode->entry != *step.entry) close();
        if (entry.ownership != Owner::Prompt) {
          codes.set(entry.ownership == Owner::User ? Code::REVISE_USER : Code::REVISE_SUGG);
          if (reached) codes.set(Code::REFLECT);
          // Only edits that changed E's text extend its episode; a paste that
          // merely moves E does not.
          bool changed = false;
          for (auto it = entry.history.rbegin(); it != entry.history.rend() && it->event_index == idx; ++it)
            if (it->kind == RevisionKind::Revision || it->kind == RevisionKind::SpellingCorrection ||
                it->kind == RevisionKind::Merger)
              changed = true;
          if (entry.live() && changed) {
            if (!episode) episode = Episode{*step.entry, idx, entry.initial_text, entry.current_text};
            episode->last_event = idx;
            episode->after = entry.current_text;
          }
        }
      }
      if (!step.relocated.empty()) codes.set(Code::RELOCATE);
    } else if (episode && (e.name == EventName::CursorForward || e.name == EventName::CursorBackward ||
                           e.name == EventName::CursorSelect)) {
      const auto* span = tracker.span_of(episode->entry);
      const auto& cur = tracker.state().cursor;
      if (!span || cur.start < span->start || cur.end > span->end) close();
    }
    if (episode && !ledger.entries[episode->entry].live()) close();
    longest = std::max(longest, tracker.state().text.size());
  }
  close();
  result.ledger = tracker.finish();
  return result;
}

// ---------------------------------------------------------------------------
// Wide table

inline std::vector<std::string> coded_table_columns() {
  std::vector<std::string> cols{"session_id", "author_id", "event_index", "sentence_id"};
  for (auto n : kCodeNames) cols.emplace_back(n);
  return cols;
}

inline void write_coded_header(std::ostream& out) { csv::write_row(out, coded_table_columns()); }

inline void write_coded_rows(std::ostream& out, const std::vector<CodedEvent>& events) {
  std::vector<std::string> row(4 + kNumCodes);
  for (const auto& e : events) {
    row[0] = e.session_id;
    row[1] = e.author_id;
    row[2] = std::to_string(e.event_index);
    row[3] = e.sentence_id ? std::to_string(*e.sentence_id) : "";
    for (std::size_t i = 0; i < kNumCodes; ++i) row[4 + i] = e.codes.test(i) ? "1" : "0";
    csv::write_row(out, row);
  }
}

inline void write_coded_table(std::ostream& out, const std::vector<CodedEvent>& events) {
  write_coded_header(out);
  write_coded_rows(out, events);
}

inline std::vector<CodedEvent> read_coded_table(std::istream& in) {
  auto rows = csv::read(in);
  if (rows.empty()) throw DataError("coded table: empty");
  const auto cols = coded_table_columns();
  if (rows.front() != cols) throw DataError("coded table: unexpected header");
  std::vector<CodedEvent> out;
  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != cols.size()) throw DataError("coded table: row " + std::to_string(r + 1) + " has wrong width");
    CodedEvent e;
    e.session_id = row[0];
    e.author_id = row[1];
    try {
      e.event_index = std::stoull(row[2]);
      if (!row[3].empty()) e.sentence_id = std::stoull(row[3]);
    } catch (const std::exception&) {
      throw DataError("coded table: row " + std::to_string(r + 1) + " has a bad index");
    }
    for (std::size_t i = 0; i < kNumCodes; ++i) {
      const auto& v = row[4 + i];
      if (v != "0" && v != "1") throw DataError("coded table: row " + std::to_string(r + 1) + " has a non-binary code");
      e.codes.set(i, v == "1");
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace cowrite
