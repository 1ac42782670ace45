#pragma once

// Sentence segmentation and per-session sentence identity tracking.
//
// A sentence ends at a run of . ! ? (plus any closing quotes or brackets)
// followed by whitespace or end of text, unless the token ending in '.' is a
// listed abbreviation. Trailing unterminated text is a provisional sentence.
//
// The tracker re-segments after every edit and maps the old sentence list onto
// the new one: untouched spans before and after the edit keep their identity,
// and the changed middle is matched greedily by TF-IDF cosine. Unmatched old
// sentences are merged away (REMOVED), unmatched new ones are created.
// A sentence deleted whole is held detached until the next edit; if that edit
// re-inserts identical text (cut and paste) the entry is re-attached, otherwise
// it becomes REMOVED.

#include <algorithm>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "cowrite/error.hpp"
#include "cowrite/similarity.hpp"
#include "cowrite/trace.hpp"
#include "cowrite/unicode.hpp"

#ifndef COWRITE_DATA_DIR
#define COWRITE_DATA_DIR "data"
#endif

namespace cowrite {

// ---------------------------------------------------------------------------
// Word lists

namespace detail {

inline std::u32string ascii_lower(std::u32string s) {
  for (auto& c : s)
    if (c >= U'A' && c <= U'Z') c = c - U'A' + U'a';
  return s;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word list " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t");
    out.push_back(line.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace detail

class Abbreviations {
public:
  Abbreviations() = default;
  explicit Abbreviations(const std::vector<std::string>& items) {
    for (const auto& s : items) items_.insert(detail::ascii_lower(utf8_decode(s)));
  }

  static Abbreviations load(const std::string& path) { return Abbreviations(detail::read_lines(path)); }

  static const Abbreviations& builtin() {
    static const Abbreviations a({"mr.",  "mrs.",  "ms.",   "dr.",  "prof.", "sr.",  "jr.",   "st.",  "mt.",
                                  "vs.",  "e.g.",  "i.e.",  "cf.",  "gen.",  "gov.", "sen.",  "rep.", "capt.",
                                  "lt.",  "col.",  "sgt.",  "rev.", "fig.",  "approx.", "dept.", "jan.", "feb.",
                                  "aug.", "sept.", "oct.",  "nov.", "dec.",  "u.s.", "u.k."});
    return a;
  }

  /// `token` includes its trailing period.
  bool contains(std::u32string_view token) const { return items_.count(detail::ascii_lower(std::u32string(token))) > 0; }
  std::size_t size() const { return items_.size(); }

private:
  std::unordered_set<std::u32string> items_;
};

class Dictionary {
public:
  Dictionary() = default;
  explicit Dictionary(const std::vector<std::string>& words) {
    for (const auto& w : words) words_.insert(normalize(utf8_decode(w)));
  }

  static Dictionary load(const std::string& path) { return Dictionary(detail::read_lines(path)); }

  /// The bundled word list under the data directory.
  static const Dictionary& bundled() {
    static const Dictionary d = load(std::string(COWRITE_DATA_DIR) + "/dictionary.txt");
    return d;
  }

  bool contains(std::u32string_view word) const { return words_.count(normalize(std::u32string(word))) > 0; }
  std::size_t size() const { return words_.size(); }

  static std::u32string normalize(std::u32string w) {
    std::u32string out;
    for (char32_t c : w) {
      if (is_punctuation(c)) continue;
      out.push_back(c >= U'A' && c <= U'Z' ? c - U'A' + U'a' : c);
    }
    return out;
  }

private:
  std::unordered_set<std::u32string> words_;
};

// ---------------------------------------------------------------------------
// Segmentation

struct SentenceSpan {
  std::size_t index = 0;
  std::size_t start = 0;  // [start, end) in scalar values
  std::size_t end = 0;
  std::u32string text;
  Owner ownership = Owner::Prompt;
  bool terminated = false;  // false for trailing provisional text
};

namespace detail {

inline bool is_terminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }

inline bool is_closer(char32_t c) {
  return c == U'"' || c == U'\'' || c == U')' || c == U']' || c == U'}' || c == 0x201D || c == 0x2019 ||
         c == 0x00BB;
}

inline bool is_opener(char32_t c) {
  return c == U'"' || c == U'\'' || c == U'(' || c == U'[' || c == U'{' || c == 0x201C || c == 0x2018 ||
         c == 0x00AB;
}

}  // namespace detail

inline std::vector<SentenceSpan> segment(std::u32string_view text, const Abbreviations& abbreviations,
                                         const std::vector<Owner>* owners = nullptr) {
  std::vector<SentenceSpan> out;
  const std::size_t n = text.size();
  auto emit = [&](std::size_t s, std::size_t e, bool terminated) {
    SentenceSpan span;
    span.index = out.size();
    span.start = s;
    span.end = e;
    span.text = std::u32string(text.substr(s, e - s));
    span.terminated = terminated;
    if (owners && s < owners->size()) span.ownership = (*owners)[s];
    out.push_back(std::move(span));
  };

  std::size_t i = 0;
  while (i < n && is_space(text[i])) ++i;
  std::size_t start = i;
  while (i < n) {
    if (!detail::is_terminator(text[i])) {
      ++i;
      continue;
    }
    const std::size_t run_begin = i;
    while (i < n && detail::is_terminator(text[i])) ++i;
    const std::size_t run_end = i;
    while (i < n && detail::is_closer(text[i])) ++i;
    if (i < n && !is_space(text[i])) continue;

    if (run_end - run_begin == 1 && text[run_begin] == U'.') {
      std::size_t tok = run_begin;
      while (tok > start && !is_space(text[tok - 1])) --tok;
      while (tok < run_begin && detail::is_opener(text[tok])) ++tok;
      if (abbreviations.contains(text.substr(tok, run_end - tok))) continue;
    }
    emit(start, i, true);
    while (i < n && is_space(text[i])) ++i;
    start = i;
  }
  if (start < n) {
    std::size_t e = n;
    while (e > start && is_space(text[e - 1])) --e;
    emit(start, e, false);
  }
  return out;
}

inline std::vector<SentenceSpan> segment(std::u32string_view text) { return segment(text, Abbreviations::builtin()); }

inline std::vector<std::string> segment_texts(std::string_view utf8,
                                              const Abbreviations& abbreviations = Abbreviations::builtin()) {
  std::vector<std::string> out;
  for (const auto& s : segment(utf8_decode(utf8), abbreviations)) out.push_back(utf8_encode(s.text));
  return out;
}

/// Index of the span a position belongs to: the span covering it (end
/// inclusive), else the span just before it, else the first span.
inline std::optional<std::size_t> span_at(const std::vector<SentenceSpan>& spans, std::size_t pos) {
  if (spans.empty()) return std::nullopt;
  auto it = std::lower_bound(spans.begin(), spans.end(), pos,
                             [](const SentenceSpan& s, std::size_t p) { return s.end < p; });
  if (it == spans.end()) return spans.size() - 1;
  if (it->start <= pos) return static_cast<std::size_t>(it - spans.begin());
  if (it == spans.begin()) return 0;
  return static_cast<std::size_t>(it - spans.begin()) - 1;
}

// ---------------------------------------------------------------------------
// Ledger

enum class RevisionKind { Revision, Merger, Removal, Relocation, SpellingCorrection };

inline constexpr std::string_view to_string(RevisionKind k) {
  switch (k) {
    case RevisionKind::Revision: return "revision";
    case RevisionKind::Merger: return "merger";
    case RevisionKind::Removal: return "removal";
    case RevisionKind::Relocation: return "relocation";
    case RevisionKind::SpellingCorrection: return "spelling-correction";
  }
  return "revision";
}

struct RevisionRecord {
  std::size_t event_index = 0;
  RevisionKind kind = RevisionKind::Revision;
  std::u32string before;
  std::u32string after;
  bool tie = false;  // merger decided by the lower-index tie break
};

enum class EntryStatus { Live, Detached, Removed, Merged };

struct LedgerEntry {
  std::size_t id = 0;
  std::u32string initial_text;
  std::u32string current_text;  // last live text; meaningless once removed
  Owner ownership = Owner::Prompt;
  EntryStatus status = EntryStatus::Live;
  std::size_t created_at = 0;  // event index, or 0 for prompt sentences
  std::vector<RevisionRecord> history;

  bool live() const { return status == EntryStatus::Live; }
  bool removed() const { return status == EntryStatus::Removed || status == EntryStatus::Merged; }
};

using LedgerSnapshot = std::vector<std::pair<std::size_t, std::u32string>>;

struct SentenceLedger {
  std::vector<LedgerEntry> entries;  // indexed by id
  std::vector<std::size_t> live;     // ids in document order

  LedgerSnapshot snapshot() const {
    LedgerSnapshot s;
    s.reserve(live.size());
    for (auto id : live) s.emplace_back(id, entries[id].current_text);
    return s;
  }

  std::vector<std::u32string> live_texts() const {
    std::vector<std::u32string> out;
    for (auto id : live) out.push_back(entries[id].current_text);
    return out;
  }

  /// Revisions proper; spelling corrections are excluded.
  std::size_t revision_count(std::size_t id) const {
    std::size_t n = 0;
    for (const auto& r : entries.at(id).history)
      if (r.kind == RevisionKind::Revision) ++n;
    return n;
  }
};

/// Spelling correction iff the token diff is one substitution whose original
/// is not a dictionary word and whose replacement is.
inline RevisionKind classify_edit(std::u32string_view before, std::u32string_view after, const Dictionary& dictionary) {
  auto split = [](std::u32string_view s) {
    std::vector<std::u32string> toks;
    std::u32string cur;
    for (char32_t c : s) {
      if (is_space(c)) {
        if (!cur.empty()) toks.push_back(std::move(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) toks.push_back(std::move(cur));
    return toks;
  };
  const auto a = split(before);
  const auto b = split(after);
  if (a.size() != b.size()) return RevisionKind::Revision;
  std::optional<std::size_t> diff;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) continue;
    if (diff) return RevisionKind::Revision;
    diff = i;
  }
  if (!diff) return RevisionKind::Revision;
  const auto orig = Dictionary::normalize(a[*diff]);
  const auto repl = Dictionary::normalize(b[*diff]);
  if (orig.empty() || repl.empty()) return RevisionKind::Revision;
  if (!dictionary.contains(orig) && dictionary.contains(repl)) return RevisionKind::SpellingCorrection;
  return RevisionKind::Revision;
}

inline RevisionKind classify_edit(std::string_view before, std::string_view after, const Dictionary& dictionary) {
  return classify_edit(std::u32string_view(utf8_decode(before)), std::u32string_view(utf8_decode(after)), dictionary);
}

/// Entries present in both snapshots with unchanged text whose rank among
/// those common entries differs. Pure inserts and deletes elsewhere never
/// reorder the common set, so only genuine moves are reported.
inline std::vector<std::size_t> detect_relocation(const LedgerSnapshot& prev, const LedgerSnapshot& cur) {
  std::unordered_map<std::size_t, const std::u32string*> cur_text;
  for (const auto& [id, text] : cur) cur_text.emplace(id, &text);
  std::vector<std::size_t> prev_common;
  std::unordered_set<std::size_t> common;
  for (const auto& [id, text] : prev) {
    auto it = cur_text.find(id);
    if (it != cur_text.end() && *it->second == text) {
      prev_common.push_back(id);
      common.insert(id);
    }
  }
  std::vector<std::size_t> cur_common;
  for (const auto& [id, _] : cur)
    if (common.count(id)) cur_common.push_back(id);
  std::vector<std::size_t> moved;
  for (std::size_t r = 0; r < prev_common.size(); ++r)
    if (prev_common[r] != cur_common[r]) moved.push_back(prev_common[r]);
  std::sort(moved.begin(), moved.end());
  return moved;
}

// ---------------------------------------------------------------------------
// Tracking

struct TrackerOptions {
  const Abbreviations* abbreviations = nullptr;  // builtin when null
  const Dictionary* dictionary = nullptr;        // bundled when null
  std::shared_ptr<const TfIdfModel> model;       // built from the final text when null
};

/// What one event did to the ledger.
struct TrackStep {
  std::size_t event_index = 0;
  bool edit = false;
  bool at_end = false;  // edit at or beyond the trimmed end of the document
  std::optional<std::size_t> entry;  // ledger entry the event is attributed to
  std::vector<std::size_t> relocated;
  std::vector<std::size_t> created;
};

/// The IDF corpus used for a session: its final-document sentences (or the
/// prompt's, when the final text is empty).
inline std::shared_ptr<const TfIdfModel> session_model(const SessionTrace& trace, const Abbreviations& abbreviations) {
  std::vector<std::u32string> docs;
  for (auto& s : segment(trace.final_text, abbreviations)) docs.push_back(std::move(s.text));
  if (docs.empty())
    for (auto& s : segment(trace.prompt_text, abbreviations)) docs.push_back(std::move(s.text));
  if (docs.empty()) docs.emplace_back();
  return std::make_shared<const TfIdfModel>(docs);
}

class SentenceTracker {
public:
  explicit SentenceTracker(const SessionTrace& trace, TrackerOptions options = {})
      : trace_(&trace),
        abbreviations_(options.abbreviations ? options.abbreviations : &Abbreviations::builtin()),
        dictionary_(options.dictionary ? options.dictionary : &Dictionary::bundled()),
        model_(options.model ? std::move(options.model) : session_model(trace, *abbreviations_)),
        replayer_(trace) {
    spans_ = segment(replayer_.state().text, *abbreviations_, &replayer_.owners());
    for (const auto& s : spans_) {
      auto id = new_entry(s, 0);
      ledger_.live.push_back(id);
    }
    last_stable_ = ledger_.snapshot();
  }

  bool done() const { return replayer_.done(); }
  const Replayer& replayer() const { return replayer_; }
  const DocumentState& state() const { return replayer_.state(); }
  const SentenceLedger& ledger() const { return ledger_; }
  const std::vector<SentenceSpan>& spans() const { return spans_; }

  /// Ledger id of the sentence at a document position (see span_at).
  std::optional<std::size_t> entry_at(std::size_t pos) const {
    auto i = span_at(spans_, pos);
    if (!i) return std::nullopt;
    return ledger_.live[*i];
  }

  /// Current span of a live entry.
  const SentenceSpan* span_of(std::size_t id) const {
    for (std::size_t i = 0; i < ledger_.live.size(); ++i)
      if (ledger_.live[i] == id) return &spans_[i];
    return nullptr;
  }

  TrackStep step() {
    const std::size_t idx = replayer_.next_index();
    const auto& e = trace_->events.at(idx);
    TrackStep out;
    out.event_index = idx;
    if (!e.is_edit()) {
      replayer_.step();
      out.entry = entry_at(replayer_.state().cursor.start);
      return out;
    }
    out.edit = true;
    const bool is_insert = e.name == EventName::TextInsert;
    const std::size_t p = *e.offset;
    const std::size_t width = e.edit_length();
    const std::size_t trimmed_before = trimmed_length(replayer_.state().text);
    out.at_end = is_insert ? p >= trimmed_before : p + width >= trimmed_before;

    std::optional<std::size_t> delete_target;
    if (!is_insert) {
      if (auto i = span_at(spans_, p)) delete_target = ledger_.live[*i];
    }

    replayer_.step();
    auto new_spans = segment(replayer_.state().text, *abbreviations_, &replayer_.owners());

    const std::size_t edit_end = is_insert ? p : p + width;
    const std::ptrdiff_t delta = is_insert ? static_cast<std::ptrdiff_t>(width) : -static_cast<std::ptrdiff_t>(width);

    // Untouched prefix and suffix.
    std::size_t k = 0;
    while (k < spans_.size() && k < new_spans.size() && spans_[k].end <= p && spans_[k].terminated &&
           new_spans[k].start == spans_[k].start && new_spans[k].text == spans_[k].text)
      ++k;
    std::size_t a = spans_.size();
    std::size_t b = new_spans.size();
    while (a > k && b > k && spans_[a - 1].start >= edit_end &&
           static_cast<std::ptrdiff_t>(new_spans[b - 1].start) ==
               static_cast<std::ptrdiff_t>(spans_[a - 1].start) + delta &&
           new_spans[b - 1].text == spans_[a - 1].text) {
      --a;
      --b;
    }

    // Match the middle.
    const std::size_t m = a - k;
    const std::size_t n = b - k;
    std::vector<std::optional<std::size_t>> new_to_old(n);
    std::vector<bool> old_matched(m, false);
    std::vector<bool> tie_for(n, false);
    if (m == 1 && n == 1) {
      new_to_old[0] = 0;
      old_matched[0] = true;
    } else if (m > 0 && n > 0) {
      struct Cand {
        double sim;
        std::size_t o, nw;
      };
      std::vector<Cand> cands;
      for (std::size_t o = 0; o < m; ++o)
        for (std::size_t j = 0; j < n; ++j)
          cands.push_back({model_->cosine(std::u32string_view(spans_[k + o].text),
                                          std::u32string_view(new_spans[k + j].text)),
                           o, j});
      std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
        if (x.sim != y.sim) return x.sim > y.sim;
        if (x.o != y.o) return x.o < y.o;
        return x.nw < y.nw;
      });
      for (std::size_t c = 0; c < cands.size(); ++c) {
        const auto& cd = cands[c];
        if (old_matched[cd.o] || new_to_old[cd.nw]) continue;
        new_to_old[cd.nw] = cd.o;
        old_matched[cd.o] = true;
        for (std::size_t d = c + 1; d < cands.size() && cands[d].sim == cd.sim; ++d)
          if (cands[d].nw == cd.nw && !old_matched[cands[d].o]) tie_for[cd.nw] = true;
      }
    }

    // Entries waiting from the previous edit are re-attached or removed now.
    std::vector<std::size_t> waiting = std::move(detached_);
    detached_.clear();

    std::vector<std::size_t> new_live;
    new_live.reserve(new_spans.size());
    for (std::size_t i = 0; i < k; ++i) new_live.push_back(ledger_.live[i]);

    std::vector<std::size_t> merged_into;  // survivors of this event's mergers
    const bool merging = m > n;
    for (std::size_t j = 0; j < n; ++j) {
      const auto& span = new_spans[k + j];
      if (new_to_old[j]) {
        const auto id = ledger_.live[k + *new_to_old[j]];
        auto& entry = ledger_.entries[id];
        if (entry.current_text != span.text) {
          RevisionRecord rec{idx, RevisionKind::Revision, entry.current_text, span.text, tie_for[j]};
          if (merging) rec.kind = RevisionKind::Merger;
          else rec.kind = classify_edit(std::u32string_view(entry.current_text), std::u32string_view(span.text), *dictionary_);
          entry.current_text = span.text;
          if (out.at_end && !merging) entry.initial_text = span.text;
          else entry.history.push_back(std::move(rec));
        }
        if (merging) merged_into.push_back(id);
        new_live.push_back(id);
        continue;
      }
      std::optional<std::size_t> revived;
      if (is_insert) {
        for (auto it = waiting.begin(); it != waiting.end(); ++it) {
          if (ledger_.entries[*it].current_text == span.text) {
            revived = *it;
            waiting.erase(it);
            break;
          }
        }
      }
      if (revived) {
        ledger_.entries[*revived].status = EntryStatus::Live;
        new_live.push_back(*revived);
      } else {
        auto id = new_entry(span, idx);
        out.created.push_back(id);
        new_live.push_back(id);
      }
    }

    for (std::size_t o = 0; o < m; ++o) {
      if (old_matched[o]) continue;
      const auto id = ledger_.live[k + o];
      auto& entry = ledger_.entries[id];
      if (n == 0 && !is_insert) {
        entry.status = EntryStatus::Detached;
        detached_.push_back(id);
        detach_event_[id] = idx;
      } else {
        entry.status = EntryStatus::Merged;
        entry.history.push_back({idx, RevisionKind::Merger, entry.current_text, U"", false});
      }
    }
    for (auto id : waiting) {
      auto& entry = ledger_.entries[id];
      entry.status = EntryStatus::Removed;
      entry.history.push_back({detach_event_[id], RevisionKind::Removal, entry.current_text, U"", false});
    }

    for (std::size_t i = a; i < spans_.size(); ++i) new_live.push_back(ledger_.live[i]);
    ledger_.live = std::move(new_live);
    spans_ = std::move(new_spans);

    // Attribution.
    if (is_insert) {
      std::size_t q = p;
      for (std::size_t i = 0; i < width; ++i) {
        if (!is_space((*e.text)[i])) {
          q = p + i;
          break;
        }
      }
      out.entry = entry_at(q);
    } else if (delete_target) {
      const auto& t = ledger_.entries[*delete_target];
      if (t.status == EntryStatus::Merged) out.entry = entry_at(p);
      else out.entry = delete_target;
    }

    // Relocation is judged between stable states (no detached entries).
    if (detached_.empty()) {
      auto snap = ledger_.snapshot();
      out.relocated = detect_relocation(last_stable_, snap);
      for (auto id : out.relocated)
        ledger_.entries[id].history.push_back(
            {idx, RevisionKind::Relocation, ledger_.entries[id].current_text, ledger_.entries[id].current_text, false});
      last_stable_ = std::move(snap);
    }
    return out;
  }

  /// Finalises pending removals and checks the ledger against the final document.
  const SentenceLedger& finish() {
    for (auto id : detached_) {
      auto& entry = ledger_.entries[id];
      entry.status = EntryStatus::Removed;
      entry.history.push_back({detach_event_[id], RevisionKind::Removal, entry.current_text, U"", false});
    }
    detached_.clear();
    const auto expected = segment(trace_->final_text, *abbreviations_);
    const auto live = ledger_.live_texts();
    bool ok = expected.size() == live.size();
    for (std::size_t i = 0; ok && i < live.size(); ++i) ok = expected[i].text == live[i];
    if (!ok)
      throw TrackingError("session " + trace_->meta.session_id + ": sentence ledger does not match the final document");
    return ledger_;
  }

private:
  std::size_t new_entry(const SentenceSpan& span, std::size_t event_index) {
    LedgerEntry entry;
    entry.id = ledger_.entries.size();
    entry.initial_text = span.text;
    entry.current_text = span.text;
    entry.ownership = span.ownership;
    entry.created_at = event_index;
    ledger_.entries.push_back(std::move(entry));
    return ledger_.entries.back().id;
  }

  const SessionTrace* trace_;
  const Abbreviations* abbreviations_;
  const Dictionary* dictionary_;
  std::shared_ptr<const TfIdfModel> model_;
  Replayer replayer_;
  SentenceLedger ledger_;
  std::vector<SentenceSpan> spans_;
  std::vector<std::size_t> detached_;
  std::unordered_map<std::size_t, std::size_t> detach_event_;
  LedgerSnapshot last_stable_;
};

/// Tracks a whole session and returns the validated ledger.
inline SentenceLedger track(const SessionTrace& trace, TrackerOptions options = {}) {
  SentenceTracker tracker(trace, std::move(options));
  while (!tracker.done()) tracker.step();
  return tracker.finish();
}

inline nlohmann::json to_json(const SentenceLedger& ledger) {
  auto status = [](EntryStatus s) {
    switch (s) {
      case EntryStatus::Live: return "live";
      case EntryStatus::Detached: return "detached";
      case EntryStatus::Removed: return "removed";
      case EntryStatus::Merged: return "merged";
    }
    return "live";
  };
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : ledger.entries) {
    nlohmann::json h = nlohmann::json::array();
    for (const auto& r : e.history) {
      nlohmann::json rec{{"event_index", r.event_index},
                         {"kind", std::string(to_string(r.kind))},
                         {"before", utf8_encode(r.before)},
                         {"after", utf8_encode(r.after)}};
      if (r.tie) rec["tie"] = true;
      h.push_back(std::move(rec));
    }
    j.push_back({{"id", e.id},
                 {"initial_text", utf8_encode(e.initial_text)},
                 {"current_text", e.removed() ? nlohmann::json(nullptr) : nlohmann::json(utf8_encode(e.current_text))},
                 {"ownership", std::string(to_string(e.ownership))},
                 {"status", status(e.status)},
                 {"created_at", e.created_at},
                 {"history", std::move(h)}});
  }
  return j;
}

}  // namespace cowrite
