#pragma once

// Session traces: canonical events, log parsing, replay into document states,
// and corpus-level exclusions.
//
// Two line dialects are accepted. The canonical one:
//   {"record":"header","session_id":"s1","prompt_text":"...","final_text":"..."}
//   {"event_name":"text-insert","event_source":"user","timestamp":12,"offset":0,"text":"Hi"}
//   {"event_name":"cursor-select","event_source":"user","timestamp":40,"cursor_range":[0,2]}
// and raw CoAuthor records, recognised by an "eventName" key:
//   eventName -> event_name, eventSource -> event_source,
//   eventTimestamp -> timestamp (shifted so the first record is 0),
//   textDelta.ops (Quill retain/insert/delete) -> one event per edit op,
//   cursorRange {index,length} or currentCursor -> cursor_range,
//   currentSuggestions[].trimmed|original -> suggestions,
//   currentDoc on the first record -> prompt_text, on the last -> final_text.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cowrite/csv.hpp"
#include "cowrite/error.hpp"
#include "cowrite/unicode.hpp"

namespace cowrite {

using json = nlohmann::json;

enum class EventName {
  TextInsert,
  TextDelete,
  CursorForward,
  CursorBackward,
  CursorSelect,
  SuggestionGet,
  SuggestionOpen,
  SuggestionClose,
  SuggestionSelect,
  SuggestionHover,
  Other,
};

enum class EventSource { User, Api };

enum class PromptKind { Creative, Argumentative };

/// Who authored a character, and by extension a sentence.
enum class Owner : std::uint8_t { Prompt, User, Api };

inline constexpr std::string_view to_string(EventName n) {
  switch (n) {
    case EventName::TextInsert: return "text-insert";
    case EventName::TextDelete: return "text-delete";
    case EventName::CursorForward: return "cursor-forward";
    case EventName::CursorBackward: return "cursor-backward";
    case EventName::CursorSelect: return "cursor-select";
    case EventName::SuggestionGet: return "suggestion-get";
    case EventName::SuggestionOpen: return "suggestion-open";
    case EventName::SuggestionClose: return "suggestion-close";
    case EventName::SuggestionSelect: return "suggestion-select";
    case EventName::SuggestionHover: return "suggestion-hover";
    case EventName::Other: return "other";
  }
  return "other";
}

inline EventName event_name_from(std::string_view s) {
  for (auto n : {EventName::TextInsert, EventName::TextDelete, EventName::CursorForward,
                 EventName::CursorBackward, EventName::CursorSelect, EventName::SuggestionGet,
                 EventName::SuggestionOpen, EventName::SuggestionClose, EventName::SuggestionSelect,
                 EventName::SuggestionHover}) {
    if (to_string(n) == s) return n;
  }
  return EventName::Other;
}

inline constexpr std::string_view to_string(EventSource s) { return s == EventSource::User ? "user" : "api"; }

inline constexpr std::string_view to_string(PromptKind k) {
  return k == PromptKind::Creative ? "creative" : "argumentative";
}

inline constexpr std::string_view to_string(Owner o) {
  switch (o) {
    case Owner::Prompt: return "prompt";
    case Owner::User: return "user";
    case Owner::Api: return "api";
  }
  return "prompt";
}

inline Owner owner_of(EventSource s) { return s == EventSource::User ? Owner::User : Owner::Api; }

struct CursorRange {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const CursorRange&, const CursorRange&) = default;
};

struct CanonicalEvent {
  EventName name = EventName::Other;
  std::string raw_name;  // as logged; kept so `other` events stay inspectable
  EventSource source = EventSource::User;
  std::int64_t timestamp = 0;
  std::optional<std::size_t> offset;
  std::optional<std::u32string> text;
  std::optional<std::size_t> length;  // delete width when the dialect logs a count, not the text
  std::optional<CursorRange> cursor_range;
  std::vector<std::string> suggestions;

  bool is_edit() const { return name == EventName::TextInsert || name == EventName::TextDelete; }

  std::size_t edit_length() const {
    if (text) return text->size();
    return length.value_or(0);
  }

  friend bool operator==(const CanonicalEvent&, const CanonicalEvent&) = default;
};

struct SessionMeta {
  std::string session_id;
  std::string author_id;
  PromptKind prompt_kind = PromptKind::Creative;
  std::string prompt_id;
  double temperature = 0.0;
  double ownership_pct = 0.0;
};

struct SessionTrace {
  SessionMeta meta;
  std::vector<CanonicalEvent> events;
  std::u32string prompt_text;
  std::u32string final_text;
  bool final_text_logged = true;  // false when final_text was derived by replay
};

struct DocumentState {
  std::u32string text;
  CursorRange cursor;
  std::size_t event_index = 0;
};

// ---------------------------------------------------------------------------
// Metadata

/// Temperatures used by the source study: {low, high} per prompt kind.
inline std::pair<double, double> conformant_temperatures(PromptKind k) {
  return k == PromptKind::Argumentative ? std::pair{0.2, 0.9} : std::pair{0.3, 0.75};
}

inline bool is_conformant_temperature(PromptKind k, double t) {
  auto [lo, hi] = conformant_temperatures(k);
  return std::abs(t - lo) < 1e-9 || std::abs(t - hi) < 1e-9;
}

/// High iff at or above the midpoint of the kind's conformant pair.
inline bool is_high_temperature(PromptKind k, double t) {
  auto [lo, hi] = conformant_temperatures(k);
  return t >= 0.5 * (lo + hi);
}

inline PromptKind prompt_kind_from(std::string_view s) {
  if (s == "creative") return PromptKind::Creative;
  if (s == "argumentative") return PromptKind::Argumentative;
  throw DataError("unknown prompt_kind '" + std::string(s) + "'");
}

struct MetadataTable {
  std::vector<SessionMeta> rows;
  std::vector<std::string> warnings;

  const SessionMeta* find(const std::string& session_id) const {
    for (const auto& r : rows)
      if (r.session_id == session_id) return &r;
    return nullptr;
  }
};

inline const std::vector<std::string>& metadata_columns() {
  static const std::vector<std::string> cols{"session_id",  "author_id",   "prompt_kind",
                                             "prompt_id",   "temperature", "ownership_pct"};
  return cols;
}

inline MetadataTable read_metadata(std::istream& in) {
  auto rows = csv::read(in);
  if (rows.empty()) throw DataError("metadata: empty table");
  const auto& header = rows.front();
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const auto& name : metadata_columns())
    if (!col.count(name)) throw DataError("metadata: missing column '" + name + "'");

  MetadataTable table;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto get = [&](const std::string& name) -> const std::string& {
      auto idx = col.at(name);
      if (idx >= row.size()) throw DataError("metadata: row " + std::to_string(r + 1) + " is short");
      return row[idx];
    };
    SessionMeta m;
    m.session_id = get("session_id");
    m.author_id = get("author_id");
    m.prompt_kind = prompt_kind_from(get("prompt_kind"));
    m.prompt_id = get("prompt_id");
    try {
      m.temperature = std::stod(get("temperature"));
      m.ownership_pct = std::stod(get("ownership_pct"));
    } catch (const std::exception&) {
      throw DataError("metadata: row " + std::to_string(r + 1) + " has a non-numeric field");
    }
    if (m.ownership_pct < 0.0 || m.ownership_pct > 100.0)
      throw DataError("metadata: ownership_pct out of [0,100] for " + m.session_id);
    if (!is_conformant_temperature(m.prompt_kind, m.temperature))
      table.warnings.push_back("session " + m.session_id + ": temperature " + csv::num(m.temperature) +
                               " is not a conformant value for " + std::string(to_string(m.prompt_kind)));
    table.rows.push_back(std::move(m));
  }
  return table;
}

inline void write_metadata(std::ostream& out, const std::vector<SessionMeta>& rows) {
  csv::write_row(out, metadata_columns());
  for (const auto& m : rows)
    csv::write_row(out, {m.session_id, m.author_id, std::string(to_string(m.prompt_kind)), m.prompt_id,
                         csv::num(m.temperature), csv::num(m.ownership_pct)});
}

// ---------------------------------------------------------------------------
// Parsing

struct RecordError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ParseOptions {
  double max_malformed_fraction = 0.05;
};

struct ParseResult {
  SessionTrace trace;
  std::vector<RecordError> errors;
  std::size_t records = 0;   // non-empty, non-header lines
  std::size_t expanded = 0;  // extra events produced by multi-op deltas
};

/// Raised when too many lines of a session are malformed.
class SessionParseError : public DataError {
public:
  SessionParseError(const std::string& what, std::vector<RecordError> errors)
      : DataError(what), errors_(std::move(errors)) {}
  const std::vector<RecordError>& errors() const { return errors_; }

private:
  std::vector<RecordError> errors_;
};

namespace detail {

inline std::size_t as_index(const json& v, const char* what) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) throw DataError(std::string(what) + " must be an integer");
  auto x = v.get<std::int64_t>();
  if (x < 0) throw DataError(std::string(what) + " must be non-negative");
  return static_cast<std::size_t>(x);
}

inline EventSource source_from(const json& obj, const char* key) {
  if (!obj.contains(key)) return EventSource::User;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw DataError(std::string(key) + " must be a string");
  auto s = v.get<std::string>();
  if (s == "user") return EventSource::User;
  if (s == "api") return EventSource::Api;
  throw DataError("unknown event source '" + s + "'");
}

inline void check_edit_fields(const CanonicalEvent& e) {
  if (e.name == EventName::TextInsert && (!e.offset || !e.text))
    throw DataError("text-insert requires offset and text");
  if (e.name == EventName::TextDelete && (!e.offset || (!e.text && !e.length)))
    throw DataError("text-delete requires offset and text or length");
}

inline CanonicalEvent parse_canonical(const json& obj) {
  CanonicalEvent e;
  const auto& name = obj.at("event_name");
  if (!name.is_string()) throw DataError("event_name must be a string");
  e.raw_name = name.get<std::string>();
  e.name = event_name_from(e.raw_name);
  e.source = source_from(obj, "event_source");
  if (obj.contains("timestamp")) {
    const auto& ts = obj.at("timestamp");
    if (!ts.is_number()) throw DataError("timestamp must be numeric");
    e.timestamp = ts.get<std::int64_t>();
    if (e.timestamp < 0) throw DataError("timestamp must be non-negative");
  }
  if (obj.contains("offset") && !obj.at("offset").is_null()) e.offset = as_index(obj.at("offset"), "offset");
  if (obj.contains("text") && !obj.at("text").is_null()) {
    if (!obj.at("text").is_string()) throw DataError("text must be a string");
    e.text = utf8_decode(obj.at("text").get<std::string>());
  }
  if (obj.contains("length") && !obj.at("length").is_null()) e.length = as_index(obj.at("length"), "length");
  if (obj.contains("cursor_range") && !obj.at("cursor_range").is_null()) {
    const auto& cr = obj.at("cursor_range");
    if (!cr.is_array() || cr.size() != 2) throw DataError("cursor_range must be [start,end]");
    e.cursor_range = CursorRange{as_index(cr[0], "cursor_range"), as_index(cr[1], "cursor_range")};
    if (e.cursor_range->start > e.cursor_range->end) throw DataError("cursor_range start > end");
  }
  if (obj.contains("suggestions") && !obj.at("suggestions").is_null()) {
    for (const auto& s : obj.at("suggestions")) {
      if (!s.is_string()) throw DataError("suggestions must be strings");
      e.suggestions.push_back(s.get<std::string>());
    }
  }
  check_edit_fields(e);
  return e;
}

/// Expands one CoAuthor record into canonical events (more than one for multi-op deltas).
inline std::vector<CanonicalEvent> parse_coauthor(const json& obj) {
  CanonicalEvent base;
  const auto& name = obj.at("eventName");
  if (!name.is_string()) throw DataError("eventName must be a string");
  base.raw_name = name.get<std::string>();
  base.name = event_name_from(base.raw_name);
  base.source = source_from(obj, "eventSource");
  if (obj.contains("eventTimestamp")) {
    const auto& ts = obj.at("eventTimestamp");
    if (!ts.is_number()) throw DataError("eventTimestamp must be numeric");
    base.timestamp = ts.get<std::int64_t>();
  }
  if (obj.contains("cursorRange") && obj.at("cursorRange").is_object()) {
    const auto& cr = obj.at("cursorRange");
    auto idx = as_index(cr.at("index"), "cursorRange.index");
    auto len = cr.contains("length") ? as_index(cr.at("length"), "cursorRange.length") : 0;
    base.cursor_range = CursorRange{idx, idx + len};
  } else if (obj.contains("currentCursor") && obj.at("currentCursor").is_number_integer()) {
    auto c = as_index(obj.at("currentCursor"), "currentCursor");
    base.cursor_range = CursorRange{c, c};
  }
  if (obj.contains("currentSuggestions") && obj.at("currentSuggestions").is_array()) {
    for (const auto& s : obj.at("currentSuggestions")) {
      if (s.is_string()) base.suggestions.push_back(s.get<std::string>());
      else if (s.is_object() && s.contains("trimmed") && s.at("trimmed").is_string())
        base.suggestions.push_back(s.at("trimmed").get<std::string>());
      else if (s.is_object() && s.contains("original") && s.at("original").is_string())
        base.suggestions.push_back(s.at("original").get<std::string>());
    }
  }

  if (!obj.contains("textDelta") || !obj.at("textDelta").is_object() || !obj.at("textDelta").contains("ops")) {
    if (base.is_edit()) throw DataError(base.raw_name + " without textDelta.ops");
    return {base};
  }

  std::vector<CanonicalEvent> out;
  std::size_t pos = 0;
  for (const auto& op : obj.at("textDelta").at("ops")) {
    if (!op.is_object()) throw DataError("delta op must be an object");
    if (op.contains("retain")) {
      pos += as_index(op.at("retain"), "retain");
    } else if (op.contains("insert")) {
      if (!op.at("insert").is_string()) throw DataError("non-text insert op");
      CanonicalEvent e = base;
      e.name = EventName::TextInsert;
      e.raw_name = "text-insert";
      e.offset = pos;
      e.text = utf8_decode(op.at("insert").get<std::string>());
      pos += e.text->size();
      e.cursor_range.reset();
      out.push_back(std::move(e));
    } else if (op.contains("delete")) {
      CanonicalEvent e = base;
      e.name = EventName::TextDelete;
      e.raw_name = "text-delete";
      e.offset = pos;
      e.length = as_index(op.at("delete"), "delete");
      e.cursor_range.reset();
      out.push_back(std::move(e));
    } else {
      throw DataError("unknown delta op");
    }
  }
  if (out.empty()) {
    // Pure-retain delta: keep the record as a non-edit event.
    base.name = base.is_edit() ? EventName::Other : base.name;
    out.push_back(base);
  }
  return out;
}

}  // namespace detail

inline SessionTrace& finalize_trace(SessionTrace& trace);

/// Parses one session log. Malformed lines are skipped and reported; the whole
/// session is rejected once they exceed `options.max_malformed_fraction`.
inline ParseResult parse_session(std::istream& raw, const SessionMeta& meta, const ParseOptions& options = {}) {
  ParseResult result;
  result.trace.meta = meta;
  bool have_final = false;
  bool coauthor = false;
  std::optional<std::int64_t> first_ts;
  std::optional<std::string> last_doc;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(raw, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      ++result.records;
      result.errors.push_back({lineno, std::string("invalid JSON: ") + e.what()});
      continue;
    }
    if (obj.is_object() && obj.value("record", "") == "header") {
      try {
        if (obj.contains("prompt_text")) result.trace.prompt_text = utf8_decode(obj.at("prompt_text").get<std::string>());
        if (obj.contains("final_text")) {
          result.trace.final_text = utf8_decode(obj.at("final_text").get<std::string>());
          have_final = true;
        }
      } catch (const std::exception& e) {
        throw DataError(std::string("malformed header: ") + e.what());
      }
      continue;
    }
    ++result.records;
    try {
      if (!obj.is_object()) throw DataError("record is not an object");
      if (obj.contains("eventName")) {
        coauthor = true;
        if (obj.contains("currentDoc") && obj.at("currentDoc").is_string()) {
          auto doc = obj.at("currentDoc").get<std::string>();
          if (result.trace.events.empty() && !first_ts && result.trace.prompt_text.empty())
            result.trace.prompt_text = utf8_decode(doc);
          last_doc = std::move(doc);
        }
        auto evs = detail::parse_coauthor(obj);
        if (!first_ts) first_ts = evs.front().timestamp;
        result.expanded += evs.size() - 1;
        for (auto& e : evs) result.trace.events.push_back(std::move(e));
      } else if (obj.contains("event_name")) {
        result.trace.events.push_back(detail::parse_canonical(obj));
      } else {
        throw DataError("record has no event name");
      }
    } catch (const std::exception& e) {
      result.errors.push_back({lineno, e.what()});
    }
  }

  if (result.records > 0) {
    double frac = static_cast<double>(result.errors.size()) / static_cast<double>(result.records);
    if (frac > options.max_malformed_fraction)
      throw SessionParseError("session " + meta.session_id + ": " + std::to_string(result.errors.size()) + " of " +
                                  std::to_string(result.records) + " records malformed",
                              result.errors);
  }

  if (coauthor && first_ts) {
    for (auto& e : result.trace.events) e.timestamp = std::max<std::int64_t>(0, e.timestamp - *first_ts);
    if (!have_final && last_doc) {
      result.trace.final_text = utf8_decode(*last_doc);
      have_final = true;
    }
  }
  std::stable_sort(result.trace.events.begin(), result.trace.events.end(),
                   [](const CanonicalEvent& a, const CanonicalEvent& b) { return a.timestamp < b.timestamp; });
  result.trace.final_text_logged = have_final;
  if (!have_final) finalize_trace(result.trace);
  return result;
}

inline ParseResult parse_session(std::string_view raw, const SessionMeta& meta, const ParseOptions& options = {}) {
  std::istringstream in{std::string(raw)};
  return parse_session(in, meta, options);
}

// ---------------------------------------------------------------------------
// Replay

/// Applies events one at a time, keeping per-character authorship alongside
/// the text. A Replayer is single-use and strictly sequential.
class Replayer {
public:
  explicit Replayer(const SessionTrace& trace)
      : trace_(&trace), owners_(trace.prompt_text.size(), Owner::Prompt), prompt_alive_(trace.prompt_text.size()) {
    state_.text = trace.prompt_text;
    state_.cursor = {state_.text.size(), state_.text.size()};
  }

  bool done() const { return next_ >= trace_->events.size(); }
  std::size_t next_index() const { return next_; }
  const DocumentState& state() const { return state_; }
  const std::vector<Owner>& owners() const { return owners_; }
  bool prompt_fully_removed() const { return prompt_removed_; }

  /// Applies the next event; throws ReplayError on index violations.
  const DocumentState& step() {
    const std::size_t idx = next_;
    const auto& e = trace_->events.at(idx);
    auto& text = state_.text;
    switch (e.name) {
      case EventName::TextInsert: {
        const auto p = *e.offset;
        if (p > text.size())
          throw ReplayError(idx, "insert offset " + std::to_string(p) + " beyond length " + std::to_string(text.size()));
        text.insert(p, *e.text);
        owners_.insert(owners_.begin() + static_cast<std::ptrdiff_t>(p), e.text->size(), owner_of(e.source));
        state_.cursor = {p + e.text->size(), p + e.text->size()};
        break;
      }
      case EventName::TextDelete: {
        const auto p = *e.offset;
        const auto n = e.edit_length();
        if (p + n > text.size())
          throw ReplayError(idx, "delete range [" + std::to_string(p) + "," + std::to_string(p + n) +
                                     ") beyond length " + std::to_string(text.size()));
        if (e.text && text.compare(p, n, *e.text) != 0) throw ReplayError(idx, "deleted text does not match document");
        for (std::size_t i = p; i < p + n; ++i)
          if (owners_[i] == Owner::Prompt) --prompt_alive_;
        text.erase(p, n);
        owners_.erase(owners_.begin() + static_cast<std::ptrdiff_t>(p),
                      owners_.begin() + static_cast<std::ptrdiff_t>(p + n));
        if (!trace_->prompt_text.empty() && prompt_alive_ == 0) prompt_removed_ = true;
        state_.cursor = {p, p};
        break;
      }
      case EventName::CursorForward:
      case EventName::CursorBackward:
      case EventName::CursorSelect:
        if (e.cursor_range) {
          if (e.cursor_range->end > text.size())
            throw ReplayError(idx, "cursor range end " + std::to_string(e.cursor_range->end) + " beyond length " +
                                       std::to_string(text.size()));
          state_.cursor = *e.cursor_range;
        }
        break;
      default:
        break;
    }
    state_.event_index = idx;
    ++next_;
    return state_;
  }

private:
  const SessionTrace* trace_;
  DocumentState state_;
  std::vector<Owner> owners_;
  std::size_t prompt_alive_;
  bool prompt_removed_ = false;
  std::size_t next_ = 0;
};

/// Input range over the document states of a trace, one per event.
class ReplayRange {
public:
  explicit ReplayRange(const SessionTrace& trace) : trace_(&trace) {}

  class iterator {
  public:
    using iterator_category = std::input_iterator_tag;
    using value_type = DocumentState;
    using difference_type = std::ptrdiff_t;
    using pointer = const DocumentState*;
    using reference = const DocumentState&;

    iterator() = default;
    explicit iterator(const SessionTrace& trace) : replayer_(std::make_shared<Replayer>(trace)), at_end_(false) {
      advance();
    }

    reference operator*() const { return replayer_->state(); }
    pointer operator->() const { return &replayer_->state(); }
    iterator& operator++() {
      advance();
      return *this;
    }
    void operator++(int) { advance(); }
    friend bool operator==(const iterator& a, const iterator& b) { return a.at_end_ == b.at_end_; }

  private:
    void advance() {
      if (replayer_->done()) {
        at_end_ = true;
        return;
      }
      replayer_->step();
    }
    std::shared_ptr<Replayer> replayer_;
    bool at_end_ = true;
  };

  iterator begin() const { return trace_->events.empty() ? iterator{} : iterator{*trace_}; }
  iterator end() const { return iterator{}; }

private:
  const SessionTrace* trace_;
};

inline ReplayRange replay(const SessionTrace& trace) { return ReplayRange{trace}; }

/// Replays every event and returns the final text.
inline std::u32string replay_final_text(const SessionTrace& trace) {
  Replayer r(trace);
  while (!r.done()) r.step();
  return r.state().text;
}

/// Fills in final_text from replay when the log carried none.
inline SessionTrace& finalize_trace(SessionTrace& trace) {
  try {
    trace.final_text = replay_final_text(trace);
  } catch (const ReplayError&) {
    trace.final_text = trace.prompt_text;
  }
  trace.final_text_logged = false;
  return trace;
}

// ---------------------------------------------------------------------------
// Preprocessing

enum class OwnershipLabel { Api, User };

inline constexpr std::string_view to_string(OwnershipLabel l) { return l == OwnershipLabel::User ? "user" : "api"; }

struct Exclusion {
  std::string session_id;
  std::string reason;  // prompt-removed | missing-author | replay-error | final-text-mismatch
  std::string detail;
};

struct PreprocessOptions {
  std::optional<double> pinned_median;  // e.g. 76.0 to pin the source study's boundary
};

struct PreprocessResult {
  std::vector<SessionTrace> kept;
  std::vector<Exclusion> excluded;
  double ownership_median = 0.0;
  std::map<std::string, OwnershipLabel> ownership;  // by session_id, kept sessions only
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline PreprocessResult preprocess(std::vector<SessionTrace> corpus, const PreprocessOptions& options = {}) {
  PreprocessResult out;
  for (auto& s : corpus) {
    if (s.meta.author_id.empty()) {
      out.excluded.push_back({s.meta.session_id, "missing-author", ""});
      continue;
    }
    Replayer r(s);
    try {
      while (!r.done()) r.step();
    } catch (const ReplayError& e) {
      out.excluded.push_back({s.meta.session_id, "replay-error", e.what()});
      continue;
    }
    if (r.prompt_fully_removed()) {
      out.excluded.push_back({s.meta.session_id, "prompt-removed", ""});
      continue;
    }
    if (r.state().text != s.final_text) {
      out.excluded.push_back({s.meta.session_id, "final-text-mismatch", ""});
      continue;
    }
    out.kept.push_back(std::move(s));
  }
  std::vector<double> pct;
  for (const auto& s : out.kept) pct.push_back(s.meta.ownership_pct);
  out.ownership_median = options.pinned_median ? *options.pinned_median : median(pct);
  for (const auto& s : out.kept)
    out.ownership[s.meta.session_id] =
        s.meta.ownership_pct > out.ownership_median ? OwnershipLabel::User : OwnershipLabel::Api;
  return out;
}

// ---------------------------------------------------------------------------
// Serialisation

inline json to_json(const CanonicalEvent& e) {
  json j;
  j["event_name"] = e.name == EventName::Other ? e.raw_name : std::string(to_string(e.name));
  j["event_source"] = std::string(to_string(e.source));
  j["timestamp"] = e.timestamp;
  if (e.offset) j["offset"] = *e.offset;
  if (e.text) j["text"] = utf8_encode(*e.text);
  if (e.length && !e.text) j["length"] = *e.length;
  if (e.cursor_range) j["cursor_range"] = {e.cursor_range->start, e.cursor_range->end};
  if (!e.suggestions.empty()) j["suggestions"] = e.suggestions;
  return j;
}

/// Writes a trace in the canonical line dialect (header + one event per line).
inline void write_trace(std::ostream& out, const SessionTrace& trace) {
  json header{{"record", "header"},
              {"session_id", trace.meta.session_id},
              {"prompt_text", utf8_encode(trace.prompt_text)}};
  if (trace.final_text_logged) header["final_text"] = utf8_encode(trace.final_text);
  out << header.dump() << '\n';
  for (const auto& e : trace.events) out << to_json(e).dump() << '\n';
}

/// Normalised event table, one row per event across sessions.
inline void write_event_table(std::ostream& out, const std::vector<SessionTrace>& sessions) {
  csv::write_row(out, {"session_id", "author_id", "event_index", "event_name", "event_source", "timestamp", "offset",
                       "text", "cursor_start", "cursor_end", "n_suggestions"});
  for (const auto& s : sessions) {
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      const auto& e = s.events[i];
      csv::write_row(out, {s.meta.session_id, s.meta.author_id, std::to_string(i),
                           e.name == EventName::Other ? e.raw_name : std::string(to_string(e.name)),
                           std::string(to_string(e.source)), std::to_string(e.timestamp),
                           e.offset ? std::to_string(*e.offset) : "", e.text ? utf8_encode(*e.text) : "",
                           e.cursor_range ? std::to_string(e.cursor_range->start) : "",
                           e.cursor_range ? std::to_string(e.cursor_range->end) : "",
                           std::to_string(e.suggestions.size())});
    }
  }
}

inline json exclusion_report(const PreprocessResult& r) {
  json j;
  j["kept"] = r.kept.size();
  j["ownership_median"] = r.ownership_median;
  j["excluded"] = json::array();
  for (const auto& x : r.excluded) j["excluded"].push_back({{"session_id", x.session_id}, {"reason", x.reason}, {"detail", x.detail}});
  return j;
}

}  // namespace cowrite
