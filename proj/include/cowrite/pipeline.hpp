#pragma once

// Glue between stages: corpus loading, parallel coding, the per-session
// condition table, and the three condition comparisons (ownership, prompt
// kind, temperature) run over an ENA model.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cowrite/coder.hpp"
#include "cowrite/csv.hpp"
#include "cowrite/ena.hpp"
#include "cowrite/error.hpp"
#include "cowrite/parallel.hpp"
#include "cowrite/stats.hpp"
#include "cowrite/trace.hpp"

namespace cowrite::pipeline {

namespace fs = std::filesystem;

/// Expands directories to their *.jsonl files; the result is sorted.
inline std::vector<fs::path> trace_files(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".jsonl") out.push_back(e.path());
    } else if (fs::is_regular_file(p)) {
      out.push_back(p);
    } else {
      throw UsageError("input not found: " + in);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct LoadedCorpus {
  std::vector<SessionTrace> sessions;
  std::vector<Exclusion> rejected;  // whole sessions the parser refused
  nlohmann::json parse_errors = nlohmann::json::array();
  std::size_t records = 0;
  std::size_t expanded = 0;
};

/// A trace file's stem is its session id. Sessions without a metadata row
/// keep an empty author and are excluded later as missing-author.
inline LoadedCorpus load_corpus(const std::vector<fs::path>& files, const MetadataTable& meta,
                                const ParseOptions& options = {}) {
  LoadedCorpus out;
  for (const auto& f : files) {
    const std::string id = f.stem().string();
    SessionMeta m;
    if (const auto* row = meta.find(id)) m = *row;
    else m.session_id = id;
    std::ifstream in(f);
    if (!in) throw DataError("cannot read " + f.string());
    try {
      auto r = parse_session(in, m, options);
      out.records += r.records;
      out.expanded += r.expanded;
      for (const auto& e : r.errors) out.parse_errors.push_back({{"session_id", id}, {"line", e.line}, {"message", e.message}});
      out.sessions.push_back(std::move(r.trace));
    } catch (const SessionParseError& e) {
      out.rejected.push_back({id, "malformed", e.what()});
      for (const auto& x : e.errors()) out.parse_errors.push_back({{"session_id", id}, {"line", x.line}, {"message", x.message}});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coding

struct CodedCorpus {
  std::vector<CodedEvent> events;
  std::vector<std::string> warnings;
  std::vector<nlohmann::json> ledgers;  // per session, in input order
};

inline CodedCorpus code_corpus(const std::vector<SessionTrace>& sessions, const CoderOptions& options, unsigned jobs = 1,
                               bool keep_ledgers = false) {
  std::vector<CodingResult> results(sessions.size());
  parallel_for(sessions.size(), jobs, [&](std::size_t i) { results[i] = code_session(sessions[i], options); });
  CodedCorpus out;
  for (auto& r : results) {
    out.events.insert(out.events.end(), std::make_move_iterator(r.events.begin()), std::make_move_iterator(r.events.end()));
    out.warnings.insert(out.warnings.end(), r.warnings.begin(), r.warnings.end());
    if (keep_ledgers) out.ledgers.push_back(to_json(r.ledger));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Session conditions

struct SessionRow {
  SessionMeta meta;
  OwnershipLabel ownership = OwnershipLabel::Api;
  bool temperature_high = false;
};

inline std::vector<SessionRow> session_rows(const PreprocessResult& pre) {
  std::vector<SessionRow> rows;
  for (const auto& s : pre.kept)
    rows.push_back({s.meta, pre.ownership.at(s.meta.session_id), is_high_temperature(s.meta.prompt_kind, s.meta.temperature)});
  std::sort(rows.begin(), rows.end(), [](const SessionRow& a, const SessionRow& b) { return a.meta.session_id < b.meta.session_id; });
  return rows;
}

inline void write_session_rows(std::ostream& out, const std::vector<SessionRow>& rows) {
  auto cols = metadata_columns();
  cols.push_back("ownership_label");
  cols.push_back("temperature_label");
  csv::write_row(out, cols);
  for (const auto& r : rows)
    csv::write_row(out, {r.meta.session_id, r.meta.author_id, std::string(to_string(r.meta.prompt_kind)), r.meta.prompt_id,
                         csv::num(r.meta.temperature), csv::num(r.meta.ownership_pct), std::string(to_string(r.ownership)),
                         r.temperature_high ? "high" : "low"});
}

inline std::vector<SessionRow> read_session_rows(std::istream& in) {
  auto rows = csv::read(in);
  if (rows.empty()) throw DataError("session table: empty");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].size(); ++i) col[rows[0][i]] = i;
  for (const char* c : {"session_id", "author_id", "prompt_kind", "prompt_id", "temperature", "ownership_pct",
                        "ownership_label", "temperature_label"})
    if (!col.count(c)) throw DataError(std::string("session table: missing column ") + c);
  std::vector<SessionRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != rows[0].size()) throw DataError("session table: row " + std::to_string(r + 1) + " has wrong width");
    SessionRow s;
    s.meta.session_id = row[col["session_id"]];
    s.meta.author_id = row[col["author_id"]];
    s.meta.prompt_kind = prompt_kind_from(row[col["prompt_kind"]]);
    s.meta.prompt_id = row[col["prompt_id"]];
    try {
      s.meta.temperature = std::stod(row[col["temperature"]]);
      s.meta.ownership_pct = std::stod(row[col["ownership_pct"]]);
    } catch (const std::exception&) {
      throw DataError("session table: row " + std::to_string(r + 1) + " has a non-numeric field");
    }
    s.ownership = row[col["ownership_label"]] == "user" ? OwnershipLabel::User : OwnershipLabel::Api;
    s.temperature_high = row[col["temperature_label"]] == "high";
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Condition comparisons

/// The three study conditions as binary factors: level coded 1, reference 0.
inline const std::vector<stats::Factor>& condition_factors() {
  static const std::vector<stats::Factor> f{
      {"prompt_kind", "argumentative", "creative"}, {"ownership", "api", "user"}, {"temperature", "low", "high"}};
  return f;
}

inline int level_of(const SessionRow& r, const std::string& factor) {
  if (factor == "prompt_kind") return r.meta.prompt_kind == PromptKind::Creative ? 1 : 0;
  if (factor == "ownership") return r.ownership == OwnershipLabel::User ? 1 : 0;
  if (factor == "temperature") return r.temperature_high ? 1 : 0;
  throw UsageError("unknown factor " + factor);
}

/// Model rows joined to their session rows; units without a row are skipped.
struct Joined {
  std::vector<std::size_t> unit;  // model row
  std::vector<const SessionRow*> row;
};

inline Joined join(const ena::Model& model, const std::vector<SessionRow>& rows) {
  std::map<std::string, const SessionRow*> by_id;
  for (const auto& r : rows) by_id[r.meta.session_id] = &r;
  Joined j;
  for (std::size_t u = 0; u < model.units.size(); ++u) {
    auto it = by_id.find(model.units[u].session_id);
    if (it == by_id.end()) continue;
    j.unit.push_back(u);
    j.row.push_back(it->second);
  }
  return j;
}

struct DimensionResult {
  std::size_t dim = 0;
  stats::IccResult icc_author;
  std::optional<stats::IccResult> icc_prompt;
  stats::RegressionFit fit;
};

struct StudyOptions {
  stats::RegressionOptions regression;
  bool force_interactions = false;
  bool test_interactions = true;
};

struct StudyResult {
  std::vector<stats::Factor> factors;   // factors actually estimated
  std::vector<std::string> dropped;     // constant factors
  std::vector<DimensionResult> dims;
};

inline StudyResult run_study(const ena::Model& model, const std::vector<SessionRow>& rows, const StudyOptions& options) {
  const auto j = join(model, rows);
  if (j.unit.size() < 3) throw UsageError("fewer than three modelled sessions have condition metadata");
  StudyResult out;
  for (const auto& f : condition_factors()) {
    bool zero = false, one = false;
    for (const auto* r : j.row) (level_of(*r, f.name) ? one : zero) = true;
    if (zero && one) out.factors.push_back(f);
    else out.dropped.push_back(f.name);
  }
  stats::RegressionSpec spec;
  spec.factors = out.factors;
  spec.force_interactions = options.force_interactions;
  spec.test_interactions = options.test_interactions && out.factors.size() > 1;

  std::vector<std::string> authors, prompts;
  for (const auto* r : j.row) {
    authors.push_back(r->meta.author_id);
    prompts.push_back(r->meta.prompt_id);
  }
  for (std::size_t d = 0; d < model.dims(); ++d) {
    spec.outcome = "dim" + std::to_string(d + 1);
    std::vector<stats::Observation> obs;
    std::vector<double> y;
    for (std::size_t i = 0; i < j.unit.size(); ++i) {
      stats::Observation o;
      o.y = model.projection.scores(static_cast<Eigen::Index>(j.unit[i]), static_cast<Eigen::Index>(d));
      o.group = j.row[i]->meta.author_id;
      for (const auto& f : out.factors) o.levels.push_back(level_of(*j.row[i], f.name));
      y.push_back(o.y);
      obs.push_back(std::move(o));
    }
    DimensionResult r;
    r.dim = d;
    stats::IccOptions io;
    io.bootstrap = options.regression.bootstrap.replicates;
    io.seed = options.regression.bootstrap.seed;
    io.jobs = options.regression.bootstrap.jobs;
    r.icc_author = stats::icc(y, authors, io);
    try {
      r.icc_prompt = stats::icc(y, prompts, io);
    } catch (const UsageError&) {
    }
    r.fit = stats::fit_regression(spec, obs, options.regression);
    out.dims.push_back(std::move(r));
  }
  return out;
}

inline nlohmann::json to_json(const StudyResult& s) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : s.dims) {
    nlohmann::json j{{"dimension", d.dim + 1}, {"icc_author", stats::to_json(d.icc_author)}, {"model", stats::to_json(d.fit)}};
    if (d.icc_prompt) j["icc_prompt"] = stats::to_json(*d.icc_prompt);
    dims.push_back(std::move(j));
  }
  nlohmann::json factors = nlohmann::json::array();
  for (const auto& f : s.factors) factors.push_back({{"name", f.name}, {"reference", f.reference}, {"level", f.level}});
  return {{"factors", factors}, {"dropped_factors", s.dropped}, {"dimensions", dims}};
}

/// Members of each level of a factor, as model rows.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split(const Joined& j, const std::string& factor) {
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < j.unit.size(); ++i) (level_of(*j.row[i], factor) ? out.first : out.second).push_back(j.unit[i]);
  return out;
}

}  // namespace cowrite::pipeline
