// cowrite: file-based pipeline from keystroke logs to ENA figures.
//
//   cowrite generate --profiles telling,transforming --out corpus/
//   cowrite ingest   --input corpus/ --meta corpus/metadata.csv --out work/ingest
//   cowrite code     --input work/ingest --out work/code
//   cowrite ena      --input work/code --out work/ena
//   cowrite stats    --input work/ena --meta work/ingest/sessions.csv --out work/stats
//   cowrite report   --input work/ena --meta work/ingest/sessions.csv --out work/report
//   cowrite run      --input corpus/ --meta corpus/metadata.csv --out work/
//
// Exit codes: 0 ok, 2 usage, 3 data or provider failure, 4 numerical failure.
// Errors are also written to stderr as one JSON object.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cowrite/cowrite.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cowrite;

namespace {

struct Options {
  std::vector<std::string> input;
  std::string meta;
  std::string out;
  std::string provider = "lexical";
  std::string endpoint = "http://127.0.0.1:8765";
  std::string model = "default";
  bool fallback_lexical = false;
  double mod_threshold = kDefaultModificationThreshold;
  double reflect_threshold = 0.9;
  std::size_t dims = 2;
  std::size_t bootstrap = 999;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  std::optional<double> pin_median;
  std::string interactions = "test";
  double max_malformed = 0.05;
  bool ledgers = false;

  std::vector<std::string> profiles{"telling", "transforming"};
  std::size_t sessions = 30;
  std::size_t sessions_per_author = 3;
  std::optional<double> length_mean;
  std::optional<double> length_spread;
  bool vary_conditions = false;
  bool no_truth = false;
};

fs::path ensure_dir(const std::string& p) {
  if (p.empty()) throw UsageError("--out is required");
  fs::create_directories(p);
  return fs::path(p);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot read " + p.string());
  return in;
}

void write_json(const fs::path& p, const json& j) { open_out(p) << j.dump(2) << '\n'; }

/// `path` itself when it is a file, else `path/name`.
fs::path resolve(const std::string& path, const std::string& name) {
  if (path.empty()) throw UsageError("--input is required");
  fs::path p(path);
  if (fs::is_directory(p)) p /= name;
  if (!fs::exists(p)) throw UsageError("missing input " + p.string());
  return p;
}

void check_thresholds(const Options& o) {
  if (!(o.mod_threshold > 0.0 && o.mod_threshold < 1.0)) throw UsageError("--mod-threshold must lie in (0,1)");
  if (!(o.reflect_threshold > 0.0 && o.reflect_threshold < 1.0)) throw UsageError("--reflect-threshold must lie in (0,1)");
  if (o.bootstrap < 200) throw UsageError("--bootstrap must be at least 200");
  if (o.dims == 0) throw UsageError("--dims must be positive");
  if (o.jobs == 0) throw UsageError("--jobs must be positive");
}

// ---------------------------------------------------------------------------

void cmd_generate(const Options& o) {
  std::vector<synth::BehaviorProfile> profiles;
  for (const auto& name : o.profiles)
    profiles.push_back(fs::exists(name) ? synth::load_profile(name) : synth::bundled_profile(name));
  synth::CorpusOptions c;
  c.sessions_per_profile = o.sessions;
  c.sessions_per_author = o.sessions_per_author;
  c.seed = o.seed;
  c.length_mean = o.length_mean;
  c.length_spread = o.length_spread;
  c.vary_conditions = o.vary_conditions;
  const auto corpus = synth::generate_corpus(profiles, c);
  const auto dir = ensure_dir(o.out);
  synth::write_corpus(corpus, dir, !o.no_truth);
  std::cout << "generated " << corpus.sessions.size() << " sessions in " << dir.string() << '\n';
}

fs::path cmd_ingest(const Options& o, const fs::path& dir) {
  if (o.input.empty()) throw UsageError("--input is required");
  if (o.meta.empty()) throw UsageError("--meta is required");
  auto meta_in = open_in(o.meta);
  const auto meta = read_metadata(meta_in);
  ParseOptions po;
  po.max_malformed_fraction = o.max_malformed;
  auto loaded = pipeline::load_corpus(pipeline::trace_files(o.input), meta, po);
  if (loaded.sessions.empty() && loaded.rejected.empty()) throw UsageError("no trace files found");

  PreprocessOptions pre_opts;
  pre_opts.pinned_median = o.pin_median;
  auto pre = preprocess(std::move(loaded.sessions), pre_opts);

  fs::create_directories(dir / "sessions");
  for (const auto& s : pre.kept) {
    auto out = open_out(dir / "sessions" / (s.meta.session_id + ".jsonl"));
    write_trace(out, s);
  }
  {
    auto out = open_out(dir / "events.csv");
    write_event_table(out, pre.kept);
  }
  {
    auto out = open_out(dir / "sessions.csv");
    pipeline::write_session_rows(out, pipeline::session_rows(pre));
  }
  {
    auto out = open_out(dir / "metadata.csv");
    std::vector<SessionMeta> rows;
    for (const auto& s : pre.kept) rows.push_back(s.meta);
    write_metadata(out, rows);
  }
  auto report = exclusion_report(pre);
  for (const auto& x : loaded.rejected)
    report["excluded"].push_back({{"session_id", x.session_id}, {"reason", x.reason}, {"detail", x.detail}});
  report["records"] = loaded.records;
  report["expanded_events"] = loaded.expanded;
  report["metadata_warnings"] = meta.warnings;
  write_json(dir / "exclusions.json", report);
  write_json(dir / "parse_errors.json", loaded.parse_errors);
  for (const auto& w : meta.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "ingested " << pre.kept.size() << " sessions, excluded " << report["excluded"].size() << '\n';
  if (pre.kept.empty()) throw DataError("every session was excluded");
  return dir;
}

fs::path cmd_code(const Options& o, const std::string& input, const fs::path& dir) {
  check_thresholds(o);
  const fs::path in_dir = fs::is_directory(fs::path(input) / "sessions") ? fs::path(input) / "sessions" : fs::path(input);
  const auto files = pipeline::trace_files({in_dir.string()});
  if (files.empty()) throw UsageError("no sessions to code in " + in_dir.string());

  std::vector<SessionTrace> sessions;
  MetadataTable meta;
  const fs::path meta_path = fs::path(input) / "metadata.csv";
  if (fs::exists(meta_path)) {
    auto m = open_in(meta_path);
    meta = read_metadata(m);
  }
  auto loaded = pipeline::load_corpus(files, meta);
  if (!loaded.rejected.empty()) throw DataError("session " + loaded.rejected.front().session_id + " is malformed");

  CoderOptions co;
  co.mod_threshold = o.mod_threshold;
  co.reflect_threshold = o.reflect_threshold;
  std::unique_ptr<RemoteEmbeddingProvider> remote;
  std::unique_ptr<TfIdfModel> fallback;
  std::string provider_label = "lexical-tfidf";
  if (o.provider == "remote") {
    RemoteConfig rc;
    rc.endpoint = o.endpoint;
    if (const char* env = std::getenv("COWRITE_EMBED_ENDPOINT"); env && *env) rc.endpoint = env;
    rc.model = o.model;
    rc.fallback_to_lexical = o.fallback_lexical;
    if (rc.fallback_to_lexical) {
      std::vector<std::u32string> docs;
      for (const auto& s : loaded.sessions)
        for (auto& span : segment(s.final_text, Abbreviations::builtin())) docs.push_back(std::move(span.text));
      fallback = std::make_unique<TfIdfModel>(docs);
    }
    remote = std::make_unique<RemoteEmbeddingProvider>(rc, fallback.get());
    const auto h = remote->health();
    if (h.status != "ok") throw ProviderError("embedding service at " + rc.endpoint + " is " + h.status);
    co.provider = remote.get();
    provider_label = "remote-embedding:" + (h.model.empty() ? rc.model : h.model);
  } else if (o.provider != "lexical") {
    throw UsageError("--provider must be lexical or remote");
  }

  const auto coded = pipeline::code_corpus(loaded.sessions, co, o.jobs, o.ledgers);
  {
    auto out = open_out(dir / "coded.csv");
    write_coded_table(out, coded.events);
  }
  if (o.ledgers) {
    fs::create_directories(dir / "ledgers");
    for (std::size_t i = 0; i < loaded.sessions.size(); ++i)
      write_json(dir / "ledgers" / (loaded.sessions[i].meta.session_id + ".json"), coded.ledgers[i]);
  }
  json counts;
  for (std::size_t c = 0; c < kNumCodes; ++c) {
    std::size_t n = 0;
    for (const auto& e : coded.events) n += e.codes.test(c) ? 1 : 0;
    counts[std::string(kCodeNames[c])] = n;
  }
  write_json(dir / "coding.json", {{"sessions", loaded.sessions.size()},
                                   {"events", coded.events.size()},
                                   {"provider", provider_label},
                                   {"mod_threshold", o.mod_threshold},
                                   {"reflect_threshold", o.reflect_threshold},
                                   {"code_counts", counts},
                                   {"warnings", coded.warnings}});
  std::cout << "coded " << coded.events.size() << " events from " << loaded.sessions.size() << " sessions\n";
  return dir;
}

fs::path cmd_ena(const Options& o, const std::string& input, const fs::path& dir) {
  check_thresholds(o);
  auto in = open_in(resolve(input, "coded.csv"));
  const auto coded = read_coded_table(in);
  if (coded.empty()) throw UsageError("coded table is empty");
  const auto vectors = ena::accumulate(coded, o.jobs);
  const auto model = ena::fit(vectors, o.dims);
  write_json(dir / "model.json", ena::to_json(model));
  {
    auto out = open_out(dir / "adjacency_raw.csv");
    ena::write_adjacency_csv(out, model, false);
  }
  {
    auto out = open_out(dir / "adjacency_normalized.csv");
    ena::write_adjacency_csv(out, model, true);
  }
  {
    auto out = open_out(dir / "scores.csv");
    ena::write_scores_csv(out, model);
  }
  std::size_t zero = 0;
  for (bool z : model.zero_units) zero += z ? 1 : 0;
  if (zero) std::cerr << "warning: " << zero << " units have no co-occurrences and sit at the origin\n";
  if (model.nodes.rank_deficient) std::cerr << "warning: node placement is rank deficient; minimum-norm solution used\n";
  std::cout << "modelled " << model.units.size() << " units; variance explained";
  for (double v : model.projection.variance_explained) std::cout << ' ' << v;
  std::cout << '\n';
  return dir;
}

ena::Model load_model(const std::string& input) {
  auto in = open_in(resolve(input, "model.json"));
  try {
    return ena::model_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model.json: ") + e.what());
  }
}

std::vector<pipeline::SessionRow> load_rows(const std::string& meta) {
  if (meta.empty()) throw UsageError("--meta (the ingest sessions.csv) is required");
  auto in = open_in(meta);
  return pipeline::read_session_rows(in);
}

pipeline::StudyOptions study_options(const Options& o) {
  pipeline::StudyOptions s;
  s.regression.bootstrap.replicates = o.bootstrap;
  s.regression.bootstrap.seed = o.seed;
  s.regression.bootstrap.jobs = o.jobs;
  if (o.interactions == "force") s.force_interactions = true;
  else if (o.interactions == "none") s.test_interactions = false;
  else if (o.interactions != "test") throw UsageError("--interactions must be test, force or none");
  return s;
}

fs::path cmd_stats(const Options& o, const std::string& input, const fs::path& dir) {
  check_thresholds(o);
  const auto model = load_model(input);
  const auto rows = load_rows(o.meta);
  const auto study = pipeline::run_study(model, rows, study_options(o));
  write_json(dir / "stats.json", pipeline::to_json(study));
  std::vector<stats::RegressionFit> fits;
  for (const auto& d : study.dims) fits.push_back(d.fit);
  {
    auto out = open_out(dir / "coefficients.csv");
    stats::write_coefficients_csv(out, fits);
  }
  for (const auto& d : study.dims)
    for (const auto& w : d.fit.warnings) std::cerr << "warning: dim" << d.dim + 1 << ": " << w << '\n';
  std::cout << "fitted " << study.dims.size() << " models over " << study.factors.size() << " factors\n";
  return dir;
}

void write_network(const fs::path& dir, const std::string& stem, const ena::NetworkGraph& g,
                   const std::vector<double>& variance) {
  open_out(dir / (stem + ".svg")) << report::render_network_svg(g, variance);
  auto out = open_out(dir / (stem + ".csv"));
  ena::write_network_csv(out, g);
}

fs::path cmd_report(const Options& o, const std::string& input, const fs::path& dir) {
  const auto model = load_model(input);
  const auto rows = load_rows(o.meta);
  const auto joined = pipeline::join(model, rows);
  const auto& var = model.projection.variance_explained;

  {
    auto out = open_out(dir / "nodes.csv");
    csv::write_row(out, {"code", "dim1", "dim2"});
    for (std::size_t k = 0; k < model.codes.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      csv::write_row(out, {model.codes[k], csv::num(model.nodes.positions(kk, 0)),
                           csv::num(model.nodes.positions.cols() > 1 ? model.nodes.positions(kk, 1) : 0.0)});
    }
  }
  {
    auto out = open_out(dir / "scores.csv");
    ena::write_scores_csv(out, model);
  }
  std::vector<std::size_t> all(model.units.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  open_out(dir / "embedding.svg") << report::render_scatter_svg(model.projection.scores, {{"all units", all}}, var,
                                                                 "Embedding space");

  json figures = json::array();
  auto centroids = open_out(dir / "centroids.csv");
  csv::write_row(centroids, {"comparison", "group", "n", "dim1", "dim2"});
  for (const auto& f : pipeline::condition_factors()) {
    auto [level, reference] = pipeline::split(joined, f.name);
    if (level.empty() || reference.empty()) {
      std::cerr << "warning: " << f.name << " has a single level in this corpus; no comparison drawn\n";
      continue;
    }
    const auto a = ena::mean_network(model, level, f.name + ": " + f.level);
    const auto b = ena::mean_network(model, reference, f.name + ": " + f.reference);
    auto d = ena::diff_network(a, b);
    d.label = f.name + ": " + f.level + " minus " + f.reference;
    write_network(dir, f.name + "_" + f.level, a, var);
    write_network(dir, f.name + "_" + f.reference, b, var);
    write_network(dir, f.name + "_difference", d, var);
    open_out(dir / (f.name + "_scatter.svg"))
        << report::render_scatter_svg(model.projection.scores, {{f.level, level}, {f.reference, reference}}, var,
                                      f.name);
    for (const auto* g : {&a, &b}) {
      csv::write_row(centroids, {f.name, g == &a ? f.level : f.reference,
                                 std::to_string(g == &a ? level.size() : reference.size()), csv::num(g->centroid(0)),
                                 csv::num(g->centroid.size() > 1 ? g->centroid(1) : 0.0)});
    }
    figures.push_back({{"comparison", f.name},
                       {"level", f.level},
                       {"reference", f.reference},
                       {"n_level", level.size()},
                       {"n_reference", reference.size()},
                       {"files", {f.name + "_" + f.level + ".svg", f.name + "_" + f.reference + ".svg",
                                  f.name + "_difference.svg", f.name + "_scatter.svg"}}});
  }

  json results{{"variance_explained", var}, {"fit", model.nodes.fit}, {"units", model.units.size()}, {"figures", figures}};
  const fs::path stats_path = fs::path(input).parent_path() / "stats" / "stats.json";
  fs::path stats_file = o.input.size() > 1 ? fs::path(o.input[1]) : stats_path;
  if (fs::is_directory(stats_file)) stats_file /= "stats.json";
  if (fs::exists(stats_file)) {
    auto in = open_in(stats_file);
    results["stats"] = json::parse(in);
    const fs::path coef = stats_file.parent_path() / "coefficients.csv";
    if (fs::exists(coef)) fs::copy_file(coef, dir / "coefficients.csv", fs::copy_options::overwrite_existing);
  }
  write_json(dir / "results.json", results);
  std::cout << "wrote " << figures.size() << " comparisons to " << dir.string() << '\n';
  return dir;
}

void cmd_run(Options o) {
  const auto root = ensure_dir(o.out);
  cmd_ingest(o, ensure_dir((root / "ingest").string()));
  cmd_code(o, (root / "ingest").string(), ensure_dir((root / "code").string()));
  cmd_ena(o, (root / "code").string(), ensure_dir((root / "ena").string()));
  o.meta = (root / "ingest" / "sessions.csv").string();
  cmd_stats(o, (root / "ena").string(), ensure_dir((root / "stats").string()));
  o.input = {(root / "ena").string(), (root / "stats").string()};
  cmd_report(o, (root / "ena").string(), ensure_dir((root / "report").string()));
}

int fail(int code, const char* kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Co-writing trace analysis: ingest, code, network models, statistics, figures"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* c) { c->add_option("--out", o.out, "Output directory")->required(); };
  auto add_input = [&](CLI::App* c) { c->add_option("--input", o.input, "Input file(s) or directory")->required(); };
  auto add_jobs = [&](CLI::App* c) { c->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber); };
  auto add_coder = [&](CLI::App* c) {
    c->add_option("--provider", o.provider, "Similarity provider")->check(CLI::IsMember({"lexical", "remote"}));
    c->add_option("--endpoint", o.endpoint, "Embedding service URL (COWRITE_EMBED_ENDPOINT overrides)");
    c->add_option("--model", o.model, "Embedding model name sent to the service");
    c->add_flag("--fallback-lexical", o.fallback_lexical, "Score lexically when the service fails");
    c->add_option("--mod-threshold", o.mod_threshold, "Similarity below which a modification is high");
    c->add_option("--reflect-threshold", o.reflect_threshold, "Share of final length after which revisions reflect");
    c->add_flag("--ledgers", o.ledgers, "Write per-session sentence ledgers");
  };
  auto add_stats = [&](CLI::App* c) {
    c->add_option("--bootstrap", o.bootstrap, "Bootstrap replicates (>= 200)");
    c->add_option("--seed", o.seed, "Random seed");
    c->add_option("--interactions", o.interactions, "test | force | none");
  };

  auto* gen = app.add_subcommand("generate", "Write a synthetic corpus");
  add_common(gen);
  gen->add_option("--profiles", o.profiles, "Profile names or JSON paths")->delimiter(',');
  gen->add_option("--sessions", o.sessions, "Sessions per profile");
  gen->add_option("--sessions-per-author", o.sessions_per_author, "Sessions per synthetic author");
  gen->add_option("--seed", o.seed, "Random seed");
  gen->add_option("--length-mean", o.length_mean, "Override mean events per session");
  gen->add_option("--length-spread", o.length_spread, "Override spread of events per session");
  gen->add_flag("--vary-conditions", o.vary_conditions, "Cycle prompt kind and temperature across sessions");
  gen->add_flag("--no-truth", o.no_truth, "Skip ground-truth files");

  auto* ingest = app.add_subcommand("ingest", "Parse, validate and exclude sessions");
  add_common(ingest);
  add_input(ingest);
  ingest->add_option("--meta", o.meta, "Metadata CSV")->required();
  ingest->add_option("--pin-ownership-median", o.pin_median, "Fixed ownership split point in percent");
  ingest->add_option("--max-malformed", o.max_malformed, "Tolerated share of malformed lines per session");

  auto* code = app.add_subcommand("code", "Assign behaviour codes to every event");
  add_common(code);
  add_input(code);
  add_coder(code);
  add_jobs(code);

  auto* enac = app.add_subcommand("ena", "Accumulate networks and project them");
  add_common(enac);
  add_input(enac);
  enac->add_option("--dims", o.dims, "Retained dimensions");
  add_jobs(enac);

  auto* st = app.add_subcommand("stats", "ICC and mixed-effects regressions on the scores");
  add_common(st);
  add_input(st);
  st->add_option("--meta", o.meta, "sessions.csv written by ingest")->required();
  add_stats(st);
  add_jobs(st);

  auto* rep = app.add_subcommand("report", "Render figures and the results bundle");
  add_common(rep);
  rep->add_option("--input", o.input, "ENA output directory, then optionally the stats directory")->required();
  rep->add_option("--meta", o.meta, "sessions.csv written by ingest")->required();

  auto* run = app.add_subcommand("run", "Run every stage into subdirectories of --out");
  add_common(run);
  add_input(run);
  run->add_option("--meta", o.meta, "Metadata CSV")->required();
  run->add_option("--pin-ownership-median", o.pin_median, "Fixed ownership split point in percent");
  run->add_option("--dims", o.dims, "Retained dimensions");
  add_coder(run);
  add_stats(run);
  add_jobs(run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, "usage", e.what());
  }

  try {
    if (gen->parsed()) cmd_generate(o);
    else if (ingest->parsed()) cmd_ingest(o, ensure_dir(o.out));
    else if (code->parsed()) cmd_code(o, o.input.front(), ensure_dir(o.out));
    else if (enac->parsed()) cmd_ena(o, o.input.front(), ensure_dir(o.out));
    else if (st->parsed()) cmd_stats(o, o.input.front(), ensure_dir(o.out));
    else if (rep->parsed()) cmd_report(o, o.input.front(), ensure_dir(o.out));
    else if (run->parsed()) cmd_run(o);
  } catch (const UsageError& e) {
    return fail(2, "usage", e.what());
  } catch (const DataError& e) {
    return fail(3, "data", e.what());
  } catch (const ProviderError& e) {
    return fail(3, "provider", e.what());
  } catch (const NumericalError& e) {
    return fail(4, "numerical", e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(3, "data", e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(3, "data", e.what());
  }
  return 0;
}
