#pragma once

// Synthetic co-writing sessions with known codes.
//
// A session starts from a two-sentence prompt and applies randomly drawn
// actions until it reaches a sampled event count:
//   compose      type a new sentence at the end, one character per event
//   seek         request suggestions, look at them, let them close
//   accept       request suggestions and insert one sentence at the end
//   dismiss      request suggestions and close them
//   hover        request suggestions, hover over some, close them
//   revise_own   edit words of a user sentence, then return to the end
//   revise_sugg  the same for a suggestion sentence
//   relocate     cut a sentence and paste it in front of another one
// Sentences come from a small subject-verb-object grammar. The intended code
// of every event is recorded as the actions are emitted, without replaying or
// segmenting the produced trace.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cowrite/coder.hpp"
#include "cowrite/error.hpp"
#include "cowrite/trace.hpp"
#include "cowrite/unicode.hpp"

namespace cowrite::synth {

enum class Action { Compose, Seek, Accept, Dismiss, Hover, ReviseOwn, ReviseSugg, Relocate };

inline constexpr std::array<std::string_view, 8> kActionNames{"compose",    "seek",        "accept",  "dismiss",
                                                              "hover",      "revise_own",  "revise_sugg", "relocate"};

struct BehaviorProfile {
  std::string name;
  std::array<double, 8> actions{};  // indexed by Action
  double modification_depth = 0.5;  // probability that a revision is a high modification
  double length_mean = 1862.0;      // events per session
  double length_spread = 200.0;
  double temperature = 0.75;
  PromptKind prompt_kind = PromptKind::Creative;
  std::uint64_t vocabulary_seed = 1;

  double probability(Action a) const { return actions[static_cast<std::size_t>(a)]; }
};

inline void validate(const BehaviorProfile& p) {
  double sum = 0.0;
  for (double v : p.actions) {
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError("profile " + p.name + ": action probabilities must lie in [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw UsageError("profile " + p.name + ": action probabilities must sum to 1");
  if (!(p.modification_depth >= 0.0 && p.modification_depth <= 1.0))
    throw UsageError("profile " + p.name + ": modification_depth must lie in [0,1]");
  if (!(p.length_mean > 0.0) || p.length_spread < 0.0) throw UsageError("profile " + p.name + ": bad length");
}

inline BehaviorProfile profile_from_json(const nlohmann::json& j) {
  BehaviorProfile p;
  try {
    p.name = j.at("name").get<std::string>();
    const auto& a = j.at("actions");
    for (std::size_t i = 0; i < kActionNames.size(); ++i) p.actions[i] = a.value(std::string(kActionNames[i]), 0.0);
    for (const auto& [k, _] : a.items())
      if (std::find(kActionNames.begin(), kActionNames.end(), k) == kActionNames.end())
        throw UsageError("profile " + p.name + ": unknown action '" + k + "'");
    p.modification_depth = j.at("modification_depth").get<double>();
    if (j.contains("length")) {
      p.length_mean = j.at("length").value("mean", p.length_mean);
      p.length_spread = j.at("length").value("spread", p.length_spread);
    }
    p.temperature = j.value("temperature", p.temperature);
    if (j.contains("prompt_kind")) p.prompt_kind = prompt_kind_from(j.at("prompt_kind").get<std::string>());
    p.vocabulary_seed = j.value("vocabulary_seed", p.vocabulary_seed);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("profile: ") + e.what());
  }
  validate(p);
  return p;
}

inline nlohmann::json to_json(const BehaviorProfile& p) {
  nlohmann::json actions;
  for (std::size_t i = 0; i < kActionNames.size(); ++i) actions[std::string(kActionNames[i])] = p.actions[i];
  return {{"name", p.name},
          {"actions", actions},
          {"modification_depth", p.modification_depth},
          {"length", {{"mean", p.length_mean}, {"spread", p.length_spread}}},
          {"temperature", p.temperature},
          {"prompt_kind", std::string(to_string(p.prompt_kind))},
          {"vocabulary_seed", p.vocabulary_seed}};
}

inline BehaviorProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open profile " + path);
  try {
    return profile_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("profile " + path + ": " + e.what());
  }
}

/// Profiles shipped under the data directory.
inline BehaviorProfile bundled_profile(const std::string& name) {
  return load_profile(std::string(COWRITE_DATA_DIR) + "/profiles/" + name + ".json");
}

// ---------------------------------------------------------------------------
// Grammar

namespace detail {

// Slot categories: D sentence-initial determiner, d determiner, A adjective,
// N noun, V past-tense verb, P preposition, C conjunction, R adverb.
inline const std::vector<std::string>& words(char cat) {
  static const std::vector<std::string> D{"The", "A", "One", "Every", "That", "This"};
  static const std::vector<std::string> d{"the", "a", "one", "every", "that", "this"};
  static const std::vector<std::string> A{"old",     "young",   "quiet",   "bright",  "dark",   "small",  "large",
                                          "gentle",  "brave",   "tired",   "happy",   "silent", "golden", "distant",
                                          "ancient", "careful", "clever",  "curious", "eager",  "honest"};
  static const std::vector<std::string> N{"farmer",   "lantern", "river",  "village", "teacher", "garden", "window",
                                          "mountain", "letter",  "stranger", "forest", "doctor", "market", "bridge",
                                          "castle",   "soldier", "painter", "island", "kitchen", "engine"};
  static const std::vector<std::string> V{"carried", "found",   "watched",    "opened",   "followed",
                                          "painted", "visited", "noticed",    "remembered", "crossed",
                                          "answered", "protected", "borrowed", "repaired", "described"};
  static const std::vector<std::string> P{"near", "beside", "behind", "under", "above", "across", "beyond", "toward"};
  static const std::vector<std::string> C{"while", "because", "before", "after"};
  static const std::vector<std::string> R{"slowly", "quietly", "carefully", "quickly", "suddenly", "gladly", "softly", "eagerly"};
  switch (cat) {
    case 'D': return D;
    case 'd': return d;
    case 'A': return A;
    case 'N': return N;
    case 'V': return V;
    case 'P': return P;
    case 'C': return C;
    default: return R;
  }
}

inline const std::vector<std::string>& templates() {
  static const std::vector<std::string> t{"DANVdANPdANCdNVR", "DANVdNPdANR", "DNVdANCdANVdN", "DANVdANPdNR"};
  return t;
}

}  // namespace detail

/// Word lists narrowed by a profile's vocabulary seed.
class Vocabulary {
public:
  explicit Vocabulary(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (char c : std::string("DdANVPCR")) {
      auto w = detail::words(c);
      if (w.size() > 6) {
        std::shuffle(w.begin(), w.end(), rng);
        w.resize((w.size() * 3 + 3) / 4);
        std::sort(w.begin(), w.end());
      }
      lists_[c] = std::move(w);
    }
  }

  const std::vector<std::string>& operator[](char c) const { return lists_.at(c); }

private:
  std::map<char, std::vector<std::string>> lists_;
};

struct GrammarSentence {
  std::string pattern;
  std::vector<std::string> words;

  std::string text() const {
    std::string s;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) s += ' ';
      s += words[i];
    }
    return s + ".";
  }
};

// ---------------------------------------------------------------------------
// Ground truth

struct SentenceFate {
  std::string initial;
  std::string final_text;
  Owner owner = Owner::Prompt;
  bool revised = false;
  bool relocated = false;
  std::optional<bool> high_modification;  // set for revised sentences
};

struct GroundTruth {
  std::vector<CodeVector> codes;  // per event
  std::string final_text;
  std::vector<SentenceFate> sentences;  // in final document order
  std::vector<Action> actions;
};

struct GeneratedSession {
  SessionTrace trace;
  GroundTruth truth;
};

namespace detail {

class SessionBuilder {
public:
  SessionBuilder(const BehaviorProfile& profile, std::uint64_t seed)
      : profile_(profile), vocab_(profile.vocabulary_seed), rng_(seed) {}

  GeneratedSession run(const SessionMeta& base_meta) {
    std::normal_distribution<double> len(profile_.length_mean, profile_.length_spread);
    const auto target = static_cast<std::size_t>(std::max(20.0, std::round(len(rng_))));

    for (int i = 0; i < 2; ++i) add_sentence(fresh_sentence(), Owner::Prompt);
    prompt_ = document();
    owners_.assign(prompt_.size(), Owner::Prompt);
    text_ = prompt_;

    std::discrete_distribution<int> pick(profile_.actions.begin(), profile_.actions.end());
    while (events_.size() < target) {
      auto a = static_cast<Action>(pick(rng_));
      a = perform(a);
      actions_.push_back(a);
    }
    return finish(base_meta);
  }

private:
  struct Sent {
    GrammarSentence g;
    Owner owner;
    std::string initial;
    bool revised = false;
    bool relocated = false;
    std::optional<bool> high;
  };

  // -- text bookkeeping ------------------------------------------------------

  std::u32string document() const {
    std::u32string s;
    for (std::size_t k = 0; k < order_.size(); ++k) {
      if (k) s += U' ';
      s += utf8_decode(sents_[order_[k]].g.text());
    }
    return s;
  }

  std::size_t start_of(std::size_t rank) const {
    std::size_t p = 0;
    for (std::size_t k = 0; k < rank; ++k) p += utf8_decode(sents_[order_[k]].g.text()).size() + 1;
    return p;
  }

  std::size_t rank_of(std::size_t id) const {
    return static_cast<std::size_t>(std::find(order_.begin(), order_.end(), id) - order_.begin());
  }

  GrammarSentence fresh_sentence() {
    for (;;) {
      const auto& pats = detail::templates();
      GrammarSentence g;
      g.pattern = pats[std::uniform_int_distribution<std::size_t>(0, pats.size() - 1)(rng_)];
      for (char c : g.pattern) g.words.push_back(draw(c));
      const auto t = g.text();
      if (used_.insert(t).second) return g;
    }
  }

  std::string draw(char cat) {
    const auto& w = vocab_[cat];
    return w[std::uniform_int_distribution<std::size_t>(0, w.size() - 1)(rng_)];
  }

  std::string draw_other(char cat, const std::string& not_this) {
    for (;;) {
      auto w = draw(cat);
      if (w != not_this) return w;
    }
  }

  std::size_t add_sentence(GrammarSentence g, Owner owner) {
    Sent s{std::move(g), owner, "", false, false, std::nullopt};
    s.initial = s.g.text();
    sents_.push_back(std::move(s));
    order_.push_back(sents_.size() - 1);
    return sents_.size() - 1;
  }

  // -- event emission --------------------------------------------------------

  CanonicalEvent& emit(EventName name, EventSource source, CodeVector codes) {
    ts_ += std::uniform_int_distribution<std::int64_t>(40, 400)(rng_);
    CanonicalEvent e;
    e.name = name;
    e.raw_name = std::string(to_string(name));
    e.source = source;
    e.timestamp = ts_;
    events_.push_back(std::move(e));
    codes_.push_back(codes);
    revision_.push_back(false);
    return events_.back();
  }

  void insert(std::size_t p, const std::u32string& s, EventSource source, CodeVector codes) {
    auto& e = emit(EventName::TextInsert, source, codes);
    e.offset = p;
    e.text = s;
    text_.insert(p, s);
    owners_.insert(owners_.begin() + static_cast<std::ptrdiff_t>(p), s.size(), owner_of(source));
    longest_.push_back(text_.size());
  }

  void erase(std::size_t p, std::size_t n, CodeVector codes) {
    auto& e = emit(EventName::TextDelete, EventSource::User, codes);
    e.offset = p;
    e.text = text_.substr(p, n);
    text_.erase(p, n);
    owners_.erase(owners_.begin() + static_cast<std::ptrdiff_t>(p), owners_.begin() + static_cast<std::ptrdiff_t>(p + n));
    longest_.push_back(text_.size());
  }

  void cursor(EventName name, std::size_t a, std::size_t b, CodeVector codes) {
    auto& e = emit(name, EventSource::User, codes);
    e.cursor_range = CursorRange{a, b};
    longest_.push_back(text_.size());
  }

  void suggestion(EventName name, EventSource source, CodeVector codes, const std::vector<std::string>& options) {
    auto& e = emit(name, source, codes);
    e.suggestions = options;
    longest_.push_back(text_.size());
  }

  std::vector<std::string> suggestion_list(const std::string& chosen) {
    std::vector<std::string> out{" " + chosen};
    while (out.size() < 5) {
      GrammarSentence g;
      g.pattern = detail::templates()[0];
      for (char c : g.pattern) g.words.push_back(draw(c));
      out.push_back(" " + g.text());
    }
    std::shuffle(out.begin(), out.end(), rng_);
    return out;
  }

  void open_suggestions(const std::vector<std::string>& options) {
    suggestion(EventName::SuggestionGet, EventSource::User, {Code::SEEK_SUGG}, {});
    suggestion(EventName::SuggestionOpen, EventSource::Api, {}, options);
  }

  // -- actions ---------------------------------------------------------------

  Action perform(Action a) {
    switch (a) {
      case Action::Compose: compose(); return a;
      case Action::Seek: {
        GrammarSentence g = fresh_sentence();
        used_.erase(g.text());
        open_suggestions(suggestion_list(g.text()));
        suggestion(EventName::SuggestionClose, EventSource::Api, {}, {});
        return a;
      }
      case Action::Accept: accept(); return a;
      case Action::Dismiss: {
        GrammarSentence g = fresh_sentence();
        used_.erase(g.text());
        open_suggestions(suggestion_list(g.text()));
        suggestion(EventName::SuggestionClose, EventSource::User, {Code::DISMISS_SUGG}, {});
        return a;
      }
      case Action::Hover: {
        GrammarSentence g = fresh_sentence();
        used_.erase(g.text());
        const auto opts = suggestion_list(g.text());
        open_suggestions(opts);
        const int k = std::uniform_int_distribution<int>(1, 3)(rng_);
        for (int i = 0; i < k; ++i) suggestion(EventName::SuggestionHover, EventSource::User, {Code::HOVER_SUGG}, opts);
        suggestion(EventName::SuggestionClose, EventSource::User, {Code::DISMISS_SUGG}, {});
        return a;
      }
      case Action::ReviseOwn:
        if (revise(Owner::User)) return a;
        compose();
        return Action::Compose;
      case Action::ReviseSugg:
        if (revise(Owner::Api)) return a;
        compose();
        return Action::Compose;
      case Action::Relocate:
        if (relocate()) return a;
        compose();
        return Action::Compose;
    }
    return a;
  }

  void compose() {
    auto g = fresh_sentence();
    const auto s = U" " + utf8_decode(g.text());
    for (char32_t c : s) insert(text_.size(), std::u32string(1, c), EventSource::User, {Code::COMPOSE});
    add_sentence(std::move(g), Owner::User);
  }

  void accept() {
    auto g = fresh_sentence();
    open_suggestions(suggestion_list(g.text()));
    suggestion(EventName::SuggestionSelect, EventSource::User, {Code::ACCEPT_SUGG}, {});
    insert(text_.size(), U" " + utf8_decode(g.text()), EventSource::Api, {Code::COMPOSE});
    suggestion(EventName::SuggestionClose, EventSource::Api, {}, {});
    add_sentence(std::move(g), Owner::Api);
  }

  /// Character offset of word `i` within a sentence.
  static std::size_t word_offset(const GrammarSentence& g, std::size_t i) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < i; ++k) off += utf8_decode(g.words[k]).size() + 1;
    return off;
  }

  bool revise(Owner owner) {
    std::vector<std::size_t> candidates;
    for (std::size_t k = 0; k < order_.size(); ++k) {
      const auto& s = sents_[order_[k]];
      if (s.owner == owner && !s.revised && s.g.words.size() >= 10) candidates.push_back(order_[k]);
    }
    if (candidates.empty()) return false;
    const auto id = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng_)];
    auto& s = sents_[id];
    const bool high = std::bernoulli_distribution(profile_.modification_depth)(rng_);
    const std::size_t n = s.g.words.size();

    std::vector<std::size_t> positions;
    if (high) {
      std::vector<std::size_t> all(n);
      for (std::size_t i = 0; i < n; ++i) all[i] = i;
      std::shuffle(all.begin(), all.end(), rng_);
      const auto count = static_cast<std::size_t>(std::ceil(0.6 * static_cast<double>(n))) +
                         std::uniform_int_distribution<std::size_t>(0, n / 5)(rng_);
      positions.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(std::min(count, n)));
      std::sort(positions.begin(), positions.end());
    } else {
      positions.push_back(std::uniform_int_distribution<std::size_t>(1, n - 1)(rng_));
    }

    const Code revise_code = owner == Owner::User ? Code::REVISE_USER : Code::REVISE_SUGG;
    const std::size_t start = start_of(rank_of(id));
    const std::size_t first = start + word_offset(s.g, positions.front());
    cursor(EventName::CursorBackward, first, first, {Code::CURSOR_BWD});
    for (std::size_t k = 0; k < positions.size(); ++k) {
      const std::size_t i = positions[k];
      const auto old_word = utf8_decode(s.g.words[i]);
      s.g.words[i] = draw_other(s.g.pattern[i], s.g.words[i]);
      const auto new_word = utf8_decode(s.g.words[i]);
      const std::size_t w = start + word_offset(s.g, i);
      if (i == 0) {
        erase(w, old_word.size() + 1, {revise_code});
        revision_.back() = true;
        insert(w, new_word + U" ", EventSource::User, {revise_code});
      } else {
        erase(w - 1, old_word.size() + 1, {revise_code});
        revision_.back() = true;
        insert(w - 1, U" " + new_word, EventSource::User, {revise_code});
      }
      revision_.back() = true;
    }
    used_.insert(s.g.text());
    codes_.back().set(high ? Code::HIGH_MOD : Code::LOW_MOD);
    s.revised = true;
    s.high = high;
    cursor(EventName::CursorForward, text_.size(), text_.size(), {Code::CURSOR_FWD});
    return true;
  }

  bool relocate() {
    if (order_.size() < 3) return false;
    std::vector<std::size_t> movable;
    for (std::size_t k = 0; k + 1 < order_.size(); ++k)
      if (sents_[order_[k]].owner != Owner::Prompt) movable.push_back(k);
    if (movable.empty()) return false;
    const auto from = movable[std::uniform_int_distribution<std::size_t>(0, movable.size() - 1)(rng_)];
    std::vector<std::size_t> targets;
    for (std::size_t k = 0; k < order_.size(); ++k)
      if (k != from && k != from + 1) targets.push_back(k);
    if (targets.empty()) return false;
    const auto to = targets[std::uniform_int_distribution<std::size_t>(0, targets.size() - 1)(rng_)];

    const auto id = order_[from];
    auto& s = sents_[id];
    const Code revise_code = s.owner == Owner::User ? Code::REVISE_USER : Code::REVISE_SUGG;
    const auto piece = utf8_decode(s.g.text()) + U" ";
    const std::size_t a = start_of(from);
    cursor(EventName::CursorSelect, a, a + piece.size() - 1, {Code::CURSOR_SELECT});
    erase(a, piece.size(), {revise_code});
    revision_.back() = true;
    order_.erase(order_.begin() + static_cast<std::ptrdiff_t>(from));
    const std::size_t dest_rank = to > from ? to - 1 : to;
    const std::size_t b = start_of(dest_rank);
    insert(b, piece, EventSource::User, {revise_code, Code::RELOCATE});
    revision_.back() = true;
    order_.insert(order_.begin() + static_cast<std::ptrdiff_t>(dest_rank), id);
    s.relocated = true;
    cursor(EventName::CursorForward, text_.size(), text_.size(), {Code::CURSOR_FWD});
    return true;
  }

  // -- finishing -------------------------------------------------------------

  GeneratedSession finish(const SessionMeta& base_meta) {
    if (text_ != document()) throw std::logic_error("generator text diverged from its sentence list");
    GeneratedSession out;
    out.trace.meta = base_meta;
    out.trace.meta.prompt_kind = profile_.prompt_kind;
    out.trace.meta.temperature = profile_.temperature;
    out.trace.prompt_text = prompt_;
    out.trace.final_text = text_;
    out.trace.final_text_logged = true;
    out.trace.events = std::move(events_);

    // REFLECT: revisions once the longest document so far reached 90% of the final length.
    const double bar = 0.9 * static_cast<double>(text_.size());
    std::size_t longest = prompt_.size();
    for (std::size_t i = 0; i < codes_.size(); ++i) {
      if (revision_[i] && static_cast<double>(longest) >= bar) codes_[i].set(Code::REFLECT);
      longest = std::max(longest, longest_[i]);
    }

    std::size_t user = 0, api = 0;
    for (std::size_t i = 0; i < text_.size(); ++i) {
      if (is_space(text_[i])) continue;
      if (owners_[i] == Owner::User) ++user;
      if (owners_[i] == Owner::Api) ++api;
    }
    out.trace.meta.ownership_pct = user + api == 0 ? 0.0 : 100.0 * static_cast<double>(user) / static_cast<double>(user + api);

    out.truth.codes = std::move(codes_);
    out.truth.final_text = utf8_encode(text_);
    out.truth.actions = std::move(actions_);
    for (auto id : order_) {
      const auto& s = sents_[id];
      out.truth.sentences.push_back({s.initial, s.g.text(), s.owner, s.revised, s.relocated, s.high});
    }
    return out;
  }

  const BehaviorProfile& profile_;
  Vocabulary vocab_;
  std::mt19937_64 rng_;
  std::int64_t ts_ = 0;
  std::vector<Sent> sents_;
  std::vector<std::size_t> order_;
  std::set<std::string> used_;
  std::u32string prompt_;
  std::u32string text_;
  std::vector<Owner> owners_;
  std::vector<CanonicalEvent> events_;
  std::vector<CodeVector> codes_;
  std::vector<bool> revision_;
  std::vector<std::size_t> longest_;  // document length after each event
  std::vector<Action> actions_;
};

}  // namespace detail

/// Deterministic per (profile, seed).
inline GeneratedSession generate_session(const BehaviorProfile& profile, std::uint64_t seed, SessionMeta meta = {}) {
  validate(profile);
  if (meta.session_id.empty()) meta.session_id = profile.name + "-" + std::to_string(seed);
  if (meta.author_id.empty()) meta.author_id = profile.name + "-author";
  if (meta.prompt_id.empty()) meta.prompt_id = std::string(to_string(profile.prompt_kind)) + "-1";
  return detail::SessionBuilder(profile, seed).run(meta);
}

struct CorpusOptions {
  std::size_t sessions_per_profile = 30;
  std::size_t sessions_per_author = 3;
  std::uint64_t seed = 1;
  std::optional<double> length_mean;  // overrides every profile's mean when set
  std::optional<double> length_spread;
  bool vary_conditions = false;  // cycle prompt kind and temperature across sessions
};

struct Corpus {
  std::vector<GeneratedSession> sessions;
  std::vector<std::string> profile_of;  // per session
};

/// Sessions are numbered per profile; consecutive runs of
/// `sessions_per_author` sessions share an author.
inline Corpus generate_corpus(const std::vector<BehaviorProfile>& profiles, const CorpusOptions& options = {}) {
  if (profiles.empty()) throw UsageError("corpus needs at least one profile");
  if (options.sessions_per_author == 0) throw UsageError("sessions_per_author must be positive");
  Corpus c;
  for (std::size_t pi = 0; pi < profiles.size(); ++pi) {
    auto profile = profiles[pi];
    if (options.length_mean) profile.length_mean = *options.length_mean;
    if (options.length_spread) profile.length_spread = *options.length_spread;
    for (std::size_t s = 0; s < options.sessions_per_profile; ++s) {
      if (options.vary_conditions) {
        profile.prompt_kind = s % 2 ? PromptKind::Argumentative : PromptKind::Creative;
        const auto [lo, hi] = conformant_temperatures(profile.prompt_kind);
        profile.temperature = (s / 2) % 2 ? hi : lo;
      }
      SessionMeta meta;
      char buf[64];
      std::snprintf(buf, sizeof buf, "g%zu-s%03zu", pi, s);
      meta.session_id = profile.name + "-" + buf;
      std::snprintf(buf, sizeof buf, "g%zu-a%03zu", pi, s / options.sessions_per_author);
      meta.author_id = profile.name + "-" + buf;
      meta.prompt_id = std::string(to_string(profile.prompt_kind)) + "-" + std::to_string(s % 5);
      const std::uint64_t seed = options.seed * 1000003ULL + pi * 10007ULL + s;
      c.sessions.push_back(generate_session(profile, seed, meta));
      c.profile_of.push_back(profile.name);
    }
  }
  return c;
}

inline nlohmann::json truth_json(const GroundTruth& t) {
  nlohmann::json codes = nlohmann::json::array();
  for (const auto& c : t.codes) codes.push_back(c.to_string());
  nlohmann::json sentences = nlohmann::json::array();
  for (const auto& s : t.sentences) {
    nlohmann::json j{{"initial", s.initial},
                     {"final", s.final_text},
                     {"owner", std::string(to_string(s.owner))},
                     {"revised", s.revised},
                     {"relocated", s.relocated}};
    if (s.high_modification) j["high_modification"] = *s.high_modification;
    sentences.push_back(std::move(j));
  }
  return {{"codes", codes}, {"final_text", t.final_text}, {"sentences", sentences}};
}

/// Writes <dir>/<session_id>.jsonl per session, <dir>/metadata.csv and, when
/// `with_truth`, <dir>/truth/<session_id>.json.
inline void write_corpus(const Corpus& c, const std::filesystem::path& dir, bool with_truth = true) {
  std::filesystem::create_directories(dir);
  std::vector<SessionMeta> meta;
  for (const auto& s : c.sessions) {
    std::ofstream out(dir / (s.trace.meta.session_id + ".jsonl"));
    if (!out) throw DataError("cannot write " + (dir / (s.trace.meta.session_id + ".jsonl")).string());
    write_trace(out, s.trace);
    meta.push_back(s.trace.meta);
    if (with_truth) {
      std::filesystem::create_directories(dir / "truth");
      std::ofstream t(dir / "truth" / (s.trace.meta.session_id + ".json"));
      t << truth_json(s.truth).dump(1) << '\n';
    }
  }
  std::ofstream m(dir / "metadata.csv");
  if (!m) throw DataError("cannot write " + (dir / "metadata.csv").string());
  write_metadata(m, meta);
}

}  // namespace cowrite::synth
