#pragma once

// Sentence-pair similarity behind one provider interface.
//
// The lexical provider scores TF-IDF cosine over a fixed corpus:
//   tokens  = whitespace split after lowercasing and stripping punctuation
//   tf      = raw count
//   idf(t)  = ln((1 + N) / (1 + df(t))) + 1
// Empty-vs-empty token lists score 1.0, empty-vs-nonempty score 0.0.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "cowrite/error.hpp"
#include "cowrite/unicode.hpp"

namespace cowrite {

enum class ProviderKind { LexicalTfidf, RemoteEmbedding };

inline constexpr std::string_view to_string(ProviderKind k) {
  return k == ProviderKind::LexicalTfidf ? "lexical-tfidf" : "remote-embedding";
}

struct SimilarityScore {
  double value = 0.0;
  ProviderKind provider = ProviderKind::LexicalTfidf;
  bool cached = false;
  bool fallback = false;  // remote failed and the lexical provider answered
};

class SimilarityProvider {
public:
  virtual ~SimilarityProvider() = default;
  virtual ProviderKind kind() const = 0;
  virtual SimilarityScore score(std::string_view a, std::string_view b) = 0;
};

inline constexpr double kDefaultModificationThreshold = 0.8;

/// True when `after` departs enough from `before` to count as a high
/// modification. A score exactly at the threshold is a low modification.
inline bool is_high_modification(std::string_view before, std::string_view after, SimilarityProvider& provider,
                                 double threshold = kDefaultModificationThreshold) {
  return provider.score(before, after).value < threshold;
}

// ---------------------------------------------------------------------------
// Lexical TF-IDF

inline bool is_punctuation(char32_t c) {
  if (c < 0x80) return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
                       (c >= 0x7B && c <= 0x7E);
  return (c >= 0x2010 && c <= 0x2027) || c == 0x00AB || c == 0x00BB || c == 0x00BF || c == 0x00A1 ||
         (c >= 0x3001 && c <= 0x3003);
}

inline std::vector<std::u32string> tokenize(std::u32string_view text) {
  std::vector<std::u32string> out;
  std::u32string cur;
  for (char32_t c : text) {
    if (is_space(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    if (is_punctuation(c)) continue;
    if (c >= U'A' && c <= U'Z') c = c - U'A' + U'a';
    cur.push_back(c);
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::vector<std::u32string> tokenize(std::string_view utf8) { return tokenize(utf8_decode(utf8)); }

/// IDF table over a fixed corpus; immutable after construction and therefore
/// safe to share between threads.
class TfIdfModel {
public:
  using Vector = std::map<std::u32string, double>;

  TfIdfModel() = default;

  template <typename Range>
  explicit TfIdfModel(const Range& corpus) {
    for (const auto& doc : corpus) add_document(doc);
  }

  std::size_t corpus_size() const { return n_docs_; }

  double idf(const std::u32string& term) const {
    auto it = df_.find(term);
    const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + df)) + 1.0;
  }

  Vector vectorize(std::u32string_view text) const {
    Vector v;
    for (auto& t : tokenize(text)) v[t] += 1.0;
    for (auto& [term, w] : v) w *= idf(term);
    return v;
  }

  double cosine(std::u32string_view a, std::u32string_view b) const {
    auto ta = tokenize(a);
    auto tb = tokenize(b);
    if (ta.empty() && tb.empty()) return 1.0;
    if (ta.empty() || tb.empty()) return 0.0;
    std::sort(ta.begin(), ta.end());
    std::sort(tb.begin(), tb.end());
    if (ta == tb) return 1.0;
    const auto va = vectorize(a);
    const auto vb = vectorize(b);
    // Iterate the sorted intersection so score(a,b) and score(b,a) sum in the same order.
    double dot = 0.0;
    auto ia = va.begin();
    auto ib = vb.begin();
    while (ia != va.end() && ib != vb.end()) {
      if (ia->first < ib->first) ++ia;
      else if (ib->first < ia->first) ++ib;
      else {
        dot += ia->second * ib->second;
        ++ia;
        ++ib;
      }
    }
    const double na = norm(va);
    const double nb = norm(vb);
    return std::clamp(dot / (na * nb), 0.0, 1.0);
  }

  double cosine(std::string_view a, std::string_view b) const { return cosine(utf8_decode(a), utf8_decode(b)); }

private:
  template <typename Doc>
  void add_document(const Doc& doc) {
    std::vector<std::u32string> terms;
    if constexpr (std::is_convertible_v<const Doc&, std::u32string_view>) terms = tokenize(std::u32string_view(doc));
    else terms = tokenize(std::string_view(doc));
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    for (auto& t : terms) ++df_[t];
    ++n_docs_;
  }

  static double norm(const Vector& v) {
    double s = 0.0;
    for (const auto& [_, w] : v) s += w * w;
    return std::sqrt(s);
  }

  std::unordered_map<std::u32string, std::size_t> df_;
  std::size_t n_docs_ = 0;
};

/// TF-IDF cosine of `a` and `b` with IDF taken from `corpus`.
inline SimilarityScore lexical_cosine(std::string_view a, std::string_view b, const std::vector<std::string>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("lexical_cosine: corpus must be non-empty");
  return {TfIdfModel(corpus).cosine(a, b), ProviderKind::LexicalTfidf, false, false};
}

class LexicalProvider final : public SimilarityProvider {
public:
  explicit LexicalProvider(TfIdfModel model) : model_(std::move(model)) {}

  template <typename Range>
  static LexicalProvider from_corpus(const Range& corpus) {
    return LexicalProvider(TfIdfModel(corpus));
  }

  ProviderKind kind() const override { return ProviderKind::LexicalTfidf; }
  SimilarityScore score(std::string_view a, std::string_view b) override {
    return {model_.cosine(a, b), ProviderKind::LexicalTfidf, false, false};
  }
  const TfIdfModel& model() const { return model_; }

private:
  TfIdfModel model_;
};

}  // namespace cowrite
