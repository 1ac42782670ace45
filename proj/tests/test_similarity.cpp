#include <atomic>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cowrite/similarity.hpp"
#include "cowrite/similarity_remote.hpp"

using namespace cowrite;
using nlohmann::json;

namespace {

const std::vector<std::string> kCorpus{
    "The cat sat on the mat.",       "A dog slept by the door.",     "The cat chased a small bird.",
    "Rain fell over the quiet town.", "She wrote a letter home.",     "The dog and the cat slept.",
    "Birds sang at dawn.",            "The town was quiet at night.", "He sat by the window.",
    "A letter arrived at dawn."};

// Independent TF-IDF: lowercase ASCII, strip punctuation, whitespace split,
// smoothed idf ln((1+N)/(1+df)) + 1, raw term counts.
double oracle_cosine(const std::string& a, const std::string& b, const std::vector<std::string>& corpus) {
  auto toks = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else if (!std::ispunct(static_cast<unsigned char>(c))) {
        cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  };
  std::map<std::string, double> df;
  for (const auto& d : corpus) {
    auto t = toks(d);
    std::set<std::string> u(t.begin(), t.end());
    for (const auto& w : u) df[w] += 1;
  }
  const double n = static_cast<double>(corpus.size());
  auto vec = [&](const std::string& s) {
    std::map<std::string, double> v;
    for (const auto& w : toks(s)) v[w] += 1;
    for (auto& [w, x] : v) x *= std::log((1 + n) / (1 + df[w])) + 1;
    return v;
  };
  auto va = vec(a), vb = vec(b);
  double dot = 0, na = 0, nb = 0;
  for (auto& [w, x] : va) {
    na += x * x;
    if (vb.count(w)) dot += x * vb[w];
  }
  for (auto& [w, x] : vb) nb += x * x;
  return dot / std::sqrt(na * nb);
}

}  // namespace

TEST(Lexical, SelfSimilarityIsOne) { EXPECT_DOUBLE_EQ(lexical_cosine("the cat sat", "the cat sat", kCorpus).value, 1.0); }

TEST(Lexical, DisjointTokensScoreZero) { EXPECT_DOUBLE_EQ(lexical_cosine("cat mat", "dog door", kCorpus).value, 0.0); }

TEST(Lexical, EmptyConventions) {
  EXPECT_DOUBLE_EQ(lexical_cosine("", "", kCorpus).value, 1.0);
  EXPECT_DOUBLE_EQ(lexical_cosine("", "cat", kCorpus).value, 0.0);
  EXPECT_DOUBLE_EQ(lexical_cosine("...", "cat", kCorpus).value, 0.0);
}

TEST(Lexical, MatchesHandRolledOracle) {
  const auto got = lexical_cosine("the cat sat", "the cat slept", kCorpus).value;
  EXPECT_NEAR(got, oracle_cosine("the cat sat", "the cat slept", kCorpus), 1e-9);
  EXPECT_NEAR(got, 0.5224971095268308, 1e-9);  // frozen from an independent Python computation
  for (std::size_t i = 0; i < kCorpus.size(); ++i)
    for (std::size_t j = 0; j < kCorpus.size(); ++j)
      EXPECT_NEAR(lexical_cosine(kCorpus[i], kCorpus[j], kCorpus).value, oracle_cosine(kCorpus[i], kCorpus[j], kCorpus),
                  1e-9);
}

TEST(Lexical, SymmetricExactly) {
  TfIdfModel m(kCorpus);
  for (const auto& a : kCorpus)
    for (const auto& b : kCorpus) EXPECT_EQ(m.cosine(a, b), m.cosine(b, a));
}

TEST(Lexical, RequiresCorpus) { EXPECT_THROW(lexical_cosine("a", "b", {}), std::invalid_argument); }

namespace {

class FixedProvider final : public SimilarityProvider {
public:
  explicit FixedProvider(double v) : v_(v) {}
  ProviderKind kind() const override { return ProviderKind::LexicalTfidf; }
  SimilarityScore score(std::string_view, std::string_view) override { return {v_}; }

private:
  double v_;
};

}  // namespace

TEST(HighModification, ThresholdBoundaryIsLow) {
  FixedProvider high(0.95), low(0.5), edge(0.8);
  EXPECT_FALSE(is_high_modification("a", "b", high));
  EXPECT_TRUE(is_high_modification("a", "b", low));
  EXPECT_FALSE(is_high_modification("a", "b", edge));
  EXPECT_TRUE(is_high_modification("a", "b", high, 0.96));
}

// ---------------------------------------------------------------------------
// Remote client against an in-process mock of the embedding service.

namespace {

class MockService {
public:
  enum class Mode { Ok, NonFinite, WrongCount, NotUnit, ServerError, Slow };

  MockService() {
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) { embed(req, res); });
    server_.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      if (loading) {
        res.status = 503;
        res.set_content(R"({"status":"loading","model":"mock-1"})", "application/json");
        return;
      }
      res.set_content(R"({"status":"ok","model":"mock-1"})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockService() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::atomic<Mode> mode{Mode::Ok};
  std::atomic<bool> loading{false};
  std::atomic<int> requests{0};
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};

  // Deterministic 3-d unit vectors; "north"/"east" are orthogonal.
  static std::vector<double> vector_for(const std::string& t) {
    if (t == "north") return {1, 0, 0};
    if (t == "east") return {0, 1, 0};
    const double h = static_cast<double>(std::hash<std::string>{}(t) % 1000) / 1000.0;
    std::vector<double> v{1.0, h, 1.0 - h};
    double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (auto& x : v) x /= n;
    return v;
  }

private:
  void embed(const httplib::Request& req, httplib::Response& res) {
    ++requests;
    const int now = ++in_flight;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    auto body = json::parse(req.body);
    json vecs = json::array();
    for (const auto& t : body["texts"]) vecs.push_back(vector_for(t.get<std::string>()));
    switch (mode.load()) {
      case Mode::Ok: break;
      case Mode::NonFinite: vecs[0][0] = "nan"; break;
      case Mode::WrongCount: vecs.erase(vecs.begin()); break;
      case Mode::NotUnit: vecs[0] = {2.0, 0.0, 0.0}; break;
      case Mode::ServerError: res.status = 503; break;
      case Mode::Slow: std::this_thread::sleep_for(std::chrono::milliseconds(300)); break;
    }
    --in_flight;
    if (res.status == 503) return;
    res.set_content(json{{"vectors", vecs}, {"dim", 3}}.dump(), "application/json");
  }

  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RemoteConfig config_for(const MockService& m) {
  RemoteConfig c;
  c.endpoint = m.endpoint();
  c.model = "mock-1";
  c.timeout = std::chrono::milliseconds(2000);
  return c;
}

}  // namespace

TEST(Remote, SelfSimilarityIsOne) {
  MockService m;
  RemoteEmbeddingProvider p(config_for(m));
  EXPECT_NEAR(p.score("The cat sat.", "The cat sat.").value, 1.0, 1e-6);
}

TEST(Remote, OrthogonalVectorsScoreZero) {
  MockService m;
  RemoteEmbeddingProvider p(config_for(m));
  auto s = p.score("north", "east");
  EXPECT_NEAR(s.value, 0.0, 1e-12);
  EXPECT_EQ(s.provider, ProviderKind::RemoteEmbedding);
}

TEST(Remote, SymmetricWithinTolerance) {
  MockService m;
  RemoteEmbeddingProvider p(config_for(m));
  EXPECT_NEAR(p.score("alpha", "beta").value, p.score("beta", "alpha").value, 1e-6);
}

TEST(Remote, RepeatedStringsHitTheCache) {
  MockService m;
  RemoteEmbeddingProvider p(config_for(m));
  p.score("one", "two");
  const auto s = p.score("two", "one");
  EXPECT_TRUE(s.cached);
  EXPECT_EQ(m.requests.load(), 1);
  EXPECT_EQ(p.network_calls(), 1u);
}

TEST(Remote, BatchOrderIsPreserved) {
  MockService m;
  RemoteEmbeddingProvider p(config_for(m));
  const std::vector<std::string> texts{"north", "east", "gamma"};
  auto v = p.embed(texts);
  ASSERT_EQ(v.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(v[i], MockService::vector_for(texts[i]));
}

TEST(Remote, NonFiniteVectorIsProviderError) {
  MockService m;
  m.mode = MockService::Mode::NonFinite;
  RemoteEmbeddingProvider p(config_for(m));
  EXPECT_THROW(p.score("a", "b"), ProviderError);
}

TEST(Remote, ProtocolViolationsAreProviderErrors) {
  MockService m;
  for (auto mode : {MockService::Mode::WrongCount, MockService::Mode::NotUnit, MockService::Mode::ServerError}) {
    m.mode = mode;
    RemoteEmbeddingProvider p(config_for(m));
    EXPECT_THROW(p.score("a", "b"), ProviderError);
  }
}

TEST(Remote, FailureIsNotCached) {
  MockService m;
  m.mode = MockService::Mode::ServerError;
  RemoteEmbeddingProvider p(config_for(m));
  EXPECT_THROW(p.score("a", "b"), ProviderError);
  m.mode = MockService::Mode::Ok;
  EXPECT_NO_THROW(p.score("a", "b"));
}

TEST(Remote, UnreachableEndpointIsProviderError) {
  RemoteConfig c;
  c.endpoint = "http://127.0.0.1:1";
  c.timeout = std::chrono::milliseconds(500);
  RemoteEmbeddingProvider p(c);
  EXPECT_THROW(p.score("a", "b"), ProviderError);
  EXPECT_THROW(p.health(), ProviderError);
}

TEST(Remote, TimeoutIsProviderError) {
  MockService m;
  m.mode = MockService::Mode::Slow;
  auto c = config_for(m);
  c.timeout = std::chrono::milliseconds(50);
  RemoteEmbeddingProvider p(c);
  EXPECT_THROW(p.score("a", "b"), ProviderError);
}

TEST(Remote, FallbackIsOptInAndRecorded) {
  MockService m;
  m.mode = MockService::Mode::ServerError;
  TfIdfModel lexical(kCorpus);
  auto c = config_for(m);
  RemoteEmbeddingProvider strict(c, &lexical);
  EXPECT_THROW(strict.score("the cat sat", "the cat slept"), ProviderError);
  c.fallback_to_lexical = true;
  RemoteEmbeddingProvider lenient(c, &lexical);
  auto s = lenient.score("the cat sat", "the cat slept");
  EXPECT_TRUE(s.fallback);
  EXPECT_EQ(s.provider, ProviderKind::LexicalTfidf);
  EXPECT_NEAR(s.value, lexical.cosine(std::string_view("the cat sat"), std::string_view("the cat slept")), 1e-12);
}

TEST(Remote, HealthReportsStatusAndModel) {
  MockService m;
  RemoteEmbeddingProvider p(config_for(m));
  auto h = p.health();
  EXPECT_EQ(h.status, "ok");
  EXPECT_EQ(h.model, "mock-1");
  m.loading = true;
  EXPECT_EQ(p.health().status, "loading");
}

TEST(Remote, InFlightRequestsAreBounded) {
  MockService m;
  m.mode = MockService::Mode::Slow;
  auto c = config_for(m);
  c.max_in_flight = 2;
  RemoteEmbeddingProvider p(c);
  std::vector<std::thread> threads;
  for (int i = 0; i < 6; ++i)
    threads.emplace_back([&p, i] { p.score("x" + std::to_string(i), "y" + std::to_string(i)); });
  for (auto& t : threads) t.join();
  EXPECT_EQ(m.requests.load(), 6);
  EXPECT_LE(m.peak.load(), 2);
}

TEST(Remote, ConcurrentIdenticalQueriesShareOneCall) {
  MockService m;
  m.mode = MockService::Mode::Slow;
  RemoteEmbeddingProvider p(config_for(m));
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&p] { p.score("same", "same"); });
  for (auto& t : threads) t.join();
  EXPECT_EQ(m.requests.load(), 1);
}
