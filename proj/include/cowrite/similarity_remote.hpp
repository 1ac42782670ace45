#pragma once

// Client for the embedding wire protocol:
//   POST /embed  {"texts":[...],"model":"..."} -> {"vectors":[[...],...],"dim":n}
//   GET  /health -> {"status":"ok","model":"..."}
// Vectors arrive unit-normalised, so cosine is a dot product.

#include <atomic>
#include <chrono>
#include <cmath>
#include <future>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <unordered_map>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cowrite/similarity.hpp"

namespace cowrite {

struct RemoteConfig {
  std::string endpoint = "http://127.0.0.1:8765";
  std::string model = "default";
  std::chrono::milliseconds timeout{10'000};
  int max_in_flight = 8;
  bool fallback_to_lexical = false;
};

struct HealthStatus {
  std::string status;
  std::string model;
};

class RemoteEmbeddingProvider final : public SimilarityProvider {
public:
  /// `fallback` is consulted only when config.fallback_to_lexical is set.
  explicit RemoteEmbeddingProvider(RemoteConfig config, const TfIdfModel* fallback = nullptr)
      : config_(std::move(config)), fallback_(fallback), slots_(std::max(1, config_.max_in_flight)) {}

  ProviderKind kind() const override { return ProviderKind::RemoteEmbedding; }

  SimilarityScore score(std::string_view a, std::string_view b) override {
    try {
      bool cached = true;
      auto vectors = embed({std::string(a), std::string(b)}, &cached);
      const auto& va = vectors[0];
      const auto& vb = vectors[1];
      if (va.size() != vb.size()) throw ProviderError("embedding dimensions differ");
      double dot = 0.0;
      for (std::size_t i = 0; i < va.size(); ++i) dot += va[i] * vb[i];
      if (!std::isfinite(dot)) throw ProviderError("non-finite similarity");
      return {std::clamp(dot, -1.0, 1.0), ProviderKind::RemoteEmbedding, cached, false};
    } catch (const ProviderError&) {
      if (!config_.fallback_to_lexical || fallback_ == nullptr) throw;
      return {fallback_->cosine(a, b), ProviderKind::LexicalTfidf, false, true};
    }
  }

  /// Embeds texts, serving repeats from the per-provider cache. Concurrent
  /// requests for the same string share one network call.
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts, bool* all_cached = nullptr) {
    using Future = std::shared_future<std::vector<double>>;
    std::vector<Future> futures(texts.size());
    std::vector<std::string> to_fetch;
    std::vector<std::shared_ptr<std::promise<std::vector<double>>>> promises;
    {
      std::lock_guard lock(mutex_);
      for (std::size_t i = 0; i < texts.size(); ++i) {
        auto it = cache_.find(texts[i]);
        if (it != cache_.end()) {
          futures[i] = it->second;
          continue;
        }
        auto p = std::make_shared<std::promise<std::vector<double>>>();
        Future f = p->get_future().share();
        cache_.emplace(texts[i], f);
        futures[i] = f;
        to_fetch.push_back(texts[i]);
        promises.push_back(std::move(p));
      }
    }
    if (all_cached) *all_cached = to_fetch.empty();
    if (!to_fetch.empty()) {
      try {
        auto vecs = request(to_fetch);
        for (std::size_t i = 0; i < promises.size(); ++i) promises[i]->set_value(std::move(vecs[i]));
      } catch (...) {
        {
          std::lock_guard lock(mutex_);
          for (const auto& t : to_fetch) cache_.erase(t);
        }
        for (auto& p : promises) p->set_exception(std::current_exception());
      }
    }
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (auto& f : futures) out.push_back(f.get());
    return out;
  }

  HealthStatus health() {
    auto client = make_client();
    auto res = client.Get("/health");
    if (!res) throw ProviderError("health: " + httplib::to_string(res.error()));
    HealthStatus h;
    h.status = res->status == 200 ? "ok" : "unavailable";
    try {
      auto body = nlohmann::json::parse(res->body);
      h.status = body.value("status", h.status);
      h.model = body.value("model", "");
    } catch (const nlohmann::json::exception&) {
      if (res->status == 200) throw ProviderError("health: malformed body");
    }
    return h;
  }

  std::size_t network_calls() const { return network_calls_.load(); }
  const RemoteConfig& config() const { return config_; }

private:
  httplib::Client make_client() const {
    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    return client;
  }

  std::vector<std::vector<double>> request(const std::vector<std::string>& texts) {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};

    ++network_calls_;
    nlohmann::json body{{"texts", texts}, {"model", config_.model}};
    auto client = make_client();
    auto res = client.Post("/embed", body.dump(), "application/json");
    if (!res) throw ProviderError("embed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw ProviderError("embed: HTTP " + std::to_string(res->status));

    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw ProviderError(std::string("embed: malformed response: ") + e.what());
    }
    if (!reply.contains("vectors") || !reply["vectors"].is_array()) throw ProviderError("embed: missing vectors");
    const auto& vs = reply["vectors"];
    if (vs.size() != texts.size()) throw ProviderError("embed: vector count does not match texts");
    const auto dim = reply.value("dim", -1);
    std::vector<std::vector<double>> out;
    for (const auto& v : vs) {
      if (!v.is_array()) throw ProviderError("embed: vector is not an array");
      std::vector<double> x;
      x.reserve(v.size());
      double norm2 = 0.0;
      for (const auto& c : v) {
        if (!c.is_number()) throw ProviderError("embed: non-numeric component");
        const double d = c.get<double>();
        if (!std::isfinite(d)) throw ProviderError("embed: non-finite component");
        norm2 += d * d;
        x.push_back(d);
      }
      if (dim >= 0 && static_cast<int>(x.size()) != dim) throw ProviderError("embed: vector length != dim");
      if (std::abs(std::sqrt(norm2) - 1.0) > 1e-6) throw ProviderError("embed: vector is not unit-normalised");
      out.push_back(std::move(x));
    }
    return out;
  }

  RemoteConfig config_;
  const TfIdfModel* fallback_;
  std::counting_semaphore<> slots_;
  std::mutex mutex_;
  std::unordered_map<std::string, std::shared_future<std::vector<double>>> cache_;
  std::atomic<std::size_t> network_calls_{0};
};

}  // namespace cowrite
