// Copyright 2026 The pmark Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"
#include "parallel.hpp"
#include "pmark/errors.hpp"
#include "pmark/llm_io.hpp"
#include "pmark/random.hpp"

namespace pmark {

void ModelEndpointConfig::validate() const {
  if (!(temperature >= 0.0)) fail(Errc::kInvalidConfig, "temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) fail(Errc::kInvalidConfig, "top_p must be in (0, 1]");
  if (max_tokens == 0) fail(Errc::kInvalidConfig, "max_tokens must be positive");
  if (!(timeout_seconds > 0.0)) fail(Errc::kInvalidConfig, "timeout must be positive");
  if (!(retry.backoff_seconds >= 0.0) || !(retry.backoff_factor >= 1.0)) {
    fail(Errc::kInvalidConfig, "backoff must be >= 0 with factor >= 1");
  }
  if (parallelism == 0 || embed_batch == 0) {
    fail(Errc::kInvalidConfig, "parallelism and embed_batch must be positive");
  }
}

void apply_endpoint_env(ModelEndpointConfig& cfg) {
  auto env = [](const char* name) -> std::string {
    const char* v = std::getenv(name);
    return v != nullptr ? v : "";
  };
  if (cfg.base_url.empty()) cfg.base_url = env("PMARK_API_BASE");
  if (cfg.api_key.empty()) cfg.api_key = env("PMARK_API_KEY");
  if (cfg.embed_base_url.empty()) cfg.embed_base_url = env("PMARK_EMBED_BASE");
  if (cfg.embed_api_key.empty()) cfg.embed_api_key = env("PMARK_EMBED_KEY");
  if (cfg.embed_base_url.empty()) cfg.embed_base_url = cfg.base_url;
  if (cfg.embed_api_key.empty()) cfg.embed_api_key = cfg.api_key;
}

namespace {

using Json = nlohmann::json;

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix without trailing slash
};

Url split_url(const std::string& base) {
  const auto scheme = base.find("://");
  if (base.empty() || scheme == std::string::npos) {
    fail(Errc::kInvalidConfig, "endpoint URL must look like http(s)://host[:port][/path]");
  }
  const auto slash = base.find('/', scheme + 3);
  Url u;
  u.origin = base.substr(0, slash);
  u.path = slash == std::string::npos ? "" : base.substr(slash);
  while (!u.path.empty() && u.path.back() == '/') u.path.pop_back();
  return u;
}

class HttpClient final : public ModelClient {
 public:
  explicit HttpClient(ModelEndpointConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    completions_ = split_url(cfg_.base_url);
    embeddings_ = split_url(cfg_.embed_base_url.empty() ? cfg_.base_url : cfg_.embed_base_url);
  }

  std::vector<Completion> complete(const std::string& context, std::size_t n,
                                   const SampleTag&) override {
    const std::size_t chunks = std::min<std::size_t>(cfg_.parallelism, n);
    const std::size_t per = (n + chunks - 1) / chunks;
    std::vector<std::vector<Completion>> parts(chunks);
    detail::parallel_for(
        chunks,
        [&](std::size_t c) {
          const std::size_t want = std::min(per, n - std::min(n, c * per));
          if (want == 0) return;
          parts[c] = complete_batch(context, want);
        },
        chunks);
    std::vector<Completion> out;
    out.reserve(n);
    for (auto& p : parts) {
      for (auto& c : p) out.push_back(std::move(c));
    }
    return out;
  }

  std::vector<std::vector<double>> embed(std::span<const std::string> texts) override {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (std::size_t first = 0; first < texts.size(); first += cfg_.embed_batch) {
      const std::size_t last = std::min(texts.size(), first + cfg_.embed_batch);
      Json body = {{"model", cfg_.embed_model},
                   {"input", std::vector<std::string>(texts.begin() + first, texts.begin() + last)}};
      const Json reply = post(embeddings_, "/embeddings", cfg_.embed_api_key, body);
      std::vector<std::vector<double>> batch(last - first);
      try {
        std::size_t position = 0;
        for (const auto& item : reply.at("data")) {
          const std::size_t idx =
              item.contains("index") ? item.at("index").get<std::size_t>() : position;
          ++position;
          if (idx >= batch.size()) fail(Errc::kParse, "embedding index out of range");
          batch[idx] = item.at("embedding").get<std::vector<double>>();
        }
      } catch (const Json::exception& e) {
        fail(Errc::kParse, std::string("malformed embeddings response: ") + e.what());
      }
      for (auto& v : batch) {
        if (v.empty()) fail(Errc::kParse, "embeddings response is missing an item");
        out.push_back(std::move(v));
      }
    }
    return out;
  }

 private:
  std::vector<Completion> complete_batch(const std::string& context, std::size_t n) {
    Json body = {{"model", cfg_.model},           {"prompt", context},
                 {"temperature", cfg_.temperature}, {"top_p", cfg_.top_p},
                 {"n", n},                          {"max_tokens", cfg_.max_tokens}};
    const Json reply = post(completions_, "/completions", cfg_.api_key, body);
    std::vector<Completion> out;
    try {
      const auto& choices = reply.at("choices");
      std::size_t tokens = 0;
      if (reply.contains("usage") && reply["usage"].contains("completion_tokens")) {
        tokens = reply["usage"]["completion_tokens"].get<std::size_t>();
      }
      for (const auto& c : choices) {
        Completion item;
        item.text = c.at("text").get<std::string>();
        item.tokens = choices.empty() ? 0 : tokens / choices.size();
        out.push_back(std::move(item));
      }
    } catch (const Json::exception& e) {
      fail(Errc::kParse, std::string("malformed completions response: ") + e.what());
    }
    return out;
  }

  Json post(const Url& url, const std::string& route, const std::string& key,
            const Json& body) const {
    const std::string payload = body.dump();
    std::string last_problem;
    double wait = cfg_.retry.backoff_seconds;
    for (unsigned attempt = 0; attempt <= cfg_.retry.max_retries; ++attempt) {
      if (attempt != 0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(wait));
        wait *= cfg_.retry.backoff_factor;
      }
      httplib::Client client(url.origin);
      const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
          std::chrono::duration<double>(cfg_.timeout_seconds));
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);
      httplib::Headers headers;
      if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
      auto res = client.Post(url.path + route, headers, payload, "application/json");
      if (!res) {
        last_problem = "connection failed: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_problem = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        fail(Errc::kEndpointUnavailable,
             "HTTP " + std::to_string(res->status) + " from " + url.origin + url.path + route);
      }
      try {
        return Json::parse(res->body);
      } catch (const Json::exception& e) {
        fail(Errc::kParse, std::string("endpoint returned invalid JSON: ") + e.what());
      }
    }
    fail(Errc::kEndpointUnavailable, url.origin + url.path + route + " unavailable after " +
                                         std::to_string(cfg_.retry.max_retries) +
                                         " retries (" + last_problem + ")");
  }

  ModelEndpointConfig cfg_;
  Url completions_;
  Url embeddings_;
};

constexpr std::array<std::string_view, 48> kWords = {
    "river",  "stone",   "garden", "winter", "signal", "market", "lantern", "harbor",
    "forest", "engine",  "silver", "quiet",  "letter", "bridge", "meadow",  "window",
    "copper", "thunder", "valley", "candle", "orchard", "ladder", "compass", "island",
    "pebble", "morning", "violet", "anchor", "mirror", "saddle", "pepper",  "granite",
    "falcon", "timber",  "velvet", "canyon", "beacon", "marble", "tunnel",  "glacier",
    "cotton", "ember",   "prairie", "quartz", "ribbon", "summit", "willow",  "harvest"};

class MockClient final : public ModelClient {
 public:
  MockClient(std::uint64_t seed, std::size_t dim) : seed_(seed), dim_(dim) {}

  std::vector<Completion> complete(const std::string& context, std::size_t n,
                                   const SampleTag& tag) override {
    const std::uint64_t key = mix64(seed_ ^ fnv1a64(context));
    const auto purpose = static_cast<std::uint32_t>(fnv1a64(tag.purpose));
    std::vector<Completion> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      CounterRng rng(key, StreamId{stream_domain::kMock, purpose,
                                   static_cast<std::uint32_t>(tag.first_index + i)});
      Completion& c = out[i];
      const int sentences = rng.below(4) == 0 ? 2 : 1;
      for (int s = 0; s < sentences; ++s) {
        if (s != 0) c.text += ' ';
        const std::size_t words = 6 + rng.below(7);
        for (std::size_t w = 0; w < words; ++w) {
          std::string word(kWords[rng.below(kWords.size())]);
          if (w == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
          if (w != 0) c.text += ' ';
          c.text += word;
        }
        c.text += rng.below(8) == 0 ? '!' : '.';
        c.tokens += words + 1;
      }
    }
    return out;
  }

  std::vector<std::vector<double>> embed(std::span<const std::string> texts) override {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      CounterRng rng(mix64(seed_ ^ fnv1a64(t)), StreamId{stream_domain::kMock, 0xE3B0C442u, 0});
      std::vector<double> v(dim_);
      for (double& x : v) x = rng.gaussian();
      out.push_back(std::move(v));
    }
    return out;
  }

 private:
  std::uint64_t seed_;
  std::size_t dim_;
};

}  // namespace

std::unique_ptr<ModelClient> make_http_client(ModelEndpointConfig cfg) {
  return std::make_unique<HttpClient>(std::move(cfg));
}

std::unique_ptr<ModelClient> make_mock_client(std::uint64_t seed, std::size_t dim) {
  if (dim < 2) fail(Errc::kInvalidShape, "mock embedding dimension must be >= 2");
  return std::make_unique<MockClient>(seed, dim);
}

std::vector<SampledSentence> sample_candidates(ModelClient& client, const std::string& context,
                                               std::size_t n, const SampleTag& tag,
                                               unsigned max_retries) {
  if (n == 0) fail(Errc::kInvalidCount, "need at least one candidate");
  std::vector<SampledSentence> out;
  out.reserve(n);
  std::uint64_t index = tag.first_index;
  unsigned empty_rounds = 0;
  while (out.size() < n) {
    const std::size_t want = n - out.size();
    const auto batch = client.complete(context, want, SampleTag{tag.purpose, index});
    index += want;
    bool progressed = false;
    for (const auto& c : batch) {
      if (out.size() == n) break;
      SentenceSplit split = split_sentences(c.text);
      if (split.sentences.empty()) continue;
      out.push_back({std::move(split.sentences.front()), c.tokens});
      progressed = true;
    }
    if (!progressed && ++empty_rounds > max_retries) {
      fail(Errc::kEmptyCompletion, "endpoint returned no sentence for the context");
    }
  }
  return out;
}

std::vector<UnitVector> embed_sentences(ModelClient& client,
                                        std::span<const std::string> sentences,
                                        std::size_t dim) {
  if (sentences.empty()) fail(Errc::kEmptyInput, "nothing to embed");
  const auto raw = client.embed(sentences);
  if (raw.size() != sentences.size()) {
    fail(Errc::kParse, "encoder returned " + std::to_string(raw.size()) + " vectors for " +
                           std::to_string(sentences.size()) + " sentences");
  }
  std::vector<UnitVector> out;
  out.reserve(raw.size());
  for (const auto& v : raw) {
    if (v.size() != dim) {
      fail(Errc::kDimMismatch, "encoder dimension " + std::to_string(v.size()) +
                                   " differs from key dimension " + std::to_string(dim));
    }
    out.push_back(UnitVector::normalize(v));
  }
  return out;
}

}  // namespace pmark
