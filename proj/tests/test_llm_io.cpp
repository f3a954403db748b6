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

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"
#include "pmark/llm_io.hpp"
#include "test_util.hpp"

using namespace pmark;

namespace {

std::vector<std::string> split(std::string_view text) { return split_sentences(text).sentences; }

using Strings = std::vector<std::string>;

}  // namespace

TEST(Segmentation, Examples) {
  EXPECT_EQ(split("A. B? C!"), (Strings{"A.", "B?", "C!"}));
  EXPECT_TRUE(split("").empty());
  EXPECT_TRUE(split("   \n").empty());
  EXPECT_EQ(split("Dr. Smith left. He ran."), (Strings{"Dr. Smith left.", "He ran."}));
  EXPECT_EQ(split("Wait... what?! \"Yes.\" Done"),
            (Strings{"Wait...", "what?!", "\"Yes.\"", "Done"}));
  EXPECT_EQ(split("Pi is 3.14 exactly. Ok."), (Strings{"Pi is 3.14 exactly.", "Ok."}));
  EXPECT_EQ(split("See e.g. the notes (page 2.) Then go."),
            (Strings{"See e.g. the notes (page 2.)", "Then go."}));
}

TEST(Segmentation, ReconstructsInput) {
  for (std::string text : {"  Lead in. Then\n\nmore!  Tail", "One.", "", "No terminal",
                           "Mr. X met Mrs. Y. They talked.\tEnd."}) {
    const SentenceSplit s = split_sentences(text);
    EXPECT_EQ(s.reconstruct(), text);
    ASSERT_EQ(s.offsets.size(), s.sentences.size());
    for (std::size_t i = 0; i < s.sentences.size(); ++i) {
      EXPECT_EQ(text.substr(s.offsets[i], s.sentences[i].size()), s.sentences[i]);
    }
  }
}

TEST(Segmentation, JoinThenSplitIsIdentity) {
  auto mock = make_mock_client(7, 8);
  for (int i = 0; i < 30; ++i) {
    const auto done = sample_candidates(*mock, "ctx " + std::to_string(i), 12, {"plain", 0});
    Strings sentences;
    for (const auto& c : done) sentences.push_back(c.text);
    const std::string joined = join_sentences(sentences);
    EXPECT_EQ(split(joined), sentences);
    EXPECT_EQ(split(join_sentences(split(joined))), split(joined));
  }
}

TEST(Mock, DeterministicAndSized) {
  auto a = make_mock_client(3, 32);
  auto b = make_mock_client(3, 32);
  const auto ca = a->complete("Hello.", 64, {"generate", 0});
  const auto cb = b->complete("Hello.", 64, {"generate", 0});
  ASSERT_EQ(ca.size(), 64u);
  for (std::size_t i = 0; i < ca.size(); ++i) {
    EXPECT_EQ(ca[i].text, cb[i].text);
    EXPECT_GT(ca[i].tokens, 0u);
  }
  const auto shifted = a->complete("Hello.", 4, {"generate", 1});
  EXPECT_EQ(shifted[0].text, ca[1].text);
  const auto other = a->complete("Hello.", 4, {"detect", 0});
  EXPECT_NE(other[0].text, ca[0].text);
}

TEST(SampleCandidates, TruncatesToFirstSentence) {
  auto mock = make_mock_client(4, 16);
  const auto raw = mock->complete("ctx", 64, {"generate", 0});
  const auto got = sample_candidates(*mock, "ctx", 64, {"generate", 0});
  ASSERT_EQ(got.size(), 64u);
  bool saw_two = false;
  for (std::size_t i = 0; i < 64; ++i) {
    const Strings parts = split(raw[i].text);
    ASSERT_FALSE(parts.empty());
    EXPECT_EQ(got[i].text, parts.front());
    EXPECT_EQ(split(got[i].text).size(), 1u);
    saw_two = saw_two || parts.size() > 1;
  }
  EXPECT_TRUE(saw_two);
  EXPECT_EQ(code_of([&] { sample_candidates(*mock, "ctx", 0, {"generate", 0}); }),
            Errc::kInvalidCount);
}

namespace {

class EmptyClient final : public ModelClient {
 public:
  std::vector<Completion> complete(const std::string&, std::size_t n, const SampleTag&) override {
    ++calls;
    return std::vector<Completion>(n, Completion{"   ", 1});
  }
  std::vector<std::vector<double>> embed(std::span<const std::string> texts) override {
    return std::vector<std::vector<double>>(texts.size(), std::vector<double>(3, 1.0));
  }
  int calls = 0;
};

}  // namespace

TEST(SampleCandidates, EmptyCompletionAfterRetries) {
  EmptyClient client;
  EXPECT_EQ(code_of([&] { sample_candidates(client, "ctx", 2, {"generate", 0}, 3); }),
            Errc::kEmptyCompletion);
  EXPECT_EQ(client.calls, 4);
}

TEST(EmbedSentences, UnitVectorsAndDim) {
  auto mock = make_mock_client(5, 24);
  Strings texts(64);
  for (std::size_t i = 0; i < texts.size(); ++i) texts[i] = "Sentence " + std::to_string(i) + ".";
  texts[10] = texts[3];
  const auto v = embed_sentences(*mock, texts, 24);
  ASSERT_EQ(v.size(), 64u);
  for (const auto& e : v) {
    double n = 0;
    for (double c : e.components()) n += c * c;
    EXPECT_NEAR(n, 1.0, 1e-12);
  }
  EXPECT_TRUE(same_components(v[10].components(), v[3].components()));
  EXPECT_EQ(code_of([&] { embed_sentences(*mock, texts, 25); }), Errc::kDimMismatch);
  EXPECT_EQ(code_of([&] { embed_sentences(*mock, {}, 24); }), Errc::kEmptyInput);
}

TEST(Pipeline, ZeroSentencesLeavesPromptAlone) {
  auto mock = make_mock_client(6, 32);
  PipelineConfig cfg;
  cfg.T = 0;
  const auto doc = generate_watermarked(*mock, "Start here.", {1, 32, 4}, Mode::kOffline, cfg);
  EXPECT_TRUE(doc.sentences.empty());
  EXPECT_EQ(doc.prompt, "Start here.");
  EXPECT_EQ(doc.text(), "");
}

TEST(Pipeline, OfflineRoundsAndTokens) {
  auto mock = make_mock_client(7, 64);
  PipelineConfig cfg;
  const MasterKey key{11, 64, 4};
  const auto doc = generate_watermarked(*mock, "Tell me a story.", key, Mode::kOffline, cfg);
  ASSERT_EQ(doc.sentences.size(), 12u);
  ASSERT_EQ(doc.trace.size(), 12u);
  const auto seeds = ChannelSeeds::from_key(key);
  for (const auto& r : doc.trace) {
    EXPECT_GE(r.candidates_sampled, 1u);
    EXPECT_LE(r.candidates_sampled, 64u);
    EXPECT_GE(r.tokens_sampled, r.selected_tokens);
    EXPECT_GT(r.selected_tokens, 0u);
    EXPECT_EQ(r.seeds, seeds.step(r.t));
    if (r.candidates_sampled < 64) EXPECT_EQ(r.evidence, 4u);
    EXPECT_FALSE(r.online.has_value());
  }
  EXPECT_LT(doc.mean_candidates_per_sentence(), 64.0);

  const auto report =
      detect_text(*mock, doc.text(), std::nullopt, key, Mode::kOffline, cfg, {});
  EXPECT_TRUE(report.verdict);
  EXPECT_EQ(report.T, 12u);
}

TEST(Pipeline, OnlineRoundTrip) {
  auto mock = make_mock_client(8, 48);
  PipelineConfig cfg;
  cfg.T = 8;
  cfg.N = 32;
  const MasterKey key{12, 48, 3};
  const std::string prompt = "Describe the harbor.";
  const auto doc = generate_watermarked(*mock, prompt, key, Mode::kOnline, cfg);
  for (const auto& r : doc.trace) {
    EXPECT_EQ(r.candidates_sampled, 32u);
    ASSERT_TRUE(r.online.has_value());
    EXPECT_EQ(r.online->survivors.size(), 4u);
  }
  EXPECT_EQ(doc.mean_candidates_per_sentence(), 32.0);
  const auto report = detect_text(*mock, doc.text(), prompt, key, Mode::kOnline, cfg, {});
  EXPECT_EQ(report.mode, Mode::kOnline);
  EXPECT_GT(report.z, report.z_alpha);

  EXPECT_EQ(code_of([&] { detect_text(*mock, doc.text(), std::nullopt, key, Mode::kOnline, cfg, {}); }),
            Errc::kInvalidConfig);
  PipelineConfig odd = cfg;
  odd.N = 30;
  EXPECT_EQ(code_of([&] { generate_watermarked(*mock, prompt, key, Mode::kOnline, odd); }),
            Errc::kBudgetNotDivisible);
}

TEST(Pipeline, EmptyTextIsAnError) {
  auto mock = make_mock_client(9, 16);
  EXPECT_EQ(code_of([&] {
              detect_text(*mock, "  ", std::nullopt, {1, 16, 2}, Mode::kOffline, {}, {});
            }),
            Errc::kEmptyInput);
}

TEST(Pipeline, WrongKeyLooksUnwatermarked) {
  auto mock = make_mock_client(10, 64);
  PipelineConfig cfg;
  const MasterKey key{13, 64, 4};
  double mean_z = 0;
  int positives = 0;
  const int docs = 40;
  for (int i = 0; i < docs; ++i) {
    const auto doc = generate_watermarked(*mock, "Prompt " + std::to_string(i) + ".", key,
                                          Mode::kOffline, cfg);
    const auto r = detect_text(*mock, doc.text(), std::nullopt, {14, 64, 4}, Mode::kOffline, cfg,
                               {});
    mean_z += r.z / docs;
    positives += r.verdict ? 1 : 0;
  }
  // |z| of a null count has mean about sqrt(2/pi) = 0.8; the soft count
  // inflates it slightly.
  EXPECT_LT(mean_z, 1.6);
  EXPECT_LE(positives, 6);
}

TEST(Pipeline, PlainGenerationTakesOneSample) {
  auto mock = make_mock_client(11, 16);
  PipelineConfig cfg;
  cfg.T = 5;
  const auto doc = generate_plain(*mock, "Go.", cfg);
  ASSERT_EQ(doc.sentences.size(), 5u);
  for (const auto& r : doc.trace) EXPECT_EQ(r.candidates_sampled, 1u);
  EXPECT_EQ(step_context("Go.", doc.sentences, 2), "Go. " + doc.sentences[0] + " " + doc.sentences[1]);
}

TEST(EndpointConfig, Validation) {
  ModelEndpointConfig cfg;
  cfg.top_p = 0.0;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), Errc::kInvalidConfig);
  cfg.top_p = 1.0;
  cfg.temperature = -1;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), Errc::kInvalidConfig);
  cfg.temperature = 0.7;
  EXPECT_EQ(code_of([&] { make_http_client(cfg); }), Errc::kInvalidConfig);  // no URL
}

namespace {

// Minimal OpenAI-style server on a random local port.
class FakeServer {
 public:
  FakeServer() {
    server_.Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
      if (fail_next_ > 0) {
        --fail_next_;
        res.status = 503;
        return;
      }
      const auto body = nlohmann::json::parse(req.body);
      EXPECT_EQ(body["temperature"].get<double>(), 0.7);
      EXPECT_EQ(body["top_p"].get<double>(), 0.95);
      authorization = req.get_header_value("Authorization");
      nlohmann::json reply;
      const int n = body["n"].get<int>();
      for (int i = 0; i < n; ++i) {
        reply["choices"].push_back({{"text", " Choice " + std::to_string(i) + ". Extra one."}});
      }
      reply["usage"] = {{"completion_tokens", 5 * n}};
      res.set_content(reply.dump(), "application/json");
    });
    server_.Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      nlohmann::json reply;
      const auto& input = body["input"];
      // Reverse order with explicit indices.
      for (std::size_t i = input.size(); i-- > 0;) {
        const double len = static_cast<double>(input[i].get<std::string>().size());
        reply["data"].push_back({{"index", i}, {"embedding", {len, 1.0, 0.0}}});
      }
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  void fail_next(int n) { fail_next_ = n; }

  std::string authorization;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> fail_next_{0};
};

ModelEndpointConfig local_config(const FakeServer& s) {
  ModelEndpointConfig cfg;
  cfg.base_url = s.base();
  cfg.api_key = "secret";
  cfg.parallelism = 1;
  cfg.embed_batch = 3;
  cfg.retry.backoff_seconds = 0.01;
  cfg.timeout_seconds = 5;
  return cfg;
}

}  // namespace

TEST(Http, CompletionsAndEmbeddings) {
  FakeServer server;
  auto client = make_http_client(local_config(server));
  const auto got = sample_candidates(*client, "ctx", 4, {"generate", 0});
  ASSERT_EQ(got.size(), 4u);
  EXPECT_EQ(got[2].text, "Choice 2.");
  EXPECT_EQ(got[2].tokens, 5u);
  EXPECT_EQ(server.authorization, "Bearer secret");

  const Strings texts = {"a", "bbb", "cc", "dddd", "e"};
  const auto raw = client->embed(texts);
  ASSERT_EQ(raw.size(), 5u);
  for (std::size_t i = 0; i < texts.size(); ++i) EXPECT_EQ(raw[i][0], double(texts[i].size()));
  EXPECT_EQ(code_of([&] { embed_sentences(*client, texts, 4); }), Errc::kDimMismatch);
}

TEST(Http, RetriesTransientFailures) {
  FakeServer server;
  server.fail_next(2);
  auto client = make_http_client(local_config(server));
  EXPECT_EQ(client->complete("ctx", 2, {"generate", 0}).size(), 2u);
  server.fail_next(10);
  EXPECT_EQ(code_of([&] { client->complete("ctx", 2, {"generate", 0}); }),
            Errc::kEndpointUnavailable);
}

TEST(Http, EndpointDown) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  ModelEndpointConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  cfg.retry.max_retries = 2;
  cfg.retry.backoff_seconds = 0.01;
  cfg.timeout_seconds = 2;
  auto client = make_http_client(cfg);
  EXPECT_EQ(code_of([&] { sample_candidates(*client, "ctx", 1, {"generate", 0}); }),
            Errc::kEndpointUnavailable);
}
