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

#include "records.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <ctime>

#include "pmark/errors.hpp"
#include "pmark/sim.hpp"

namespace pmark {
namespace {

template <class T>
void read_if(const nlohmann::json& j, const char* name, T& out) {
  if (j.contains(name) && !j[name].is_null()) out = j[name].get<T>();
}

Json error_json(const Error& e) {
  return {{"code", std::string(errc_name(e.code()))}, {"message", e.what()}};
}

Json document_json(const GeneratedDocument& doc) {
  Json j;
  j["prompt"] = doc.prompt;
  j["mode"] = std::string(mode_name(doc.mode));
  j["text"] = doc.text();
  j["sentences"] = doc.sentences;
  j["mean_candidates_per_sentence"] = doc.mean_candidates_per_sentence();
  j["mean_tokens_per_sentence"] = doc.mean_tokens_per_sentence();
  j["trace"] = Json::array();
  for (const auto& r : doc.trace) {
    Json t;
    t["t"] = r.t;
    t["seed_bits"] = r.seeds;
    t["candidates_sampled"] = r.candidates_sampled;
    t["tokens_sampled"] = r.tokens_sampled;
    t["selected_tokens"] = r.selected_tokens;
    t["evidence"] = r.evidence;
    if (r.online) t["selection"] = trace_json(*r.online);
    j["trace"].push_back(std::move(t));
  }
  return j;
}

}  // namespace

EngineConfig engine_config_from_json(const std::string& text) {
  EngineConfig c;
  if (text.empty()) return c;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kParse, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(Errc::kInvalidConfig, "config must be a JSON object");
  try {
    read_if(j, "T", c.pipeline.T);
    read_if(j, "N", c.pipeline.N);
    read_if(j, "alpha", c.params.alpha);
    read_if(j, "delta", c.params.delta);
    read_if(j, "K", c.params.K);
    read_if(j, "mock_seed", c.mock_seed);
    if (j.contains("dim")) c.dim = j["dim"].get<std::size_t>();
    if (j.contains("b")) c.b = j["b"].get<std::size_t>();
    if (j.contains("endpoint")) {
      const auto& e = j["endpoint"];
      if (e.contains("api_key") || e.contains("embed_api_key")) {
        fail(Errc::kInvalidConfig,
             "API keys belong in PMARK_API_KEY / PMARK_EMBED_KEY, not the config file");
      }
      auto& ep = c.endpoint;
      read_if(e, "base_url", ep.base_url);
      read_if(e, "model", ep.model);
      read_if(e, "embed_base_url", ep.embed_base_url);
      read_if(e, "embed_model", ep.embed_model);
      read_if(e, "temperature", ep.temperature);
      read_if(e, "top_p", ep.top_p);
      read_if(e, "max_tokens", ep.max_tokens);
      read_if(e, "timeout_seconds", ep.timeout_seconds);
      read_if(e, "max_retries", ep.retry.max_retries);
      read_if(e, "backoff_seconds", ep.retry.backoff_seconds);
      read_if(e, "backoff_factor", ep.retry.backoff_factor);
      read_if(e, "parallelism", ep.parallelism);
      read_if(e, "embed_batch", ep.embed_batch);
      c.pipeline.max_retries = ep.retry.max_retries;
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kInvalidConfig, std::string("bad config value: ") + e.what());
  }
  if (c.pipeline.N == 0) fail(Errc::kInvalidConfig, "N must be positive");
  if (!(c.params.alpha > 0.0 && c.params.alpha < 1.0)) {
    fail(Errc::kInvalidConfig, "alpha must lie in (0, 1)");
  }
  if (!(c.params.K > 0.0) || !(c.params.delta >= 0.0)) {
    fail(Errc::kInvalidConfig, "need K > 0 and delta >= 0");
  }
  c.endpoint.validate();
  return c;
}

std::string fingerprint(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(Errc::kIo, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < 8; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

std::string record_timestamp(bool reproducible) {
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else if (!reproducible) {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Engine::Engine(MasterKey key, std::string key_bytes, EngineConfig cfg, bool mock)
    : key_(key), fingerprint_(fingerprint(key_bytes)), cfg_(std::move(cfg)), mock_(mock) {
  if (cfg_.dim && *cfg_.dim != key_.dim) {
    fail(Errc::kDimMismatch, "config dim " + std::to_string(*cfg_.dim) +
                                 " differs from key dim " + std::to_string(key_.dim));
  }
  if (cfg_.b && *cfg_.b != key_.channels) {
    fail(Errc::kInvalidConfig, "config b " + std::to_string(*cfg_.b) +
                                   " differs from key channels " + std::to_string(key_.channels));
  }
  if (mock_) {
    client_ = make_mock_client(cfg_.mock_seed, key_.dim);
  } else {
    apply_endpoint_env(cfg_.endpoint);
    client_ = make_http_client(cfg_.endpoint);
  }
}

void Engine::check_mode(Mode mode) const {
  if (mode != Mode::kOnline) return;
  const std::size_t b = key_.channels;
  if (b >= 63 || cfg_.pipeline.N % (std::size_t{1} << b) != 0) {
    fail(Errc::kBudgetNotDivisible, "online mode needs N divisible by 2^b; N = " +
                                        std::to_string(cfg_.pipeline.N) + ", b = " +
                                        std::to_string(b));
  }
}

void Engine::set_detection(const DetectionParams& params) { cfg_.params = params; }

Json Engine::base_record(const char* kind, Mode mode) const {
  Json r;
  r["kind"] = kind;
  r["timestamp"] = record_timestamp(mock_);
  r["key_fingerprint"] = fingerprint_;
  Json c;
  c["mode"] = std::string(mode_name(mode));
  c["dim"] = key_.dim;
  c["b"] = key_.channels;
  c["T"] = cfg_.pipeline.T;
  c["N"] = cfg_.pipeline.N;
  c["alpha"] = cfg_.params.alpha;
  c["delta"] = cfg_.params.delta;
  c["K"] = cfg_.params.K;
  if (mock_) {
    c["endpoint"] = "mock";
  } else {
    c["endpoint"] = {{"model", cfg_.endpoint.model},
                     {"embed_model", cfg_.endpoint.embed_model},
                     {"temperature", cfg_.endpoint.temperature},
                     {"top_p", cfg_.endpoint.top_p},
                     {"max_tokens", cfg_.endpoint.max_tokens}};
  }
  r["config"] = std::move(c);
  return r;
}

std::string Engine::generate_record(Mode mode, const std::string& prompt,
                                    std::optional<Error>& error) const {
  Json r = base_record("generation", mode);
  error.reset();
  try {
    r["payload"] = document_json(generate_watermarked(*client_, prompt, key_, mode, cfg_.pipeline));
  } catch (const Error& e) {
    error = e;
    r["payload"] = {{"prompt", prompt}};
    r["error"] = error_json(e);
  }
  return r.dump();
}

std::string Engine::detect_record(Mode mode, const std::string& line,
                                  std::optional<bool>& verdict,
                                  std::optional<Error>& error) const {
  Json r = base_record("detection", mode);
  verdict.reset();
  error.reset();
  try {
    nlohmann::json in;
    try {
      in = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::kParse, std::string("input line is not JSON: ") + e.what());
    }
    if (!in.is_object()) fail(Errc::kParse, "input line is not a JSON object");
    const nlohmann::json& doc = in.contains("payload") ? in["payload"] : in;
    if (!doc.is_object() || !doc.contains("text") || !doc["text"].is_string()) {
      fail(Errc::kParse, "input record has no text");
    }
    std::optional<std::string> prompt;
    if (doc.contains("prompt") && doc["prompt"].is_string()) {
      prompt = doc["prompt"].get<std::string>();
    }
    const DetectionReport report = detect_text(*client_, doc["text"].get<std::string>(), prompt,
                                               key_, mode, cfg_.pipeline, cfg_.params);
    verdict = report.verdict;
    r["payload"] = report_json(report);
  } catch (const Error& e) {
    error = e;
    r["error"] = error_json(e);
  }
  return r.dump();
}

std::string simulation_record(const std::string& config_json, std::string& trials_jsonl) {
  const ExperimentConfig cfg = experiment_config_from_json(config_json);
  const ExperimentResult result = end_to_end_experiment(cfg);
  const MasterKey key{cfg.key_seed, cfg.corpus.dim, cfg.b};

  Json r;
  r["kind"] = "simulation";
  r["timestamp"] = record_timestamp(true);
  r["key_fingerprint"] = fingerprint(key_to_json(key));
  Json snapshot = Json::parse(config_json);
  snapshot.erase("key_seed");
  r["config"] = std::move(snapshot);
  r["payload"] = Json::parse(experiment_metrics_json(cfg, result));

  trials_jsonl.clear();
  for (const auto& line : result.trial_records) {
    trials_jsonl += line;
    trials_jsonl += '\n';
  }
  return r.dump(2) + "\n";
}

}  // namespace pmark
