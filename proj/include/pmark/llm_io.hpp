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

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pmark/detection.hpp"
#include "pmark/embedding.hpp"
#include "pmark/selection.hpp"

namespace pmark {

// ---------------------------------------------------------------- segmentation

struct SentenceSplit {
  std::vector<std::string> sentences;
  std::vector<std::size_t> offsets;     // byte offset of each sentence
  std::vector<std::string> separators;  // text between sentence i and i + 1
  std::string leading;                  // text before the first sentence

  /// leading + sentence[0] + separators[0] + ... == the input, byte for byte.
  std::string reconstruct() const;
};

/// Splits after '.', '!' or '?' (plus any run of terminals and closing quotes
/// or brackets) when followed by whitespace or the end of the text. A period
/// ending a guarded abbreviation such as "Dr." is not a boundary. Single
/// letters like "A." are not guarded.
SentenceSplit split_sentences(std::string_view text);

/// Sentences joined with one space, the form generation emits.
std::string join_sentences(std::span<const std::string> sentences);

// ---------------------------------------------------------------- endpoints

struct RetryPolicy {
  unsigned max_retries = 3;
  double backoff_seconds = 0.5;
  double backoff_factor = 2.0;
};

struct ModelEndpointConfig {
  std::string base_url;             // PMARK_API_BASE
  std::string api_key;              // PMARK_API_KEY
  std::string model;
  std::string embed_base_url;       // PMARK_EMBED_BASE, falls back to base_url
  std::string embed_api_key;        // PMARK_EMBED_KEY, falls back to api_key
  std::string embed_model;
  double temperature = 0.7;
  double top_p = 0.95;
  unsigned max_tokens = 64;         // per sentence
  double timeout_seconds = 60.0;
  RetryPolicy retry;
  unsigned parallelism = 4;         // concurrent completion requests
  std::size_t embed_batch = 64;

  /// Throws InvalidConfig unless temperature >= 0 and 0 < top_p <= 1.
  void validate() const;
};

/// Fills empty URL and credential fields from the PMARK_* variables.
void apply_endpoint_env(ModelEndpointConfig& cfg);

struct Completion {
  std::string text;
  std::size_t tokens = 0;
};

/// Which draw a completion request stands for. The mock endpoint is a pure
/// function of (seed, context, purpose, index); real endpoints ignore it.
struct SampleTag {
  std::string_view purpose;
  std::uint64_t first_index = 0;
};

/// Text sampler plus sentence encoder. Implementations must be callable from
/// several threads at once.
class ModelClient {
 public:
  virtual ~ModelClient() = default;

  virtual std::vector<Completion> complete(const std::string& context, std::size_t n,
                                           const SampleTag& tag) = 0;
  virtual std::vector<std::vector<double>> embed(std::span<const std::string> texts) = 0;
};

/// OpenAI-compatible HTTP client: POST {base}/completions and
/// {base}/embeddings. Transient failures (connection errors, 429, 5xx) are
/// retried with exponential backoff; then EndpointUnavailable.
std::unique_ptr<ModelClient> make_http_client(ModelEndpointConfig cfg);

/// Deterministic offline stand-in. Completions are short word-list sentences,
/// occasionally two of them; embeddings are uniform on the sphere of
/// dimension `dim`, seeded by the text alone.
std::unique_ptr<ModelClient> make_mock_client(std::uint64_t seed, std::size_t dim);

struct SampledSentence {
  std::string text;     // first sentence of the completion
  std::size_t tokens = 0;  // tokens the endpoint generated for it
};

/// n single-sentence continuations. Completions that yield no sentence are
/// re-requested up to the retry budget, then EmptyCompletion.
std::vector<SampledSentence> sample_candidates(ModelClient& client, const std::string& context,
                                               std::size_t n, const SampleTag& tag,
                                               unsigned max_retries = 3);

/// Unit-normalized embeddings; DimMismatch when the encoder dimension is not
/// `dim`.
std::vector<UnitVector> embed_sentences(ModelClient& client,
                                        std::span<const std::string> sentences,
                                        std::size_t dim);

// ---------------------------------------------------------------- pipeline

struct PipelineConfig {
  std::size_t T = 12;
  std::size_t N = 64;  // generation budget and detection resample size
  unsigned max_retries = 3;
};

struct SentenceRecord {
  std::size_t t = 0;
  std::string text;
  std::vector<int> seeds;
  std::size_t candidates_sampled = 0;
  std::size_t tokens_sampled = 0;
  std::size_t selected_tokens = 0;
  std::size_t evidence = 0;                  // channels matching the seed bits
  std::optional<SelectionTrace> online;      // online mode only
};

struct GeneratedDocument {
  Mode mode = Mode::kOnline;
  std::string prompt;
  std::vector<std::string> sentences;
  std::vector<SentenceRecord> trace;

  std::string text() const { return join_sentences(sentences); }
  double mean_candidates_per_sentence() const;
  double mean_tokens_per_sentence() const;
};

/// Context for step t: the prompt, then each earlier sentence, separated by
/// single spaces.
std::string step_context(const std::string& prompt, std::span<const std::string> sentences,
                         std::size_t count);

/// Online: N candidates per step, nested median halving. Offline: candidates
/// one at a time until one matches every seed bit, at most N.
GeneratedDocument generate_watermarked(ModelClient& client, const std::string& prompt,
                                       const MasterKey& key, Mode mode,
                                       const PipelineConfig& cfg);

/// Unwatermarked baseline: one sample per step.
GeneratedDocument generate_plain(ModelClient& client, const std::string& prompt,
                                 const PipelineConfig& cfg);

/// Online detection resamples N candidates per sentence conditioned on the
/// prompt and the earlier sentences, so it needs the prompt (InvalidConfig
/// without one). Offline detection only embeds the sentences.
DetectionReport detect_text(ModelClient& client, const std::string& text,
                            const std::optional<std::string>& prompt, const MasterKey& key,
                            Mode mode, const PipelineConfig& cfg,
                            const DetectionParams& params);

}  // namespace pmark
