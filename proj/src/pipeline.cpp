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

#include <numeric>

#include "pmark/errors.hpp"
#include "pmark/llm_io.hpp"

namespace pmark {
namespace {

CounterRng selection_rng(const MasterKey& key, const std::string& prompt, std::size_t t) {
  return CounterRng(key.seed, StreamId{stream_domain::kSelection,
                                       static_cast<std::uint32_t>(fnv1a64(prompt)),
                                       static_cast<std::uint32_t>(t)});
}

std::vector<std::string> texts_of(const std::vector<SampledSentence>& s) {
  std::vector<std::string> out;
  out.reserve(s.size());
  for (const auto& x : s) out.push_back(x.text);
  return out;
}

std::size_t token_total(const std::vector<SampledSentence>& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{0},
                         [](std::size_t acc, const SampledSentence& x) { return acc + x.tokens; });
}

}  // namespace

double GeneratedDocument::mean_candidates_per_sentence() const {
  if (trace.empty()) return 0.0;
  double total = 0.0;
  for (const auto& r : trace) total += static_cast<double>(r.candidates_sampled);
  return total / static_cast<double>(trace.size());
}

double GeneratedDocument::mean_tokens_per_sentence() const {
  if (trace.empty()) return 0.0;
  double total = 0.0;
  for (const auto& r : trace) total += static_cast<double>(r.tokens_sampled);
  return total / static_cast<double>(trace.size());
}

std::string step_context(const std::string& prompt, std::span<const std::string> sentences,
                         std::size_t count) {
  std::string ctx = prompt;
  for (std::size_t i = 0; i < count && i < sentences.size(); ++i) {
    ctx += ' ';
    ctx += sentences[i];
  }
  return ctx;
}

GeneratedDocument generate_watermarked(ModelClient& client, const std::string& prompt,
                                       const MasterKey& key, Mode mode,
                                       const PipelineConfig& cfg) {
  const PivotSet pivots = generate_pivots(key);
  const ChannelSeeds seeds = ChannelSeeds::from_key(key);
  if (cfg.N == 0) fail(Errc::kInvalidCount, "sample budget N must be positive");
  if (mode == Mode::kOnline && (key.channels >= 63 || cfg.N % (std::size_t{1} << key.channels) != 0)) {
    fail(Errc::kBudgetNotDivisible, "online mode needs N divisible by 2^b; N = " +
                                        std::to_string(cfg.N) + ", b = " +
                                        std::to_string(key.channels));
  }
  GeneratedDocument doc;
  doc.mode = mode;
  doc.prompt = prompt;
  for (std::size_t t = 1; t <= cfg.T; ++t) {
    const std::string ctx = step_context(prompt, doc.sentences, t - 1);
    CounterRng rng = selection_rng(key, prompt, t);
    SentenceRecord rec;
    rec.t = t;
    rec.seeds = seeds.step(t);
    std::vector<SampledSentence> pool;
    std::size_t pick = 0;
    if (mode == Mode::kOnline) {
      pool = sample_candidates(client, ctx, cfg.N, {"generate", 0}, cfg.max_retries);
      const auto emb = embed_sentences(client, texts_of(pool), key.dim);
      const ScoreMatrix scores = ScoreMatrix::from_embeddings(emb, pivots);
      SelectionTrace trace = online_select(scores, rec.seeds, rng);
      pick = trace.pick;
      rec.evidence = offline_evidence(offline_signature(scores.row(pick)), rec.seeds);
      rec.online = std::move(trace);
    } else {
      OfflineSelector selector(rec.seeds);
      std::vector<std::size_t> evidence;
      for (std::size_t i = 0; i < cfg.N; ++i) {
        auto one = sample_candidates(client, ctx, 1, {"generate", i}, cfg.max_retries);
        const auto emb = embed_sentences(client, texts_of(one), key.dim);
        const ScoreMatrix row = ScoreMatrix::from_embeddings(emb, pivots);
        evidence.push_back(offline_evidence(offline_signature(row.row(0)), rec.seeds));
        pool.push_back(std::move(one.front()));
        if (selector.offer(row.row(0))) break;
      }
      pick = selector.finish(rng);
      rec.evidence = evidence[pick];
    }
    rec.candidates_sampled = pool.size();
    rec.tokens_sampled = token_total(pool);
    rec.selected_tokens = pool[pick].tokens;
    rec.text = pool[pick].text;
    doc.sentences.push_back(rec.text);
    doc.trace.push_back(std::move(rec));
  }
  return doc;
}

GeneratedDocument generate_plain(ModelClient& client, const std::string& prompt,
                                 const PipelineConfig& cfg) {
  GeneratedDocument doc;
  doc.prompt = prompt;
  for (std::size_t t = 1; t <= cfg.T; ++t) {
    const std::string ctx = step_context(prompt, doc.sentences, t - 1);
    auto one = sample_candidates(client, ctx, 1, {"plain", 0}, cfg.max_retries);
    SentenceRecord rec;
    rec.t = t;
    rec.candidates_sampled = 1;
    rec.tokens_sampled = one.front().tokens;
    rec.selected_tokens = one.front().tokens;
    rec.text = one.front().text;
    doc.sentences.push_back(rec.text);
    doc.trace.push_back(std::move(rec));
  }
  return doc;
}

DetectionReport detect_text(ModelClient& client, const std::string& text,
                            const std::optional<std::string>& prompt, const MasterKey& key,
                            Mode mode, const PipelineConfig& cfg,
                            const DetectionParams& params) {
  const SentenceSplit split = split_sentences(text);
  if (split.sentences.empty()) fail(Errc::kEmptyInput, "text contains no sentence");
  if (mode == Mode::kOnline && !prompt) {
    fail(Errc::kInvalidConfig, "online detection resamples from the prompt; none was given");
  }
  const PivotSet pivots = generate_pivots(key);
  const ChannelSeeds seeds = ChannelSeeds::from_key(key);
  const auto emb = embed_sentences(client, split.sentences, key.dim);
  if (mode == Mode::kOffline) return detect_offline(emb, seeds, pivots, params);

  std::vector<ScoreMatrix> resampled;
  resampled.reserve(emb.size());
  for (std::size_t t = 1; t <= emb.size(); ++t) {
    const std::string ctx = step_context(*prompt, split.sentences, t - 1);
    const auto pool = sample_candidates(client, ctx, cfg.N, {"detect", 0}, cfg.max_retries);
    resampled.push_back(
        ScoreMatrix::from_embeddings(embed_sentences(client, texts_of(pool), key.dim), pivots));
  }
  return detect_online(emb, resampled, seeds, pivots, params);
}

}  // namespace pmark
