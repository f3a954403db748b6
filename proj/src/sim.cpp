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

#include "pmark/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"
#include "json_io.hpp"
#include "parallel.hpp"
#include "pmark/errors.hpp"

namespace pmark {
namespace {

// Sub-streams of a simulated document, {2, doc, k}.
constexpr std::uint32_t kGenerationStream = 1;
constexpr std::uint32_t kSelectionStream = 2;
constexpr std::uint32_t kResampleStream = 3;
constexpr std::uint32_t kAttackStream = 4;
constexpr std::uint32_t kTopicStreamBase = 0x1000;
constexpr std::uint64_t kIndexTvTrials = 20000;

CounterRng doc_rng(std::uint64_t seed, std::uint64_t doc, std::uint32_t k) {
  return CounterRng(seed, StreamId{stream_domain::kTrial,
                                   static_cast<std::uint32_t>(doc), k});
}

}  // namespace

CorpusSampler::CorpusSampler(SyntheticCorpusModel model) : model_(model) {
  if (model_.dim < 2) fail(Errc::kInvalidConfig, "corpus dim must be >= 2");
  if (model_.N < 1) fail(Errc::kInvalidConfig, "corpus N must be >= 1");
  // Fixed model geometry lives on its own stream so it never overlaps with
  // per-document draws.
  CounterRng geometry(mix64(model_.seed), StreamId{stream_domain::kTrial, 0xFFFFFFFFu, 0});
  switch (model_.kind) {
    case CorpusKind::kSphere:
      break;
    case CorpusKind::kAnisotropic: {
      scales_.resize(model_.dim);
      double total = 0.0;
      for (std::size_t i = 0; i < model_.dim; ++i) {
        scales_[i] = std::pow(static_cast<double>(i + 1), -model_.decay);
        total += scales_[i] * scales_[i];
      }
      const UnitVector dir = sample_sphere(geometry, model_.dim);
      mean_.resize(model_.dim);
      for (std::size_t i = 0; i < model_.dim; ++i) {
        mean_[i] = model_.mean_shift * std::sqrt(total) * dir[i];
      }
      break;
    }
    case CorpusKind::kMixture:
      if (model_.components < 1) fail(Errc::kInvalidConfig, "mixture needs components");
      for (std::size_t k = 0; k < model_.components; ++k) {
        directions_.push_back(sample_sphere(geometry, model_.dim));
      }
      break;
  }
}

std::size_t CorpusSampler::topic(std::uint64_t doc, std::size_t t) const {
  CounterRng rng = doc_rng(model_.seed, doc,
                           kTopicStreamBase + static_cast<std::uint32_t>(t));
  return static_cast<std::size_t>(rng.below(model_.components));
}

UnitVector CorpusSampler::sample_one(std::uint64_t doc, std::size_t t,
                                     CounterRng& rng) const {
  const std::size_t d = model_.dim;
  switch (model_.kind) {
    case CorpusKind::kSphere:
      return sample_sphere(rng, d);
    case CorpusKind::kAnisotropic: {
      std::vector<double> g(d);
      for (std::size_t i = 0; i < d; ++i) g[i] = mean_[i] + scales_[i] * rng.gaussian();
      return UnitVector::normalize(g);
    }
    case CorpusKind::kMixture: {
      const UnitVector& center = directions_[topic(doc, t)];
      const double scale = model_.spread / std::sqrt(static_cast<double>(d));
      std::vector<double> g(d);
      for (std::size_t i = 0; i < d; ++i) g[i] = center[i] + scale * rng.gaussian();
      return UnitVector::normalize(g);
    }
  }
  fail(Errc::kInvalidConfig, "unknown corpus kind");
}

std::vector<UnitVector> CorpusSampler::sample(std::uint64_t doc, std::size_t t,
                                              std::size_t n, CounterRng& rng) const {
  std::vector<UnitVector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(doc, t, rng));
  return out;
}

std::string_view attack_kind_name(AttackKind kind) {
  return kind == AttackKind::kRotation ? "paraphrase-rotation" : "jitter";
}

AttackKind parse_attack_kind(std::string_view name) {
  if (name == "paraphrase-rotation" || name == "rotation") return AttackKind::kRotation;
  if (name == "jitter") return AttackKind::kJitter;
  fail(Errc::kInvalidConfig, "unknown attack kind '" + std::string(name) + "'");
}

UnitVector rotate_toward_random(const UnitVector& e, double angle, CounterRng& rng) {
  const std::size_t d = e.dim();
  std::vector<double> w(d);
  for (;;) {
    for (double& x : w) x = rng.gaussian();
    const double along = dot(w, e.components());
    for (std::size_t i = 0; i < d; ++i) w[i] -= along * e[i];
    if (l2_norm(w) > 1e-6) break;
  }
  const UnitVector dir = UnitVector::normalize(w);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = c * e[i] + s * dir[i];
  return UnitVector::normalize(out);
}

AttackOutcome apply_attack(std::span<const UnitVector> doc, const AttackSpec& spec,
                           CounterRng& rng) {
  if (!(spec.d >= 0.0 && spec.d <= 2.0)) {
    fail(Errc::kBudgetOutOfRange, "attack budget d must lie in [0, 2]");
  }
  if (!(spec.prob >= 0.0 && spec.prob <= 1.0)) {
    fail(Errc::kInvalidConfig, "attack probability must lie in [0, 1]");
  }
  const double max_angle = std::acos(1.0 - spec.d);
  AttackOutcome out;
  for (const UnitVector& e : doc) {
    const bool hit = spec.d > 0.0 && rng.uniform() < spec.prob;
    if (!hit) {
      out.embeddings.push_back(e);
      out.achieved_cosine.push_back(1.0);
      out.applied.push_back(false);
      continue;
    }
    const double angle =
        spec.kind == AttackKind::kRotation ? max_angle : rng.uniform() * max_angle;
    UnitVector attacked = rotate_toward_random(e, angle, rng);
    out.achieved_cosine.push_back(dot(e.components(), attacked.components()));
    out.embeddings.push_back(std::move(attacked));
    out.applied.push_back(true);
  }
  return out;
}

std::vector<GeneratedSimDoc> run_generation_trials(const CorpusSampler& corpus,
                                                   const MasterKey& key, Mode mode,
                                                   std::size_t trials) {
  const auto& model = corpus.model();
  if (key.dim != model.dim) fail(Errc::kDimMismatch, "key dim differs from corpus dim");
  const PivotSet pivots = generate_pivots(key);
  const ChannelSeeds seeds = ChannelSeeds::from_key(key);
  const std::size_t b = key.channels;
  if (mode == Mode::kOnline && (b >= 63 || model.N % (std::size_t{1} << b) != 0)) {
    fail(Errc::kBudgetNotDivisible, "online mode needs N divisible by 2^b");
  }

  std::vector<GeneratedSimDoc> docs(trials);
  detail::parallel_for(trials, [&](std::size_t i) {
    GeneratedSimDoc& out = docs[i];
    out.doc = 2 * static_cast<std::uint64_t>(i);
    CounterRng gen = doc_rng(model.seed, out.doc, kGenerationStream);
    CounterRng sel = doc_rng(model.seed, out.doc, kSelectionStream);
    for (std::size_t t = 1; t <= model.T; ++t) {
      const std::vector<int> step_seeds = seeds.step(t);
      if (mode == Mode::kOnline) {
        std::vector<UnitVector> cands = corpus.sample(out.doc, t, model.N, gen);
        const ScoreMatrix scores = ScoreMatrix::from_embeddings(cands, pivots);
        SelectionTrace trace = online_select(scores, step_seeds, sel);
        out.sentences.push_back(std::move(cands[trace.pick]));
        out.online_traces.push_back(std::move(trace));
        out.candidates_per_sentence.push_back(model.N);
      } else {
        OfflineSelector selector(step_seeds);
        std::vector<UnitVector> offered;
        double evidence_sum = 0.0;
        for (std::size_t n = 0; n < model.N; ++n) {
          offered.push_back(corpus.sample_one(out.doc, t, gen));
          std::vector<double> row(b);
          for (std::size_t j = 0; j < b; ++j) row[j] = pivot_proxy(offered.back(), pivots, j);
          evidence_sum += static_cast<double>(
              offline_evidence(offline_signature(row), step_seeds));
          if (selector.offer(row)) break;
        }
        const std::size_t pick = selector.finish(sel);
        out.selected_evidence.push_back(
            offline_evidence(offline_signature(offered[pick], pivots), step_seeds));
        out.mean_offered_evidence.push_back(evidence_sum /
                                            static_cast<double>(offered.size()));
        out.candidates_per_sentence.push_back(offered.size());
        out.sentences.push_back(std::move(offered[pick]));
      }
    }
  });
  return docs;
}

std::vector<GeneratedSimDoc> run_null_trials(const CorpusSampler& corpus,
                                             std::size_t trials) {
  const auto& model = corpus.model();
  std::vector<GeneratedSimDoc> docs(trials);
  detail::parallel_for(trials, [&](std::size_t i) {
    GeneratedSimDoc& out = docs[i];
    out.doc = 2 * static_cast<std::uint64_t>(i) + 1;
    CounterRng gen = doc_rng(model.seed, out.doc, kGenerationStream);
    for (std::size_t t = 1; t <= model.T; ++t) {
      out.sentences.push_back(corpus.sample_one(out.doc, t, gen));
      out.candidates_per_sentence.push_back(1);
    }
  });
  return docs;
}

DetectionReport detect_sim_document(const CorpusSampler& corpus,
                                    const MasterKey& key, const PivotSet& pivots,
                                    Mode mode, std::uint64_t doc,
                                    std::span<const UnitVector> sentences,
                                    const DetectionParams& params) {
  const ChannelSeeds seeds = ChannelSeeds::from_key(key);
  if (mode == Mode::kOffline) return detect_offline(sentences, seeds, pivots, params);
  CounterRng rng = doc_rng(corpus.model().seed, doc, kResampleStream);
  std::vector<ScoreMatrix> resampled;
  resampled.reserve(sentences.size());
  for (std::size_t t = 1; t <= sentences.size(); ++t) {
    const auto cands = corpus.sample(doc, t, corpus.model().N, rng);
    resampled.push_back(ScoreMatrix::from_embeddings(cands, pivots));
  }
  return detect_online(sentences, resampled, seeds, pivots, params);
}

MetricsReport roc_metrics(std::span<const double> watermarked_z,
                          std::span<const double> null_z,
                          std::span<const double> fpr_levels) {
  if (watermarked_z.empty() || null_z.empty()) {
    fail(Errc::kEmptyScoreSet, "ROC metrics need both score sets");
  }
  MetricsReport out;
  out.watermarked_z.assign(watermarked_z.begin(), watermarked_z.end());
  out.null_z.assign(null_z.begin(), null_z.end());
  std::vector<double> nulls = out.null_z;
  std::sort(nulls.begin(), nulls.end());
  const double n0 = static_cast<double>(nulls.size());
  const double n1 = static_cast<double>(watermarked_z.size());

  for (double f : fpr_levels) {
    if (!(f > 0.0 && f < 1.0)) fail(Errc::kDomainError, "FPR level outside (0, 1)");
    // Rank ceil((1 - f) n0), 1-based; the small slack absorbs rounding in
    // products such as 0.95 * 100.
    auto rank = static_cast<std::size_t>(std::ceil((1.0 - f) * n0 - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, nulls.size());
    const double threshold = nulls[rank - 1];
    std::size_t above = 0;
    for (double z : watermarked_z) above += z > threshold ? 1 : 0;
    out.threshold_at_fpr[f] = threshold;
    out.tpr_at_fpr[f] = static_cast<double>(above) / n1;
  }

  // Mann-Whitney: each (watermarked, null) pair scores 1 when ordered, 1/2
  // when tied.
  double wins = 0.0;
  for (double z : watermarked_z) {
    const auto lo = std::lower_bound(nulls.begin(), nulls.end(), z);
    const auto hi = std::upper_bound(nulls.begin(), nulls.end(), z);
    wins += static_cast<double>(lo - nulls.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  out.auc = wins / (n0 * n1);

  // Trapezoidal integral of the ROC traced by thresholds at every distinct
  // score, from high to low.
  std::vector<std::pair<double, int>> all;
  for (double z : watermarked_z) all.emplace_back(z, 1);
  for (double z : nulls) all.emplace_back(z, 0);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  double tp = 0.0, fp = 0.0, area = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    const double prev_tpr = tp / n1;
    const double prev_fpr = fp / n0;
    std::size_t k = i;
    for (; k < all.size() && all[k].first == all[i].first; ++k) {
      (all[k].second == 1 ? tp : fp) += 1.0;
    }
    area += (fp / n0 - prev_fpr) * 0.5 * (tp / n1 + prev_tpr);
    i = k;
  }
  out.auc_trapezoid = area;
  return out;
}

std::vector<std::uint64_t> selection_index_histogram(
    Mode mode, std::span<const UnitVector> candidates, const PivotSet& pivots,
    std::uint64_t trials, CounterRng& rng) {
  const ScoreMatrix scores = ScoreMatrix::from_embeddings(candidates, pivots);
  std::vector<std::uint64_t> hist(candidates.size(), 0);
  std::vector<int> seeds(pivots.channel_count());
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    for (int& s : seeds) s = rng.bit() ? 1 : 0;
    const std::size_t pick = mode == Mode::kOnline
                                 ? online_select(scores, seeds, rng).pick
                                 : offline_select(scores, seeds, rng);
    ++hist[pick];
  }
  return hist;
}

double tv_from_uniform(std::span<const std::uint64_t> counts) {
  if (counts.empty()) fail(Errc::kEmptyInput, "no histogram bins");
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total == 0.0) return 0.0;
  const double uniform = 1.0 / static_cast<double>(counts.size());
  double tv = 0.0;
  for (auto c : counts) tv += std::abs(static_cast<double>(c) / total - uniform);
  return 0.5 * tv;
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kParse, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(Errc::kInvalidConfig, "config must be a JSON object");
  ExperimentConfig c;
  try {
    c.corpus.dim = j.value("dim", c.corpus.dim);
    c.corpus.T = j.value("T", c.corpus.T);
    c.corpus.N = j.value("N", c.corpus.N);
    c.corpus.seed = j.value("seed", c.corpus.seed);
    c.b = j.value("b", c.b);
    c.trials = j.value("trials", c.trials);
    c.params.alpha = j.value("alpha", c.params.alpha);
    c.params.delta = j.value("delta", c.params.delta);
    c.params.K = j.value("K", c.params.K);
    c.key_seed = j.contains("key_seed") ? j["key_seed"].get<std::uint64_t>()
                                        : mix64(c.corpus.seed);
    const std::string mode = j.value("mode", std::string("online"));
    if (mode == "both") {
      c.modes = {Mode::kOnline, Mode::kOffline};
    } else {
      c.modes = {parse_mode(mode)};
    }
    if (j.contains("attack") && !j["attack"].is_null()) {
      const auto& a = j["attack"];
      AttackSpec spec;
      spec.kind = parse_attack_kind(a.value("kind", std::string("paraphrase-rotation")));
      spec.d = a.value("d", 0.0);
      spec.prob = a.value("prob", 1.0);
      if (!(spec.d >= 0.0 && spec.d <= 2.0)) {
        fail(Errc::kBudgetOutOfRange, "attack budget d must lie in [0, 2]");
      }
      c.attack = spec;
    }
    if (j.contains("corpus")) {
      const auto& k = j["corpus"];
      const std::string kind = k.value("kind", std::string("sphere"));
      if (kind == "sphere") {
        c.corpus.kind = CorpusKind::kSphere;
      } else if (kind == "anisotropic") {
        c.corpus.kind = CorpusKind::kAnisotropic;
      } else if (kind == "mixture") {
        c.corpus.kind = CorpusKind::kMixture;
      } else {
        fail(Errc::kInvalidConfig, "unknown corpus kind '" + kind + "'");
      }
      c.corpus.decay = k.value("decay", c.corpus.decay);
      c.corpus.mean_shift = k.value("mean_shift", c.corpus.mean_shift);
      c.corpus.components = k.value("components", c.corpus.components);
      c.corpus.spread = k.value("spread", c.corpus.spread);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kInvalidConfig, std::string("bad config value: ") + e.what());
  }
  if (c.b < 1 || c.b > c.corpus.dim) fail(Errc::kInvalidShape, "need 1 <= b <= dim");
  if (c.corpus.T < 1) fail(Errc::kInvalidConfig, "T must be >= 1");
  if (!(c.params.K > 0.0) || !(c.params.delta >= 0.0) ||
      !(c.params.alpha > 0.0 && c.params.alpha < 1.0)) {
    fail(Errc::kInvalidConfig, "need K > 0, delta >= 0, 0 < alpha < 1");
  }
  return c;
}

namespace {

struct DocScores {
  std::vector<double> z;
  std::vector<nlohmann::json> records;
};

DocScores detect_all(const CorpusSampler& corpus, const MasterKey& key,
                     const PivotSet& pivots, Mode mode,
                     const std::vector<GeneratedSimDoc>& docs,
                     const std::optional<AttackSpec>& attack,
                     const DetectionParams& params, const char* kind) {
  DocScores out;
  out.z.resize(docs.size());
  out.records.resize(docs.size());
  detail::parallel_for(docs.size(), [&](std::size_t i) {
    const GeneratedSimDoc& doc = docs[i];
    std::vector<UnitVector> sentences = doc.sentences;
    double min_cos = 1.0;
    if (attack) {
      CounterRng rng = doc_rng(corpus.model().seed, doc.doc, kAttackStream);
      AttackOutcome hit = apply_attack(sentences, *attack, rng);
      for (double c : hit.achieved_cosine) min_cos = std::min(min_cos, c);
      sentences = std::move(hit.embeddings);
    }
    const DetectionReport report =
        detect_sim_document(corpus, key, pivots, mode, doc.doc, sentences, params);
    out.z[i] = report.z;
    nlohmann::ordered_json rec;
    rec["mode"] = mode_name(mode);
    rec["attack"] = attack ? attack_json(*attack) : nlohmann::ordered_json();
    rec["kind"] = kind;
    rec["doc"] = doc.doc;
    rec["z"] = report.z;
    rec["n_green"] = report.n_green;
    rec["verdict"] = report.verdict;
    std::size_t consumed = 0;
    for (auto c : doc.candidates_per_sentence) consumed += c;
    rec["candidates"] = consumed;
    if (attack) rec["min_attack_cosine"] = min_cos;
    out.records[i] = std::move(rec);
  });
  return out;
}

double fraction_above(const std::vector<double>& z, double threshold) {
  if (z.empty()) return 0.0;
  std::size_t n = 0;
  for (double v : z) n += v > threshold ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(z.size());
}

}  // namespace

ExperimentResult end_to_end_experiment(const ExperimentConfig& config) {
  ExperimentResult result;
  if (config.trials == 0) return result;
  const MasterKey key{config.key_seed, config.corpus.dim, config.b};
  const PivotSet pivots = generate_pivots(key);
  const CorpusSampler corpus(config.corpus);
  const double z_alpha = z_threshold(config.params.alpha);

  std::vector<std::optional<AttackSpec>> attacks{std::nullopt};
  if (config.attack) attacks.push_back(config.attack);

  const std::vector<GeneratedSimDoc> nulls = run_null_trials(corpus, config.trials);
  for (Mode mode : config.modes) {
    const auto marked = run_generation_trials(corpus, key, mode, config.trials);
    const DocScores null_scores =
        detect_all(corpus, key, pivots, mode, nulls, std::nullopt, config.params, "null");
    for (auto& rec : null_scores.records) result.trial_records.push_back(rec.dump());

    double consumed = 0.0, sentences = 0.0;
    for (const auto& doc : marked) {
      for (auto c : doc.candidates_per_sentence) consumed += static_cast<double>(c);
      sentences += static_cast<double>(doc.candidates_per_sentence.size());
    }
    CounterRng tv_rng = doc_rng(config.corpus.seed, 0xFFFFFFFEu, kSelectionStream);
    const auto fixed = corpus.sample(0xFFFFFFFEu, 1, config.corpus.N, tv_rng);
    const double index_tv = tv_from_uniform(
        selection_index_histogram(mode, fixed, pivots, kIndexTvTrials, tv_rng));

    for (const auto& attack : attacks) {
      const DocScores wm = detect_all(corpus, key, pivots, mode, marked, attack,
                                      config.params, "watermarked");
      for (auto& rec : wm.records) result.trial_records.push_back(rec.dump());
      ScenarioResult s;
      s.mode = mode;
      s.attack = attack;
      s.metrics = roc_metrics(wm.z, null_scores.z);
      s.fpr_at_z_alpha = fraction_above(null_scores.z, z_alpha);
      s.tpr_at_z_alpha = fraction_above(wm.z, z_alpha);
      s.mean_candidates_per_sentence = sentences > 0 ? consumed / sentences : 0.0;
      s.selected_index_tv = index_tv;
      result.scenarios.push_back(std::move(s));
    }
  }
  return result;
}

std::string experiment_metrics_json(const ExperimentConfig& config,
                                    const ExperimentResult& result) {
  nlohmann::ordered_json j;
  j["trials"] = config.trials;
  j["dim"] = config.corpus.dim;
  j["T"] = config.corpus.T;
  j["N"] = config.corpus.N;
  j["b"] = config.b;
  j["alpha"] = config.params.alpha;
  j["z_alpha"] = z_threshold(config.params.alpha);
  j["scenarios"] = nlohmann::ordered_json::array();
  for (const auto& s : result.scenarios) j["scenarios"].push_back(scenario_json(s));
  return j.dump(2) + "\n";
}

}  // namespace pmark
