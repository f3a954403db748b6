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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmark/detection.hpp"
#include "pmark/embedding.hpp"
#include "pmark/selection.hpp"

namespace pmark {

enum class CorpusKind { kSphere, kAnisotropic, kMixture };

/// Synthetic stand-in for the model's next-sentence distribution. Candidate
/// embeddings for step t of document `doc` are i.i.d. given the step context,
/// and the context itself is a pure function of (seed, doc, t).
struct SyntheticCorpusModel {
  std::size_t dim = 768;
  std::size_t T = 12;
  std::size_t N = 64;
  CorpusKind kind = CorpusKind::kSphere;
  std::uint64_t seed = 1;
  // anisotropic: component i has standard deviation (i + 1)^-decay, plus a
  // mean offset of length mean_shift along a fixed random direction.
  double decay = 0.5;
  double mean_shift = 0.0;
  // mixture: each step picks one of `components` random unit directions and
  // candidates scatter around it with relative spread `spread`.
  std::size_t components = 8;
  double spread = 1.0;
};

class CorpusSampler {
 public:
  explicit CorpusSampler(SyntheticCorpusModel model);

  const SyntheticCorpusModel& model() const { return model_; }
  /// n candidates for step t (1-based) of document `doc`.
  std::vector<UnitVector> sample(std::uint64_t doc, std::size_t t, std::size_t n,
                                 CounterRng& rng) const;
  UnitVector sample_one(std::uint64_t doc, std::size_t t, CounterRng& rng) const;

 private:
  std::size_t topic(std::uint64_t doc, std::size_t t) const;

  SyntheticCorpusModel model_;
  std::vector<double> scales_;
  std::vector<double> mean_;
  std::vector<UnitVector> directions_;
};

enum class AttackKind { kRotation, kJitter };

std::string_view attack_kind_name(AttackKind kind);
AttackKind parse_attack_kind(std::string_view name);

/// Embedding-space attacker with cosine-distance budget d: every attacked
/// embedding e' satisfies 1 - <e, e'> <= d.
struct AttackSpec {
  AttackKind kind = AttackKind::kRotation;
  double d = 0.0;
  double prob = 1.0;  // per-sentence application probability
};

struct AttackOutcome {
  std::vector<UnitVector> embeddings;
  std::vector<double> achieved_cosine;  // 1 for untouched sentences
  std::vector<bool> applied;
};

/// Rotation moves e by exactly arccos(1 - d) toward a uniformly random
/// direction orthogonal to e; jitter draws the angle uniformly from
/// [0, arccos(1 - d)]. Throws BudgetOutOfRange unless 0 <= d <= 2.
AttackOutcome apply_attack(std::span<const UnitVector> doc, const AttackSpec& spec,
                           CounterRng& rng);

/// Rotates e by `angle` toward a random unit direction orthogonal to e.
UnitVector rotate_toward_random(const UnitVector& e, double angle, CounterRng& rng);

struct GeneratedSimDoc {
  std::uint64_t doc = 0;
  std::vector<UnitVector> sentences;
  std::vector<SelectionTrace> online_traces;        // online mode only
  std::vector<std::size_t> selected_evidence;       // offline mode only
  std::vector<double> mean_offered_evidence;        // offline mode only
  std::vector<std::size_t> candidates_per_sentence;
};

/// Generates `trials` watermarked documents; document i uses id 2i and the
/// trial streams {2, 2i, k} of the model seed.
std::vector<GeneratedSimDoc> run_generation_trials(const CorpusSampler& corpus,
                                                   const MasterKey& key, Mode mode,
                                                   std::size_t trials);

/// Unwatermarked documents (plain sampling); document i uses id 2i + 1.
std::vector<GeneratedSimDoc> run_null_trials(const CorpusSampler& corpus,
                                             std::size_t trials);

/// Detects one synthetic document, resampling from the corpus in online mode.
DetectionReport detect_sim_document(const CorpusSampler& corpus,
                                    const MasterKey& key, const PivotSet& pivots,
                                    Mode mode, std::uint64_t doc,
                                    std::span<const UnitVector> sentences,
                                    const DetectionParams& params);

struct MetricsReport {
  std::map<double, double> tpr_at_fpr;
  std::map<double, double> threshold_at_fpr;
  double auc = 0.5;
  double auc_trapezoid = 0.5;
  std::vector<double> watermarked_z;
  std::vector<double> null_z;
};

inline constexpr double kDefaultFprLevelsData[] = {0.01, 0.05};
inline constexpr std::span<const double> kDefaultFprLevels{kDefaultFprLevelsData};

/// Empirical ROC summary. The threshold for FPR f is the order statistic of
/// rank ceil((1 - f) * n0) of the sorted null scores; TPR counts watermarked
/// scores strictly above it. AUC is the Mann-Whitney statistic with half
/// credit for ties.
MetricsReport roc_metrics(std::span<const double> watermarked_z,
                          std::span<const double> null_z,
                          std::span<const double> fpr_levels = kDefaultFprLevels);

/// Selected-index histogram for one fixed candidate set when every trial
/// draws fresh uniform seed bits (equivalently, a fresh key).
std::vector<std::uint64_t> selection_index_histogram(
    Mode mode, std::span<const UnitVector> candidates, const PivotSet& pivots,
    std::uint64_t trials, CounterRng& rng);

/// Total-variation distance of the observed index histogram from uniform.
double tv_from_uniform(std::span<const std::uint64_t> counts);

struct ExperimentConfig {
  SyntheticCorpusModel corpus;
  std::size_t b = 4;
  std::vector<Mode> modes{Mode::kOnline};
  std::optional<AttackSpec> attack;
  std::size_t trials = 500;
  std::uint64_t key_seed = 0;
  DetectionParams params;
};

ExperimentConfig experiment_config_from_json(const std::string& text);

struct ScenarioResult {
  Mode mode = Mode::kOnline;
  std::optional<AttackSpec> attack;
  MetricsReport metrics;
  double fpr_at_z_alpha = 0.0;
  double tpr_at_z_alpha = 0.0;
  double mean_candidates_per_sentence = 0.0;
  double selected_index_tv = 0.0;  // pick-index distance from uniform
};

struct ExperimentResult {
  std::vector<ScenarioResult> scenarios;
  std::vector<std::string> trial_records;  // one JSON object per line
};

/// For every mode: generate watermarked and null documents, detect them
/// unattacked and (if configured) attacked, and summarize.
ExperimentResult end_to_end_experiment(const ExperimentConfig& config);

std::string experiment_metrics_json(const ExperimentConfig& config,
                                    const ExperimentResult& result);

}  // namespace pmark
