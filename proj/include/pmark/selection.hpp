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
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pmark/embedding.hpp"
#include "pmark/proxy.hpp"
#include "pmark/random.hpp"

namespace pmark {

/// Proxy scores of N candidates on b channels, row-major (candidate, channel).
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static ScoreMatrix from_embeddings(std::span<const UnitVector> embeddings,
                                     const PivotSet& pivots);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::vector<double> column(std::size_t j) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct CandidateSet {
  std::vector<EmbeddedSentence> candidates;

  std::size_t size() const { return candidates.size(); }
  ScoreMatrix score(const PivotSet& pivots) const;
};

/// Binary seeds r(t, j). t is the 1-based sentence position, j the 0-based
/// channel. Key-derived bits come from stream {1, t, j + 1}.
class ChannelSeeds {
 public:
  static ChannelSeeds from_key(const MasterKey& key);
  /// Explicit table, rows indexed by t - 1.
  static ChannelSeeds from_table(std::vector<std::vector<int>> rows);

  int bit(std::size_t t, std::size_t channel) const;
  std::vector<int> step(std::size_t t) const;
  std::size_t channel_count() const { return channels_; }

 private:
  ChannelSeeds() = default;

  std::uint64_t seed_ = 0;
  std::size_t channels_ = 0;
  bool derived_ = true;
  std::vector<std::vector<int>> table_;
};

/// Harrell-Davis estimate of the median.
double hd_median(std::span<const double> values);
/// The Harrell-Davis weights for a sample of size n (sum to one).
std::vector<double> hd_median_weights(std::size_t n);

struct PartitionResult {
  std::vector<std::size_t> kept;  // indices into the score column
  double median = 0.0;            // midpoint of the two central order stats
};

/// Splits `members` at rank |members|/2 of `scores` and keeps the upper half
/// when side == 1, the lower half when side == 0. Ties straddling the split
/// are assigned to sides uniformly at random so both halves have exactly
/// |members|/2 elements. Throws OddSetSize.
PartitionResult median_partition(std::span<const std::size_t> members,
                                 std::span<const double> scores, int side,
                                 CounterRng& rng);

struct ChannelStep {
  int seed_bit = 0;
  double median = 0.0;
  std::size_t size_before = 0;
  std::size_t size_after = 0;
};

struct SelectionTrace {
  std::vector<ChannelStep> channels;
  std::vector<std::size_t> survivors;  // V_b
  std::size_t pick = 0;                // index into W
};

/// Nested halving across all channels without the final draw.
SelectionTrace online_partition(const ScoreMatrix& scores,
                                std::span<const int> seeds, CounterRng& rng);

/// Nested halving then a uniform draw from V_b. Throws BudgetNotDivisible
/// unless N is a multiple of 2^b.
SelectionTrace online_select(const ScoreMatrix& scores,
                             std::span<const int> seeds, CounterRng& rng);

std::pair<EmbeddedSentence, SelectionTrace> online_select(
    const CandidateSet& w, std::span<const int> seeds, const PivotSet& pivots,
    CounterRng& rng);

/// bit j = [score on channel j > 0].
std::vector<int> offline_signature(std::span<const double> channel_scores);
std::vector<int> offline_signature(const UnitVector& x, const PivotSet& pivots);

/// Number of channels whose signature bit equals the seed bit.
std::size_t offline_evidence(std::span<const int> signature,
                             std::span<const int> seeds);

/// Streaming form of the offline selector: candidates are offered one at a
/// time so sampling can stop as soon as one carries full evidence.
class OfflineSelector {
 public:
  explicit OfflineSelector(std::vector<int> seeds);

  /// Returns true when this candidate matches every seed bit; it is then the
  /// selection and later offers are ignored.
  bool offer(std::span<const double> channel_scores);
  /// Index of the chosen candidate (in offer order). Throws
  /// EmptyCandidateSet when nothing was offered.
  std::size_t finish(CounterRng& rng) const;

  std::size_t offered() const { return offered_; }
  std::size_t best_evidence() const { return best_; }
  bool complete() const { return full_.has_value(); }

 private:
  std::vector<int> seeds_;
  std::size_t offered_ = 0;
  std::size_t best_ = 0;
  std::vector<std::size_t> ties_;
  std::optional<std::size_t> full_;
};

std::size_t offline_select(const ScoreMatrix& scores, std::span<const int> seeds,
                           CounterRng& rng);
EmbeddedSentence offline_select(const CandidateSet& w, std::span<const int> seeds,
                                const PivotSet& pivots, CounterRng& rng);

}  // namespace pmark
