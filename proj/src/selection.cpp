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

#include "pmark/selection.hpp"

#include <algorithm>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "pmark/errors.hpp"

namespace pmark {

ScoreMatrix ScoreMatrix::from_embeddings(std::span<const UnitVector> embeddings,
                                         const PivotSet& pivots) {
  ScoreMatrix m(embeddings.size(), pivots.channel_count());
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    for (std::size_t j = 0; j < pivots.channel_count(); ++j) {
      m.at(i, j) = pivot_proxy(embeddings[i], pivots, j);
    }
  }
  return m;
}

std::vector<double> ScoreMatrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = at(i, j);
  return out;
}

ScoreMatrix CandidateSet::score(const PivotSet& pivots) const {
  ScoreMatrix m(candidates.size(), pivots.channel_count());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t j = 0; j < pivots.channel_count(); ++j) {
      m.at(i, j) = pivot_proxy(candidates[i].embedding, pivots, j);
    }
  }
  return m;
}

ChannelSeeds ChannelSeeds::from_key(const MasterKey& key) {
  ChannelSeeds s;
  s.seed_ = key.seed;
  s.channels_ = key.channels;
  s.derived_ = true;
  return s;
}

ChannelSeeds ChannelSeeds::from_table(std::vector<std::vector<int>> rows) {
  ChannelSeeds s;
  s.derived_ = false;
  s.channels_ = rows.empty() ? 0 : rows.front().size();
  for (const auto& row : rows) {
    if (row.size() != s.channels_) {
      fail(Errc::kSeedCoverage, "seed table rows have different widths");
    }
    for (int b : row) {
      if (b != 0 && b != 1) fail(Errc::kDomainError, "seed bits must be 0 or 1");
    }
  }
  s.table_ = std::move(rows);
  return s;
}

int ChannelSeeds::bit(std::size_t t, std::size_t channel) const {
  if (t == 0 || channel >= channels_) {
    fail(Errc::kSeedCoverage, "no seed for (t=" + std::to_string(t) +
                                  ", channel=" + std::to_string(channel) + ")");
  }
  if (!derived_) {
    if (t > table_.size()) {
      fail(Errc::kSeedCoverage, "seed table has no row for t=" + std::to_string(t));
    }
    return table_[t - 1][channel];
  }
  CounterRng rng(seed_, StreamId{stream_domain::kChannelSeeds,
                                 static_cast<std::uint32_t>(t),
                                 static_cast<std::uint32_t>(channel + 1)});
  return static_cast<int>(rng.next_u32() & 1U);
}

std::vector<int> ChannelSeeds::step(std::size_t t) const {
  std::vector<int> out(channels_);
  for (std::size_t j = 0; j < channels_; ++j) out[j] = bit(t, j);
  return out;
}

std::vector<double> hd_median_weights(std::size_t n) {
  if (n == 0) fail(Errc::kEmptyInput, "Harrell-Davis weights need n >= 1");
  const double a = (static_cast<double>(n) + 1.0) / 2.0;
  std::vector<double> w(n);
  double prev = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = i == n ? 1.0 : static_cast<double>(i) / static_cast<double>(n);
    const double cur = boost::math::ibeta(a, a, x);
    w[i - 1] = cur - prev;
    prev = cur;
  }
  return w;
}

double hd_median(std::span<const double> values) {
  if (values.empty()) fail(Errc::kEmptyInput, "median of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  // Detection asks for the same sample size over and over.
  thread_local std::vector<double> w;
  if (w.size() != sorted.size()) w = hd_median_weights(sorted.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) sum += w[i] * sorted[i];
  return sum;
}

PartitionResult median_partition(std::span<const std::size_t> members,
                                 std::span<const double> scores, int side,
                                 CounterRng& rng) {
  const std::size_t n = members.size();
  if (n == 0) fail(Errc::kEmptyCandidateSet, "cannot partition an empty set");
  if (n % 2 != 0) {
    fail(Errc::kOddSetSize, "median partition needs an even set, got " +
                                std::to_string(n));
  }
  if (side != 0 && side != 1) fail(Errc::kDomainError, "side must be 0 or 1");

  std::vector<std::size_t> order(members.begin(), members.end());
  for (std::size_t idx : order) {
    if (idx >= scores.size()) fail(Errc::kInvalidShape, "member index out of range");
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b] || (scores[a] == scores[b] && a < b);
  });

  const std::size_t half = n / 2;
  const double lo = scores[order[half - 1]];
  const double hi = scores[order[half]];
  PartitionResult out;
  out.median = 0.5 * (lo + hi);

  if (lo < hi) {
    if (side == 1) {
      out.kept.assign(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
    } else {
      out.kept.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
    }
  } else {
    std::vector<std::size_t> greater, less, tied;
    for (std::size_t idx : order) {
      if (scores[idx] > hi) {
        greater.push_back(idx);
      } else if (scores[idx] < hi) {
        less.push_back(idx);
      } else {
        tied.push_back(idx);
      }
    }
    for (std::size_t i = tied.size(); i > 1; --i) {
      std::swap(tied[i - 1], tied[rng.below(i)]);
    }
    const std::size_t to_upper = half - greater.size();
    const auto split = tied.begin() + static_cast<std::ptrdiff_t>(to_upper);
    if (side == 1) {
      out.kept = std::move(greater);
      out.kept.insert(out.kept.end(), tied.begin(), split);
    } else {
      out.kept = std::move(less);
      out.kept.insert(out.kept.end(), split, tied.end());
    }
  }
  std::sort(out.kept.begin(), out.kept.end());
  return out;
}

namespace {

void check_online_budget(const ScoreMatrix& scores, std::span<const int> seeds) {
  const std::size_t b = scores.cols();
  if (seeds.size() != b) {
    fail(Errc::kSeedCoverage, "need one seed bit per channel");
  }
  if (b >= 63) fail(Errc::kInvalidShape, "too many channels");
  const std::size_t leaves = std::size_t{1} << b;
  if (scores.rows() == 0 || scores.rows() % leaves != 0) {
    fail(Errc::kBudgetNotDivisible,
         "sample budget " + std::to_string(scores.rows()) +
             " is not divisible by 2^b = " + std::to_string(leaves));
  }
}

}  // namespace

SelectionTrace online_partition(const ScoreMatrix& scores,
                                std::span<const int> seeds, CounterRng& rng) {
  check_online_budget(scores, seeds);
  SelectionTrace trace;
  std::vector<std::size_t> members(scores.rows());
  std::iota(members.begin(), members.end(), std::size_t{0});
  for (std::size_t j = 0; j < scores.cols(); ++j) {
    const std::vector<double> column = scores.column(j);
    PartitionResult part = median_partition(members, column, seeds[j], rng);
    trace.channels.push_back(
        {seeds[j], part.median, members.size(), part.kept.size()});
    members = std::move(part.kept);
  }
  trace.survivors = std::move(members);
  return trace;
}

SelectionTrace online_select(const ScoreMatrix& scores,
                             std::span<const int> seeds, CounterRng& rng) {
  SelectionTrace trace = online_partition(scores, seeds, rng);
  trace.pick = trace.survivors[rng.below(trace.survivors.size())];
  return trace;
}

std::pair<EmbeddedSentence, SelectionTrace> online_select(
    const CandidateSet& w, std::span<const int> seeds, const PivotSet& pivots,
    CounterRng& rng) {
  SelectionTrace trace = online_select(w.score(pivots), seeds, rng);
  return {w.candidates[trace.pick], std::move(trace)};
}

std::vector<int> offline_signature(std::span<const double> channel_scores) {
  std::vector<int> sig(channel_scores.size());
  for (std::size_t j = 0; j < sig.size(); ++j) sig[j] = channel_scores[j] > 0.0 ? 1 : 0;
  return sig;
}

std::vector<int> offline_signature(const UnitVector& x, const PivotSet& pivots) {
  std::vector<double> scores(pivots.channel_count());
  for (std::size_t j = 0; j < scores.size(); ++j) scores[j] = pivot_proxy(x, pivots, j);
  return offline_signature(scores);
}

std::size_t offline_evidence(std::span<const int> signature,
                             std::span<const int> seeds) {
  if (signature.size() != seeds.size()) {
    fail(Errc::kSeedCoverage, "signature and seed widths differ");
  }
  std::size_t e = 0;
  for (std::size_t j = 0; j < seeds.size(); ++j) e += signature[j] == seeds[j] ? 1 : 0;
  return e;
}

OfflineSelector::OfflineSelector(std::vector<int> seeds) : seeds_(std::move(seeds)) {}

bool OfflineSelector::offer(std::span<const double> channel_scores) {
  if (full_) return true;
  const std::size_t index = offered_++;
  const std::size_t e = offline_evidence(offline_signature(channel_scores), seeds_);
  if (e == seeds_.size()) {
    full_ = index;
    best_ = e;
    return true;
  }
  if (ties_.empty() || e > best_) {
    best_ = e;
    ties_.assign(1, index);
  } else if (e == best_) {
    ties_.push_back(index);
  }
  return false;
}

std::size_t OfflineSelector::finish(CounterRng& rng) const {
  if (full_) return *full_;
  if (ties_.empty()) fail(Errc::kEmptyCandidateSet, "no candidates were offered");
  return ties_[rng.below(ties_.size())];
}

std::size_t offline_select(const ScoreMatrix& scores, std::span<const int> seeds,
                           CounterRng& rng) {
  if (scores.rows() == 0) fail(Errc::kEmptyCandidateSet, "no candidates");
  OfflineSelector selector(std::vector<int>(seeds.begin(), seeds.end()));
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    if (selector.offer(scores.row(i))) break;
  }
  return selector.finish(rng);
}

EmbeddedSentence offline_select(const CandidateSet& w, std::span<const int> seeds,
                                const PivotSet& pivots, CounterRng& rng) {
  return w.candidates[offline_select(w.score(pivots), seeds, rng)];
}

}  // namespace pmark
