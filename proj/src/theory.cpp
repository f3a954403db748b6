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

#include "pmark/theory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "pmark/errors.hpp"
#include "pmark/selection.hpp"

namespace pmark {

FiniteDistribution::FiniteDistribution(std::vector<double> masses)
    : q_(std::move(masses)) {
  if (q_.empty()) fail(Errc::kEmptyInput, "distribution has no support");
  double total = 0.0;
  for (double x : q_) {
    if (!(x >= 0.0)) fail(Errc::kDomainError, "negative probability mass");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    fail(Errc::kDomainError, "masses do not sum to one");
  }
}

double FiniteDistribution::mass(std::size_t u) const {
  if (u < 1 || u > q_.size()) fail(Errc::kDomainError, "value outside range U");
  return q_[u - 1];
}

double green_scaling(const FiniteDistribution& q, std::span<const std::size_t> green,
                     double sentence_mass, std::size_t u) {
  double q_green = 0.0;
  bool inside = false;
  std::vector<bool> seen(q.size() + 1, false);
  for (std::size_t v : green) {
    if (v < 1 || v > q.size()) fail(Errc::kDomainError, "green value outside U");
    if (seen[v]) continue;
    seen[v] = true;
    q_green += q.mass(v);
    inside = inside || v == u;
  }
  if (!(q_green > 0.0)) fail(Errc::kZeroGreenMass, "green set has zero mass");
  return inside ? sentence_mass / q_green : 0.0;
}

namespace {

void check_spec(const FiniteDistribution& q, const GreenSpec& spec) {
  if (spec.M != q.size()) fail(Errc::kInvalidShape, "GreenSpec M differs from |U|");
  if (spec.m < 1 || spec.m > spec.M) {
    fail(Errc::kInvalidShape, "green size must satisfy 1 <= m <= M");
  }
}

}  // namespace

std::vector<double> watermarked_pmf_factors(const FiniteDistribution& q,
                                            const GreenSpec& spec) {
  check_spec(q, spec);
  if (spec.M > kMaxEnumerableRange) {
    fail(Errc::kEnumerationTooLarge, "subset enumeration is capped at M = 22");
  }
  const std::size_t M = spec.M;
  std::vector<double> sum(M, 0.0);
  std::uint64_t subsets = 0;
  // Gosper's hack walks every M-bit mask with exactly m bits set.
  std::uint64_t mask = (std::uint64_t{1} << spec.m) - 1;
  const std::uint64_t limit = std::uint64_t{1} << M;
  while (mask < limit) {
    double q_green = 0.0;
    for (std::uint64_t rest = mask; rest != 0; rest &= rest - 1) {
      q_green += q.masses()[static_cast<std::size_t>(std::countr_zero(rest))];
    }
    if (!(q_green > 0.0)) fail(Errc::kZeroGreenMass, "a green set has zero mass");
    const double inv = 1.0 / q_green;
    for (std::uint64_t rest = mask; rest != 0; rest &= rest - 1) {
      sum[static_cast<std::size_t>(std::countr_zero(rest))] += inv;
    }
    ++subsets;
    const std::uint64_t c = mask & (~mask + 1);
    const std::uint64_t r = mask + c;
    mask = (((r ^ mask) >> 2) / c) | r;
  }
  for (double& s : sum) s /= static_cast<double>(subsets);
  return sum;
}

double watermarked_pmf_factor(const FiniteDistribution& q, const GreenSpec& spec,
                              std::size_t u) {
  if (u < 1 || u > q.size()) fail(Errc::kDomainError, "value outside range U");
  return watermarked_pmf_factors(q, spec)[u - 1];
}

double distortion_gap(const FiniteDistribution& q, const GreenSpec& spec) {
  double gap = 0.0;
  for (double a : watermarked_pmf_factors(q, spec)) gap = std::max(gap, std::abs(a - 1.0));
  return gap;
}

GreenMonteCarlo semstamp_monte_carlo(const FiniteDistribution& q,
                                     const GreenSpec& spec, std::uint64_t trials,
                                     CounterRng& rng, std::uint64_t max_draws) {
  check_spec(q, spec);
  const std::size_t M = spec.M;
  std::vector<double> cdf(M);
  std::partial_sum(q.masses().begin(), q.masses().end(), cdf.begin());

  GreenMonteCarlo out;
  out.counts.assign(M, 0);
  out.trials = trials;
  std::vector<std::size_t> perm(M);
  std::vector<char> green(M);
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::fill(green.begin(), green.end(), 0);
    for (std::size_t i = 0; i < spec.m; ++i) {
      std::swap(perm[i], perm[i + rng.below(M - i)]);
      green[perm[i]] = 1;
    }
    bool emitted = false;
    for (std::uint64_t draw = 0; draw < max_draws; ++draw) {
      const double u = rng.uniform() * cdf.back();
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      std::size_t value = static_cast<std::size_t>(it - cdf.begin());
      if (value >= M) value = M - 1;
      if (green[value]) {
        ++out.counts[value];
        emitted = true;
        break;
      }
    }
    if (!emitted) ++out.exhausted;
  }
  const double accepted = static_cast<double>(trials - out.exhausted);
  out.a_hat.assign(M, 0.0);
  for (std::size_t v = 0; v < M; ++v) {
    if (q.masses()[v] > 0.0 && accepted > 0.0) {
      out.a_hat[v] = static_cast<double>(out.counts[v]) / accepted / q.masses()[v];
    }
  }
  return out;
}

double robustness_band_bound(std::span<const double> scores, double m_v, double d) {
  if (!(d >= 0.0)) fail(Errc::kDomainError, "distance budget must be >= 0");
  if (scores.empty()) fail(Errc::kEmptyInput, "no score samples");
  const double half_width = std::sqrt(2.0 * d);
  std::size_t inside = 0;
  for (double s : scores) {
    if (s >= m_v - half_width && s <= m_v + half_width) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(scores.size());
}

SingleChannelCheck single_channel_distortion_check(std::size_t N,
                                                   std::uint64_t trials,
                                                   CounterRng& rng) {
  if (N == 0 || N % 2 != 0) fail(Errc::kOddSetSize, "N must be a positive even number");
  if (trials == 0) fail(Errc::kEmptyInput, "need at least one trial");
  // Distinct fixed scores; their values are irrelevant to the guarantee.
  std::vector<double> scores(N);
  for (std::size_t i = 0; i < N; ++i) {
    scores[i] = std::sin(static_cast<double>(3 * i + 1));
  }
  std::vector<std::size_t> all(N);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const PartitionResult lower = median_partition(all, scores, 0, rng);
  const PartitionResult upper = median_partition(all, scores, 1, rng);

  std::vector<std::uint64_t> hits(N, 0);
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    const auto& half = rng.bit() ? upper.kept : lower.kept;
    ++hits[half[rng.below(half.size())]];
  }
  SingleChannelCheck out;
  out.frequency.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    out.frequency[i] = static_cast<double>(hits[i]) / static_cast<double>(trials);
    out.max_deviation = std::max(
        out.max_deviation, std::abs(out.frequency[i] - 1.0 / static_cast<double>(N)));
  }
  return out;
}

std::vector<double> exact_selection_probabilities(
    std::span<const std::vector<double>> channel_scores) {
  const std::size_t b = channel_scores.size();
  if (b == 0) fail(Errc::kEmptyInput, "need at least one channel");
  const std::size_t N = channel_scores.front().size();
  ScoreMatrix scores(N, b);
  for (std::size_t j = 0; j < b; ++j) {
    if (channel_scores[j].size() != N) fail(Errc::kInvalidShape, "ragged score table");
    std::vector<double> sorted = channel_scores[j];
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      fail(Errc::kDomainError, "exact enumeration needs distinct scores");
    }
    for (std::size_t i = 0; i < N; ++i) scores.at(i, j) = channel_scores[j][i];
  }
  // Distinct scores make the partition deterministic; the rng is unused.
  CounterRng unused(0, StreamId{});
  std::vector<double> prob(N, 0.0);
  const std::size_t vectors = std::size_t{1} << b;
  std::vector<int> seeds(b);
  for (std::size_t code = 0; code < vectors; ++code) {
    for (std::size_t j = 0; j < b; ++j) seeds[j] = static_cast<int>((code >> j) & 1U);
    const SelectionTrace trace = online_partition(scores, seeds, unused);
    const double share = 1.0 / static_cast<double>(vectors) /
                         static_cast<double>(trace.survivors.size());
    for (std::size_t i : trace.survivors) prob[i] += share;
  }
  return prob;
}

}  // namespace pmark
