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
#include <span>
#include <vector>

#include "pmark/random.hpp"

namespace pmark {

/// Natural masses q(u) over a finite proxy range U = {1, ..., M}.
class FiniteDistribution {
 public:
  /// Throws DomainError unless every mass is >= 0 and they sum to 1
  /// within 1e-12.
  explicit FiniteDistribution(std::vector<double> masses);

  std::size_t size() const { return q_.size(); }
  /// Mass of value u, 1-based.
  double mass(std::size_t u) const;
  std::span<const double> masses() const { return q_; }

 private:
  std::vector<double> q_;
};

/// Green sets are the size-m subsets of U, |U| = M.
struct GreenSpec {
  std::size_t M = 0;
  std::size_t m = 0;
};

/// Output law of a rejection sampler that keeps drawing until the proxy
/// value lands in S: P(s) / q(S) inside S, zero outside. `green` holds
/// 1-based values. Throws ZeroGreenMass when q(S) = 0.
double green_scaling(const FiniteDistribution& q, std::span<const std::size_t> green,
                     double sentence_mass, std::size_t u);

inline constexpr std::size_t kMaxEnumerableRange = 22;

/// A(u) = C(M,m)^-1 * sum over size-m subsets S containing u of 1/q(S), for
/// every u (index u-1). The watermarked PMF of s is P(s) * A(F(s)).
std::vector<double> watermarked_pmf_factors(const FiniteDistribution& q,
                                            const GreenSpec& spec);
double watermarked_pmf_factor(const FiniteDistribution& q, const GreenSpec& spec,
                              std::size_t u);

/// max_u |A(u) - 1|; zero exactly when q is uniform.
double distortion_gap(const FiniteDistribution& q, const GreenSpec& spec);

struct GreenMonteCarlo {
  std::vector<double> a_hat;          // freq(u) / q(u); 0 where q(u) = 0
  std::vector<std::uint64_t> counts;  // selections per value
  std::uint64_t trials = 0;
  std::uint64_t exhausted = 0;        // trials that hit the draw cap
};

/// Simulates the sample-then-select process: draw a green set uniformly,
/// draw proxy values from q until one is green (at most `max_draws`), and
/// count which value was emitted.
GreenMonteCarlo semstamp_monte_carlo(const FiniteDistribution& q,
                                     const GreenSpec& spec, std::uint64_t trials,
                                     CounterRng& rng,
                                     std::uint64_t max_draws = 1'000'000);

/// Fraction of `scores` inside [m_v - sqrt(2d), m_v + sqrt(2d)].
double robustness_band_bound(std::span<const double> scores, double m_v, double d);

struct SingleChannelCheck {
  std::vector<double> frequency;
  double max_deviation = 0.0;
};

/// Repeats the single-channel median sampler on N fixed candidates with
/// distinct scores and a fresh uniform seed bit per trial.
SingleChannelCheck single_channel_distortion_check(std::size_t N,
                                                   std::uint64_t trials,
                                                   CounterRng& rng);

/// Exact selection probability of each of the candidates under the
/// multi-channel sampler: averages over all 2^b seed vectors and the final
/// uniform draw. Scores must be distinct on every channel.
std::vector<double> exact_selection_probabilities(
    std::span<const std::vector<double>> channel_scores);

}  // namespace pmark
