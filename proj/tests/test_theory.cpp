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

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "pmark/theory.hpp"
#include "test_util.hpp"

using namespace pmark;

namespace {

FiniteDistribution random_distribution(CounterRng& rng, std::size_t M) {
  std::vector<double> q(M);
  double total = 0.0;
  for (double& x : q) {
    x = 0.05 + rng.uniform();
    total += x;
  }
  for (double& x : q) x /= total;
  // Exact renormalization so the sum test inside the constructor passes.
  q.back() = 1.0 - std::accumulate(q.begin(), q.end() - 1, 0.0);
  return FiniteDistribution(q);
}

}  // namespace

TEST(FiniteDistribution, Validation) {
  EXPECT_EQ(code_of([] { FiniteDistribution({}); }), Errc::kEmptyInput);
  EXPECT_EQ(code_of([] { FiniteDistribution({0.5, 0.6}); }), Errc::kDomainError);
  EXPECT_EQ(code_of([] { FiniteDistribution({1.5, -0.5}); }), Errc::kDomainError);
  const FiniteDistribution q({0.25, 0.75});
  EXPECT_EQ(q.mass(2), 0.75);
  EXPECT_EQ(code_of([&] { q.mass(0); }), Errc::kDomainError);
  EXPECT_EQ(code_of([&] { q.mass(3); }), Errc::kDomainError);
}

TEST(GreenScaling, Examples) {
  const FiniteDistribution q({0.2, 0.3, 0.1, 0.4});
  const std::vector<std::size_t> s = {1, 2};  // q(S) = 0.5
  EXPECT_NEAR(green_scaling(q, s, 0.1, 1), 0.2, 1e-15);
  EXPECT_EQ(green_scaling(q, s, 0.1, 3), 0.0);
  const std::vector<std::size_t> all = {1, 2, 3, 4};
  EXPECT_NEAR(green_scaling(q, all, 0.1, 4), 0.1, 1e-15);
}

TEST(GreenScaling, ZeroGreenMass) {
  const FiniteDistribution q({0.0, 1.0});
  const std::vector<std::size_t> s = {1};
  EXPECT_EQ(code_of([&] { green_scaling(q, s, 0.1, 1); }), Errc::kZeroGreenMass);
  const GreenSpec spec{2, 1};
  EXPECT_EQ(code_of([&] { watermarked_pmf_factors(q, spec); }), Errc::kZeroGreenMass);
}

TEST(WatermarkedPmf, Examples) {
  EXPECT_NEAR(watermarked_pmf_factor(FiniteDistribution({0.3, 0.7}), {2, 1}, 1), 5.0 / 3.0,
              1e-12);
  EXPECT_NEAR(watermarked_pmf_factor(FiniteDistribution({0.2, 0.3, 0.5}), {3, 2}, 1),
              (1.0 / 0.5 + 1.0 / 0.7) / 3.0, 1e-12);
  EXPECT_NEAR(watermarked_pmf_factor(FiniteDistribution({0.2, 0.3, 0.5}), {3, 2}, 1), 1.142857,
              1e-6);
  const FiniteDistribution uniform({0.2, 0.2, 0.2, 0.2, 0.2});
  for (double a : watermarked_pmf_factors(uniform, {5, 3})) EXPECT_NEAR(a, 1.0, 1e-12);
}

TEST(WatermarkedPmf, MatchesBruteForceOracle) {
  CounterRng rng(11, StreamId{});
  for (int inst = 0; inst < 40; ++inst) {
    const std::size_t M = 2 + rng.next_u32() % 9;
    const std::size_t m = 1 + rng.next_u32() % M;
    const FiniteDistribution q = random_distribution(rng, M);
    const std::vector<double> qs(q.masses().begin(), q.masses().end());
    const auto expected = oracle::green_factors(qs, static_cast<int>(m));
    const auto got = watermarked_pmf_factors(q, {M, m});
    ASSERT_EQ(got.size(), M);
    for (std::size_t u = 0; u < M; ++u) EXPECT_NEAR(got[u], expected[u], 1e-10);
  }
}

TEST(WatermarkedPmf, NormalizesAndOrdersByMass) {
  CounterRng rng(12, StreamId{});
  for (int inst = 0; inst < 60; ++inst) {
    const std::size_t M = 2 + rng.next_u32() % 9;
    const std::size_t m = 1 + rng.next_u32() % (M - 1);
    const FiniteDistribution q = random_distribution(rng, M);
    const auto a = watermarked_pmf_factors(q, {M, m});
    double total = 0.0;
    for (std::size_t u = 0; u < M; ++u) total += q.masses()[u] * a[u];
    EXPECT_NEAR(total, 1.0, 1e-10);
    for (std::size_t u = 0; u < M; ++u) {
      for (std::size_t v = 0; v < M; ++v) {
        if (q.masses()[u] > q.masses()[v] + 1e-12) EXPECT_LT(a[u], a[v]);
      }
    }
  }
}

TEST(WatermarkedPmf, ShapeErrors) {
  const FiniteDistribution q({0.5, 0.5});
  EXPECT_EQ(code_of([&] { watermarked_pmf_factors(q, {3, 1}); }), Errc::kInvalidShape);
  EXPECT_EQ(code_of([&] { watermarked_pmf_factors(q, {2, 0}); }), Errc::kInvalidShape);
  EXPECT_EQ(code_of([&] { watermarked_pmf_factors(q, {2, 3}); }), Errc::kInvalidShape);
  const FiniteDistribution big(std::vector<double>(23, 1.0 / 23));
  EXPECT_EQ(code_of([&] { watermarked_pmf_factors(big, {23, 11}); }),
            Errc::kEnumerationTooLarge);
}

TEST(DistortionGap, Examples) {
  EXPECT_NEAR(distortion_gap(FiniteDistribution({0.3, 0.7}), {2, 1}), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(distortion_gap(FiniteDistribution({0.25, 0.25, 0.25, 0.25}), {4, 2}), 0.0,
              1e-12);
  CounterRng rng(13, StreamId{});
  for (int inst = 0; inst < 30; ++inst) {
    const std::size_t M = 2 + rng.next_u32() % 7;
    const FiniteDistribution q = random_distribution(rng, M);
    EXPECT_GT(distortion_gap(q, {M, 1 + rng.next_u32() % (M - 1)}), 0.0);
  }
}

TEST(SemstampMonteCarlo, ConvergesToClosedForm) {
  const FiniteDistribution q({0.3, 0.7});
  CounterRng rng(14, StreamId{});
  const auto mc = semstamp_monte_carlo(q, {2, 1}, 1'000'000, rng);
  EXPECT_EQ(mc.trials, 1'000'000u);
  EXPECT_NEAR(mc.a_hat[0], 5.0 / 3.0, 0.02);
  EXPECT_NEAR(mc.a_hat[1], 5.0 / 7.0, 0.02);
}

TEST(SemstampMonteCarlo, FullGreenSetIsExactlyOne) {
  const FiniteDistribution q({0.1, 0.2, 0.3, 0.4});
  CounterRng rng(15, StreamId{});
  const auto mc = semstamp_monte_carlo(q, {4, 4}, 50'000, rng);
  // The first draw is always green, so A-hat is 1 up to sampling noise.
  EXPECT_EQ(mc.exhausted, 0u);
  std::uint64_t total = 0;
  for (auto c : mc.counts) total += c;
  EXPECT_EQ(total, 50'000u);
  for (std::size_t u = 0; u < 4; ++u) {
    const double sd = std::sqrt(q.masses()[u] * (1 - q.masses()[u]) / 50'000) / q.masses()[u];
    EXPECT_NEAR(mc.a_hat[u], 1.0, 5 * sd);
  }
}

TEST(SemstampMonteCarlo, UniformWithinBand) {
  const FiniteDistribution q({0.25, 0.25, 0.25, 0.25});
  CounterRng rng(16, StreamId{});
  const std::uint64_t trials = 200'000;
  const auto mc = semstamp_monte_carlo(q, {4, 2}, trials, rng);
  for (double a : mc.a_hat) EXPECT_NEAR(a, 1.0, 3.0 / std::sqrt(double(trials)) * 2.0);
}

TEST(RobustnessBand, Examples) {
  const std::vector<double> scores = {-0.3, -0.1, 0.05, 0.19, 0.21, 0.9};
  EXPECT_NEAR(robustness_band_bound(scores, 0.0, 0.02), 3.0 / 6.0, 1e-15);  // half-width 0.2
  EXPECT_EQ(robustness_band_bound(scores, 0.05, 0.0), 1.0 / 6.0);
  EXPECT_EQ(robustness_band_bound(scores, 0.0, 2.0), 1.0);
  EXPECT_EQ(code_of([&] { robustness_band_bound(scores, 0.0, -1.0); }), Errc::kDomainError);
  EXPECT_EQ(code_of([] { robustness_band_bound({}, 0.0, 0.1); }), Errc::kEmptyInput);
}

TEST(SingleChannel, ExactAndMonteCarlo) {
  CounterRng rng(17, StreamId{});
  const auto two = single_channel_distortion_check(2, 100'000, rng);
  ASSERT_EQ(two.frequency.size(), 2u);
  EXPECT_NEAR(two.frequency[0], 0.5, 4 * std::sqrt(0.25 / 100'000));

  const std::uint64_t trials = 1'000'000;
  const auto eight = single_channel_distortion_check(8, trials, rng);
  EXPECT_LE(eight.max_deviation, 4 * std::sqrt((1.0 / 8) * (7.0 / 8) / trials));

  EXPECT_EQ(code_of([&] { single_channel_distortion_check(7, 10, rng); }), Errc::kOddSetSize);
  EXPECT_EQ(code_of([&] { single_channel_distortion_check(0, 10, rng); }), Errc::kOddSetSize);
}

TEST(ExactSelection, UniformOverCandidates) {
  CounterRng rng(18, StreamId{});
  for (std::size_t b : {1u, 2u, 3u}) {
    const std::size_t N = std::size_t{1} << (b + 1);
    std::vector<std::vector<double>> cols(b, std::vector<double>(N));
    for (auto& col : cols) {
      for (double& x : col) x = rng.gaussian();
    }
    const auto p = exact_selection_probabilities(cols);
    ASSERT_EQ(p.size(), N);
    for (double x : p) EXPECT_NEAR(x, 1.0 / double(N), 1e-12);
  }
  const std::vector<std::vector<double>> ties = {{0.1, 0.1, 0.2, 0.3}};
  EXPECT_EQ(code_of([&] { exact_selection_probabilities(ties); }), Errc::kDomainError);
}
