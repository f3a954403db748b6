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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "pmark/selection.hpp"
#include "pmark/theory.hpp"
#include "test_util.hpp"

using namespace pmark;

namespace {

ScoreMatrix column(std::vector<double> v) {
  ScoreMatrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m.at(i, 0) = v[i];
  return m;
}

std::vector<std::size_t> all_of(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace

TEST(HdMedian, SymmetricSamples) {
  const double a[] = {1.0, 2.0, 3.0};
  const double b[] = {0.0, 1.0};
  EXPECT_NEAR(hd_median(a), 2.0, 1e-14);
  EXPECT_NEAR(hd_median(b), 0.5, 1e-14);
}

TEST(HdMedian, SkewedFixtureAgainstBetaOracle) {
  const double x[] = {0.0, 0.0, 0.0, 10.0};
  const auto w = oracle::hd_weights(4);
  EXPECT_NEAR(hd_median(x), 10.0 * w[3], 1e-12);
  EXPECT_GT(hd_median(x), 0.0);
}

TEST(HdMedian, WeightsMatchOracle) {
  for (std::size_t n = 1; n <= 64; ++n) {
    const auto w = hd_median_weights(n);
    const auto ref = oracle::hd_weights(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(w[i], ref[i], 1e-12) << "n=" << n << " i=" << i;
      total += w[i];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(HdMedian, MonotoneAndTranslationEquivariant) {
  CounterRng rng(12, StreamId{});
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(2 + rng.below(40));
    for (double& x : v) x = rng.gaussian();
    const double base = hd_median(v);
    const double c = rng.gaussian() * 3.0;
    std::vector<double> shifted = v;
    for (double& x : shifted) x += c;
    EXPECT_NEAR(hd_median(shifted), base + c, 1e-12);
    std::vector<double> bumped = v;
    bumped[rng.below(v.size())] += std::abs(rng.gaussian());
    EXPECT_GE(hd_median(bumped), base - 1e-15);
  }
}

TEST(HdMedian, EmptyInput) {
  EXPECT_EQ(code_of([] { hd_median(std::span<const double>{}); }), Errc::kEmptyInput);
}

TEST(MedianPartition, StrictOrdering) {
  const std::vector<double> s = {-0.3, -0.1, 0.2, 0.4};
  CounterRng rng(1, StreamId{});
  const auto members = all_of(4);
  EXPECT_EQ(median_partition(members, s, 1, rng).kept, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(median_partition(members, s, 0, rng).kept, (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(median_partition(members, s, 0, rng).median, 0.05, 1e-15);
}

TEST(MedianPartition, TiesSplitEvenly) {
  const std::vector<double> s = {0.1, 0.1, 0.1, 0.1};
  CounterRng rng(2, StreamId{});
  const auto members = all_of(4);
  std::vector<int> hits(4, 0);
  const int runs = 20000;
  for (int i = 0; i < runs; ++i) {
    const auto kept = median_partition(members, s, 1, rng).kept;
    ASSERT_EQ(kept.size(), 2u);
    for (auto k : kept) ++hits[k];
  }
  for (int h : hits) EXPECT_NEAR(static_cast<double>(h) / runs, 0.5, 0.02);
}

TEST(MedianPartition, Errors) {
  const std::vector<double> s = {1, 2, 3};
  CounterRng rng(3, StreamId{});
  const auto odd = all_of(3);
  EXPECT_EQ(code_of([&] { median_partition(odd, s, 1, rng); }), Errc::kOddSetSize);
  EXPECT_EQ(code_of([&] { median_partition(std::span<const std::size_t>{}, s, 1, rng); }),
            Errc::kEmptyCandidateSet);
}

TEST(OnlineSelect, SingleChannelPairPicksHigher) {
  CounterRng rng(4, StreamId{});
  const int seeds[] = {1};
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(online_select(column({0.2, -0.4}), seeds, rng).pick, 0u);
  }
}

TEST(OnlineSelect, LeafSetsPartitionTheCandidates) {
  CounterRng rng(5, StreamId{});
  for (std::size_t b = 1; b <= 3; ++b) {
    const std::size_t n = 16;
    ScoreMatrix m(n, b);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < b; ++j) m.at(i, j) = rng.gaussian();
    }
    std::multiset<std::size_t> seen;
    for (std::size_t code = 0; code < (std::size_t{1} << b); ++code) {
      std::vector<int> seeds(b);
      for (std::size_t j = 0; j < b; ++j) seeds[j] = static_cast<int>(code >> j & 1U);
      const auto trace = online_partition(m, seeds, rng);
      EXPECT_EQ(trace.survivors.size(), n >> b);
      seen.insert(trace.survivors.begin(), trace.survivors.end());
    }
    EXPECT_EQ(seen.size(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(seen.count(i), 1u);
  }
}

TEST(OnlineSelect, EnumerationGivesOneOverN) {
  const std::vector<std::vector<double>> scores = {{0.3, -0.2, 0.9, 0.1},
                                                   {-0.5, 0.4, 0.2, 0.7}};
  for (double p : exact_selection_probabilities(scores)) EXPECT_NEAR(p, 0.25, 1e-15);
}

TEST(OnlineSelect, TraceShapeAtDefaults) {
  CounterRng rng(6, StreamId{});
  const PivotSet p = generate_pivots(MasterKey{9, 32, 4});
  std::vector<UnitVector> cands;
  for (int i = 0; i < 64; ++i) cands.push_back(sample_sphere(rng, 32));
  const ScoreMatrix m = ScoreMatrix::from_embeddings(cands, p);
  const int seeds[] = {1, 0, 0, 1};
  const auto trace = online_select(m, seeds, rng);
  EXPECT_EQ(trace.survivors.size(), 4u);
  ASSERT_EQ(trace.channels.size(), 4u);
  std::size_t expect = 64;
  for (const auto& step : trace.channels) {
    EXPECT_EQ(step.size_before, expect);
    expect /= 2;
    EXPECT_EQ(step.size_after, expect);
  }
  EXPECT_NE(std::find(trace.survivors.begin(), trace.survivors.end(), trace.pick),
            trace.survivors.end());
  // Every survivor sits on its seeded side of each channel's split point.
  for (std::size_t j = 0; j < 4; ++j) {
    for (auto i : trace.survivors) {
      if (seeds[j] == 1) {
        EXPECT_GE(m.at(i, j), trace.channels[j].median);
      } else {
        EXPECT_LE(m.at(i, j), trace.channels[j].median);
      }
    }
  }
}

TEST(OnlineSelect, BudgetNotDivisible) {
  CounterRng rng(7, StreamId{});
  ScoreMatrix m(60, 4);
  const int seeds[] = {1, 1, 1, 1};
  EXPECT_EQ(code_of([&] { online_select(m, seeds, rng); }), Errc::kBudgetNotDivisible);
}

TEST(OfflineSignature, HandCases) {
  const PivotSet p = generate_pivots(MasterKey{21, 8, 2});
  // <p0, p1> is zero only up to rounding, so test channel 0 alone here.
  EXPECT_EQ(offline_signature(p[0], p)[0], 1);
  EXPECT_EQ(offline_signature(std::vector<double>{0.3, -0.2}), (std::vector<int>{1, 0}));
  EXPECT_EQ(offline_signature(-p[0], p)[0], 0);
  std::vector<double> mid(8);
  for (std::size_t i = 0; i < 8; ++i) mid[i] = (p[0][i] + p[1][i]) / std::sqrt(2.0);
  EXPECT_EQ(offline_signature(UnitVector::normalize(mid), p), (std::vector<int>{1, 1}));
  const double zero[] = {0.0, 0.0};
  EXPECT_EQ(offline_signature(zero), (std::vector<int>{0, 0}));
}

TEST(OfflineSelect, PrefersFullEvidence) {
  CounterRng rng(8, StreamId{});
  ScoreMatrix m(3, 2);
  m.at(0, 0) = 0.5;  m.at(0, 1) = -0.5;  // [1,0]
  m.at(1, 0) = -0.5; m.at(1, 1) = 0.5;   // [0,1]
  m.at(2, 0) = 0.5;  m.at(2, 1) = 0.5;   // [1,1]
  const int seeds[] = {1, 1};
  EXPECT_EQ(offline_select(m, seeds, rng), 2u);
}

TEST(OfflineSelect, AllTiedIsUniform) {
  CounterRng rng(9, StreamId{});
  ScoreMatrix m(4, 1);
  for (std::size_t i = 0; i < 4; ++i) m.at(i, 0) = -0.1 * (i + 1);
  const int seeds[] = {1};
  std::vector<int> hits(4, 0);
  const int runs = 20000;
  for (int i = 0; i < runs; ++i) ++hits[offline_select(m, seeds, rng)];
  for (int h : hits) EXPECT_NEAR(h / double(runs), 0.25, 0.02);
}

TEST(OfflineSelect, NeverBelowMaximumEvidence) {
  CounterRng rng(10, StreamId{});
  for (int trial = 0; trial < 200; ++trial) {
    ScoreMatrix m(16, 4);
    for (std::size_t i = 0; i < 16; ++i) {
      for (std::size_t j = 0; j < 4; ++j) m.at(i, j) = rng.gaussian();
    }
    std::vector<int> seeds(4);
    for (int& s : seeds) s = rng.bit();
    std::size_t best = 0;
    for (std::size_t i = 0; i < 16; ++i) {
      best = std::max(best, offline_evidence(offline_signature(m.row(i)), seeds));
    }
    const auto pick = offline_select(m, seeds, rng);
    EXPECT_EQ(offline_evidence(offline_signature(m.row(pick)), seeds), best);
  }
}

TEST(OfflineSelector, StopsAtFullEvidence) {
  OfflineSelector sel({1, 0});
  const double a[] = {0.2, 0.3};
  const double b[] = {0.2, -0.3};
  const double c[] = {0.4, -0.1};
  EXPECT_FALSE(sel.offer(a));
  EXPECT_TRUE(sel.offer(b));
  EXPECT_TRUE(sel.complete());
  sel.offer(c);
  CounterRng rng(11, StreamId{});
  EXPECT_EQ(sel.finish(rng), 1u);
  EXPECT_EQ(sel.best_evidence(), 2u);
}

TEST(OfflineSelector, EmptyIsAnError) {
  OfflineSelector sel({1});
  CounterRng rng(12, StreamId{});
  EXPECT_EQ(code_of([&] { sel.finish(rng); }), Errc::kEmptyCandidateSet);
}

TEST(ChannelSeeds, DeterministicAndBalanced) {
  const MasterKey key{123, 16, 4};
  const auto a = ChannelSeeds::from_key(key);
  const auto b = ChannelSeeds::from_key(key);
  int ones = 0;
  const int T = 5000;
  for (std::size_t t = 1; t <= T; ++t) {
    for (std::size_t j = 0; j < 4; ++j) {
      ASSERT_EQ(a.bit(t, j), b.bit(t, j));
      ones += a.bit(t, j);
    }
  }
  EXPECT_NEAR(ones / (4.0 * T), 0.5, 4.0 * 0.5 / std::sqrt(4.0 * T));
}

TEST(ChannelSeeds, TableCoverage) {
  const auto s = ChannelSeeds::from_table({{1, 0}, {0, 1}});
  EXPECT_EQ(s.bit(2, 1), 1);
  EXPECT_EQ(code_of([&] { s.bit(3, 0); }), Errc::kSeedCoverage);
  EXPECT_EQ(code_of([&] { s.bit(1, 2); }), Errc::kSeedCoverage);
}

TEST(NullCalibration, SignatureMatchesSeedHalfTheTime) {
  CounterRng rng(13, StreamId{});
  int match = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const MasterKey key{rng.next_u64(), 16, 1};
    const PivotSet p = generate_pivots(key);
    const auto sig = offline_signature(sample_sphere(rng, 16), p);
    match += sig[0] == ChannelSeeds::from_key(key).bit(1, 0) ? 1 : 0;
  }
  EXPECT_NEAR(match / double(n), 0.5, 4.0 * 0.5 / std::sqrt(n));
}
