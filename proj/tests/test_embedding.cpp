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
#include <cstring>
#include <numbers>

#include "oracles.hpp"
#include "pmark/embedding.hpp"
#include "pmark/errors.hpp"
#include "test_util.hpp"

using namespace pmark;


TEST(UnitVector, NormalizesThreeFourFive) {
  const double v[] = {3.0, 4.0};
  const auto u = UnitVector::normalize(v);
  EXPECT_DOUBLE_EQ(u[0], 0.6);
  EXPECT_DOUBLE_EQ(u[1], 0.8);
}

TEST(UnitVector, AlreadyUnitIsUnchanged) {
  const double v[] = {1.0, 0.0, 0.0};
  const auto u = UnitVector::normalize(v);
  EXPECT_EQ(u[0], 1.0);
  EXPECT_EQ(u[1], 0.0);
  EXPECT_EQ(u[2], 0.0);
}

TEST(UnitVector, ZeroVectorRejected) {
  const double v[] = {0.0, 0.0};
  EXPECT_EQ(code_of([&] { UnitVector::normalize(v); }), Errc::kZeroVector);
  const double tiny[] = {1e-13, 0.0};
  EXPECT_EQ(code_of([&] { UnitVector::normalize(tiny); }), Errc::kZeroVector);
}

TEST(UnitVector, DimensionOneRejected) {
  const double v[] = {2.0};
  EXPECT_EQ(code_of([&] { UnitVector::normalize(v); }), Errc::kInvalidShape);
}

TEST(Cosine, HandValues) {
  const auto e1 = UnitVector::from_unit({1.0, 0.0});
  const auto e2 = UnitVector::from_unit({0.0, 1.0});
  const auto w = UnitVector::from_unit({0.6, 0.8});
  EXPECT_DOUBLE_EQ(cosine(e1, e1), 1.0);
  EXPECT_DOUBLE_EQ(cosine(e1, e2), 0.0);
  EXPECT_DOUBLE_EQ(cosine(w, e1), 0.6);
}

TEST(Cosine, DimMismatch) {
  const auto a = UnitVector::from_unit({1.0, 0.0});
  const auto b = UnitVector::from_unit({1.0, 0.0, 0.0});
  EXPECT_EQ(code_of([&] { cosine(a, b); }), Errc::kDimMismatch);
}

TEST(Pivots, TwoByTwoOrthonormal) {
  const PivotSet p = generate_pivots(MasterKey{11, 2, 2});
  EXPECT_NEAR(cosine(p[0], p[0]), 1.0, 1e-12);
  EXPECT_NEAR(cosine(p[1], p[1]), 1.0, 1e-12);
  EXPECT_NEAR(cosine(p[0], p[1]), 0.0, 1e-12);
}

TEST(Pivots, GramMatrixAtEncoderScale) {
  const PivotSet p = generate_pivots(MasterKey{2026, 768, 4});
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(l2_norm(p[i].components()), 1.0, kUnitNormTolerance);
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_NEAR(dot(p[i].components(), p[j].components()), i == j ? 1.0 : 0.0, 1e-8);
    }
  }
}

TEST(Pivots, BitIdenticalOnRegeneration) {
  const MasterKey key{77, 64, 5};
  const PivotSet a = generate_pivots(key);
  const PivotSet b = generate_pivots(key);
  for (std::size_t j = 0; j < 5; ++j) {
    const auto x = a[j].components();
    const auto y = b[j].components();
    ASSERT_EQ(0, std::memcmp(x.data(), y.data(), x.size() * sizeof(double)));
  }
}

TEST(Pivots, DifferentSeedsDifferentPivots) {
  const PivotSet a = generate_pivots(MasterKey{1, 32, 2});
  const PivotSet b = generate_pivots(MasterKey{2, 32, 2});
  EXPECT_FALSE(a[0] == b[0]);
}

TEST(Pivots, MatchIndependentGramSchmidt) {
  // With a positive R diagonal the thin QR is unique, so Gram-Schmidt on the
  // same Gaussian matrix must land on the same columns.
  const MasterKey key{31337, 50, 6};
  const Matrix a = pivot_source_matrix(key);
  const auto q = oracle::gram_schmidt(a.data, a.rows, a.cols);
  const PivotSet p = generate_pivots(key);
  for (std::size_t j = 0; j < key.channels; ++j) {
    for (std::size_t i = 0; i < key.dim; ++i) EXPECT_NEAR(p[j][i], q[j][i], 1e-10);
  }
}

TEST(Pivots, QrReconstructsInput) {
  const MasterKey key{5, 20, 4};
  const Matrix a = pivot_source_matrix(key);
  const ThinQr qr = householder_qr(a);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) s += qr.q(i, k) * qr.r(k, j);
      EXPECT_NEAR(s, a(i, j), 1e-12);
    }
  }
  for (std::size_t k = 0; k < a.cols; ++k) {
    EXPECT_GE(qr.r(k, k), 0.0);
    for (std::size_t i = k + 1; i < a.cols; ++i) EXPECT_EQ(qr.r(i, k), 0.0);
  }
}

TEST(Pivots, ShapeErrors) {
  EXPECT_EQ(code_of([] { generate_pivots(MasterKey{1, 3, 4}); }), Errc::kInvalidShape);
  EXPECT_EQ(code_of([] { generate_pivots(MasterKey{1, 8, 0}); }), Errc::kInvalidShape);
  EXPECT_EQ(code_of([] { generate_pivots(MasterKey{1, 1, 1}); }), Errc::kInvalidShape);
}

TEST(AngleDensity, ClosedFormPoints) {
  for (double theta : {0.0, 0.3, 1.0, 2.5, std::numbers::pi}) {
    EXPECT_NEAR(angle_density(theta, 2), 1.0 / std::numbers::pi, 1e-14);
  }
  EXPECT_NEAR(angle_density(std::numbers::pi / 2, 3), 0.5, 1e-14);
  for (int d : {3, 10, 768}) EXPECT_EQ(angle_density(0.0, d), 0.0);
}

TEST(AngleDensity, DomainErrors) {
  EXPECT_EQ(code_of([] { angle_density(-0.1, 3); }), Errc::kDomainError);
  EXPECT_EQ(code_of([] { angle_density(3.2, 3); }), Errc::kDomainError);
  EXPECT_EQ(code_of([] { angle_density(1.0, 1); }), Errc::kDomainError);
}

TEST(AngleDensity, IntegratesToOne) {
  for (int d : {2, 3, 10, 768}) {
    const double mass = oracle::simpson([d](double t) { return angle_density(t, d); }, 0.0,
                                        std::numbers::pi, 100000);
    EXPECT_NEAR(mass, 1.0, 1e-6) << "d = " << d;
  }
}

TEST(SampleSphere, UnitNormAndCentered) {
  CounterRng rng(8, StreamId{});
  const UnitVector v = sample_sphere(rng, 768);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const UnitVector s = sample_sphere(rng, 768);
    ASSERT_NEAR(l2_norm(s.components()), 1.0, 1e-9);
    sum += cosine(v, s);
  }
  EXPECT_LE(std::abs(sum / n), 3.0 * (1.0 / std::sqrt(768.0)) / std::sqrt(n));
}

TEST(SampleSphere, CircleAnglesFlat) {
  CounterRng rng(9, StreamId{});
  const int n = 100000, bins = 20;
  std::vector<int> counts(bins, 0);
  for (int i = 0; i < n; ++i) {
    const UnitVector s = sample_sphere(rng, 2);
    const double a = std::atan2(s[1], s[0]) + std::numbers::pi;
    ++counts[std::min(bins - 1, static_cast<int>(a / (2 * std::numbers::pi) * bins))];
  }
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / double(bins)) * (c - n / double(bins)) / (n / double(bins));
  EXPECT_LT(chi2, 43.82);  // chi-square(19) upper 0.1% point
}

TEST(SampleSphere, ConcentrationAtEncoderScale) {
  CounterRng rng(10, StreamId{});
  const UnitVector pivot = sample_sphere(rng, 768);
  std::vector<double> c(20000);
  for (double& x : c) x = cosine(pivot, sample_sphere(rng, 768));
  std::sort(c.begin(), c.end());
  EXPECT_LE(std::abs(c[c.size() / 2]), 0.01);
  const auto inside = std::count_if(c.begin(), c.end(), [](double x) { return std::abs(x) <= 0.12; });
  EXPECT_GE(static_cast<double>(inside) / c.size(), 0.99);
}

TEST(KeyFile, RoundTrip) {
  const MasterKey key{18446744073709551557ull, 768, 4};
  const std::string text = key_to_json(key);
  EXPECT_EQ(key_from_json(text), key);
  EXPECT_NE(text.find("\"18446744073709551557\""), std::string::npos);
}

TEST(KeyFile, Malformed) {
  EXPECT_EQ(code_of([] { key_from_json("{"); }), Errc::kParse);
  EXPECT_EQ(code_of([] { key_from_json(R"({"dim": 4, "channels": 2})"); }), Errc::kParse);
  EXPECT_EQ(code_of([] { key_from_json(R"({"seed": "1", "dim": 2, "channels": 3, "format_version": 1})"); }),
            Errc::kInvalidShape);
}
