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
#include <string>
#include <vector>

#include "pmark/random.hpp"

namespace pmark {

inline constexpr double kUnitNormTolerance = 1e-9;
inline constexpr double kOrthogonalityTolerance = 1e-8;
inline constexpr double kZeroNormThreshold = 1e-12;

/// L2-normalized vector in R^d, d >= 2.
class UnitVector {
 public:
  UnitVector() = default;

  /// Normalizes `v`; throws ZeroVector if its norm is below 1e-12.
  static UnitVector normalize(std::span<const double> v);
  /// Adopts components that are already unit-norm (checked to 1e-9).
  static UnitVector from_unit(std::vector<double> components);

  std::size_t dim() const { return components_.size(); }
  std::span<const double> components() const { return components_; }
  double operator[](std::size_t i) const { return components_[i]; }

  UnitVector operator-() const;

  friend bool operator==(const UnitVector&, const UnitVector&) = default;

 private:
  explicit UnitVector(std::vector<double> c) : components_(std::move(c)) {}

  std::vector<double> components_;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

/// Inner product of two unit vectors clamped to [-1, 1].
double cosine(const UnitVector& u, const UnitVector& w);

/// Secret key material. Both the pivots and every channel seed bit are pure
/// functions of (seed, dim, channels).
struct MasterKey {
  std::uint64_t seed = 0;
  std::size_t dim = 0;
  std::size_t channels = 0;

  friend bool operator==(const MasterKey&, const MasterKey&) = default;
};

/// b mutually orthogonal unit pivots; pivot j defines proxy channel j.
class PivotSet {
 public:
  PivotSet(std::vector<UnitVector> pivots, std::uint64_t derivation_seed);

  std::size_t dim() const { return dim_; }
  std::size_t channel_count() const { return pivots_.size(); }
  std::uint64_t derivation_seed() const { return seed_; }
  const UnitVector& operator[](std::size_t j) const { return pivots_[j]; }
  const std::vector<UnitVector>& pivots() const { return pivots_; }

 private:
  std::vector<UnitVector> pivots_;
  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
};

/// Dense column-major matrix, just enough for the pivot factorization.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[j * rows + i]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data[j * rows + i];
  }
};

struct ThinQr {
  Matrix q;  // rows x cols, orthonormal columns
  Matrix r;  // cols x cols, upper triangular, nonnegative diagonal
};

/// Householder QR of a tall matrix, normalized so diag(R) >= 0.
ThinQr householder_qr(const Matrix& a);

/// The d x b Gaussian matrix the pivots are factored from. Filled column by
/// column from stream {0,0,0} of key.seed.
Matrix pivot_source_matrix(const MasterKey& key);

/// Q factor of pivot_source_matrix(key). Throws InvalidShape unless
/// 1 <= b <= d and d >= 2.
PivotSet generate_pivots(const MasterKey& key);

/// Density of the angle between two independent uniform points on S^{d-1}:
/// Gamma(d/2) / (Gamma((d-1)/2) sqrt(pi)) * sin(theta)^(d-2).
double angle_density(double theta, int d);

/// Uniform point on S^{d-1} from normalized Gaussians.
UnitVector sample_sphere(CounterRng& rng, std::size_t d);

/// Key file document: {"seed": "<u64>", "dim": d, "channels": b,
/// "format_version": 1}. Pivots are never serialized.
std::string key_to_json(const MasterKey& key);
MasterKey key_from_json(const std::string& text);

}  // namespace pmark
