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

#include "pmark/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "json.hpp"

#include "pmark/errors.hpp"

namespace pmark {

UnitVector UnitVector::normalize(std::span<const double> v) {
  if (v.size() < 2) fail(Errc::kInvalidShape, "unit vectors need dim >= 2");
  const double norm = l2_norm(v);
  if (!(norm >= kZeroNormThreshold)) {
    fail(Errc::kZeroVector, "cannot normalize a zero-length vector");
  }
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return UnitVector(std::move(out));
}

UnitVector UnitVector::from_unit(std::vector<double> components) {
  if (components.size() < 2) {
    fail(Errc::kInvalidShape, "unit vectors need dim >= 2");
  }
  const double norm = l2_norm(components);
  if (std::abs(norm - 1.0) > kUnitNormTolerance) {
    fail(Errc::kDomainError, "vector is not unit-norm");
  }
  return UnitVector(std::move(components));
}

UnitVector UnitVector::operator-() const {
  std::vector<double> out(components_);
  for (double& x : out) x = -x;
  return UnitVector(std::move(out));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(Errc::kDimMismatch, "dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

double cosine(const UnitVector& u, const UnitVector& w) {
  if (u.dim() != w.dim()) {
    fail(Errc::kDimMismatch, "cosine of vectors with different dimensions");
  }
  return std::clamp(dot(u.components(), w.components()), -1.0, 1.0);
}

PivotSet::PivotSet(std::vector<UnitVector> pivots, std::uint64_t seed)
    : pivots_(std::move(pivots)), seed_(seed) {
  if (pivots_.empty()) fail(Errc::kInvalidShape, "pivot set is empty");
  dim_ = pivots_.front().dim();
  if (pivots_.size() > dim_) {
    fail(Errc::kInvalidShape, "more pivots than dimensions");
  }
  for (const auto& p : pivots_) {
    if (p.dim() != dim_) fail(Errc::kDimMismatch, "pivot dimensions differ");
  }
}

ThinQr householder_qr(const Matrix& a) {
  const std::size_t m = a.rows;
  const std::size_t n = a.cols;
  if (n == 0 || n > m) fail(Errc::kInvalidShape, "QR needs 1 <= cols <= rows");

  Matrix work = a;
  std::vector<std::vector<double>> reflectors;
  reflectors.reserve(n);
  std::vector<double> diag(n);

  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> v(m - k);
    for (std::size_t i = k; i < m; ++i) v[i - k] = work(i, k);
    const double xnorm = l2_norm(v);
    // Reflect x onto alpha*e1 with alpha of opposite sign to x0 to avoid
    // cancellation.
    const double alpha = v[0] >= 0.0 ? -xnorm : xnorm;
    v[0] -= alpha;
    const double vnorm = l2_norm(v);
    if (vnorm > 0.0) {
      for (double& x : v) x /= vnorm;
      for (std::size_t j = k; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = k; i < m; ++i) s += v[i - k] * work(i, j);
        for (std::size_t i = k; i < m; ++i) work(i, j) -= 2.0 * v[i - k] * s;
      }
    }
    diag[k] = work(k, k);
    reflectors.push_back(std::move(v));
  }

  ThinQr out{Matrix(m, n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i <= j; ++i) out.r(i, j) = work(i, j);
  }

  // Q e_j = H_0 H_1 ... H_{n-1} e_j, applied right to left.
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> col(m, 0.0);
    col[j] = 1.0;
    for (std::size_t kk = n; kk-- > 0;) {
      const auto& v = reflectors[kk];
      double s = 0.0;
      for (std::size_t i = kk; i < m; ++i) s += v[i - kk] * col[i];
      for (std::size_t i = kk; i < m; ++i) col[i] -= 2.0 * v[i - kk] * s;
    }
    for (std::size_t i = 0; i < m; ++i) out.q(i, j) = col[i];
  }

  // Flip column j of Q and row j of R wherever R_jj < 0.
  for (std::size_t j = 0; j < n; ++j) {
    if (diag[j] < 0.0) {
      for (std::size_t i = 0; i < m; ++i) out.q(i, j) = -out.q(i, j);
      for (std::size_t c = j; c < n; ++c) out.r(j, c) = -out.r(j, c);
    }
  }
  return out;
}

Matrix pivot_source_matrix(const MasterKey& key) {
  Matrix a(key.dim, key.channels);
  CounterRng rng(key.seed, StreamId{stream_domain::kPivots, 0, 0});
  for (double& x : a.data) x = rng.gaussian();
  return a;
}

PivotSet generate_pivots(const MasterKey& key) {
  if (key.dim < 2) fail(Errc::kInvalidShape, "key dim must be >= 2");
  if (key.channels < 1 || key.channels > key.dim) {
    fail(Errc::kInvalidShape, "channel count must satisfy 1 <= b <= d");
  }
  const ThinQr qr = householder_qr(pivot_source_matrix(key));
  std::vector<UnitVector> pivots;
  pivots.reserve(key.channels);
  for (std::size_t j = 0; j < key.channels; ++j) {
    std::vector<double> col(qr.q.data.begin() + j * key.dim,
                            qr.q.data.begin() + (j + 1) * key.dim);
    pivots.push_back(UnitVector::normalize(col));
  }
  return PivotSet(std::move(pivots), key.seed);
}

double angle_density(double theta, int d) {
  if (d < 2) fail(Errc::kDomainError, "angle density needs d >= 2");
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    fail(Errc::kDomainError, "angle outside [0, pi]");
  }
  const double log_norm = std::lgamma(0.5 * d) - std::lgamma(0.5 * (d - 1)) -
                          0.5 * std::log(std::numbers::pi);
  if (d == 2) return std::exp(log_norm);
  const double s = std::sin(theta);
  if (s <= 0.0) return 0.0;
  return std::exp(log_norm + (d - 2) * std::log(s));
}

UnitVector sample_sphere(CounterRng& rng, std::size_t d) {
  if (d < 2) fail(Errc::kInvalidShape, "sphere dimension must be >= 2");
  std::vector<double> g(d);
  for (;;) {
    for (double& x : g) x = rng.gaussian();
    if (l2_norm(g) >= kZeroNormThreshold) return UnitVector::normalize(g);
  }
}

std::string key_to_json(const MasterKey& key) {
  nlohmann::ordered_json j;
  j["seed"] = std::to_string(key.seed);
  j["dim"] = key.dim;
  j["channels"] = key.channels;
  j["format_version"] = 1;
  return j.dump(2) + "\n";
}

MasterKey key_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kParse, std::string("key file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("seed") || !j.contains("dim") ||
      !j.contains("channels")) {
    fail(Errc::kParse, "key file needs seed, dim and channels");
  }
  if (j.value("format_version", 1) != 1) {
    fail(Errc::kParse, "unsupported key format_version");
  }
  MasterKey key;
  const auto& seed = j["seed"];
  if (!seed.is_string()) fail(Errc::kParse, "key seed must be a decimal string");
  const std::string s = seed.get<std::string>();
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), key.seed);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    fail(Errc::kParse, "key seed is not a valid u64");
  }
  if (!j["dim"].is_number_unsigned() || !j["channels"].is_number_unsigned()) {
    fail(Errc::kParse, "dim and channels must be positive integers");
  }
  key.dim = j["dim"].get<std::size_t>();
  key.channels = j["channels"].get<std::size_t>();
  if (key.dim < 2 || key.channels < 1 || key.channels > key.dim) {
    fail(Errc::kInvalidShape, "key shape must satisfy 1 <= channels <= dim, dim >= 2");
  }
  return key;
}

}  // namespace pmark
