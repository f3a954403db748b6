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

#include <span>
#include <string>

#include "pmark/embedding.hpp"

namespace pmark {

struct EmbeddedSentence {
  std::string text;
  UnitVector embedding;
};

struct ProxyScore {
  double value = 0.0;
  std::size_t channel = 0;  // 0-based
};

/// Value of a finite-range proxy, in {1, ..., range_size}.
struct FiniteProxyValue {
  std::size_t value = 1;
  std::size_t range_size = 1;
};

/// Cosine between pivot `channel` (0-based) and the sentence embedding.
ProxyScore pivot_proxy(const EmbeddedSentence& s, const PivotSet& pivots,
                       std::size_t channel);
double pivot_proxy(const UnitVector& e, const PivotSet& pivots,
                   std::size_t channel);

/// Concatenated hyperplane sign bits read most-significant-first, offset by
/// one so the range is {1, ..., 2^h}. A zero projection counts as a 1 bit.
FiniteProxyValue lsh_proxy(const EmbeddedSentence& s,
                           std::span<const UnitVector> hyperplanes);

/// 1-based index of the most similar center; ties go to the lowest index.
FiniteProxyValue cluster_proxy(const EmbeddedSentence& s,
                               std::span<const UnitVector> centers);

/// Cosine between consecutive sentences. For the first generated sentence
/// the caller passes the prompt's final sentence as `previous`.
double simmark_proxy(const EmbeddedSentence& previous,
                     const EmbeddedSentence& s);

/// Fixed green interval used with simmark_proxy.
inline constexpr double kSimMarkLow = 0.68;
inline constexpr double kSimMarkHigh = 0.76;
inline bool in_simmark_region(double score) {
  return score >= kSimMarkLow && score <= kSimMarkHigh;
}

}  // namespace pmark
