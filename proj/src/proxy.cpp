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

#include "pmark/proxy.hpp"

#include "pmark/errors.hpp"

namespace pmark {

double pivot_proxy(const UnitVector& e, const PivotSet& pivots,
                   std::size_t channel) {
  if (channel >= pivots.channel_count()) {
    fail(Errc::kChannelOutOfRange,
         "channel " + std::to_string(channel) + " outside pivot set of size " +
             std::to_string(pivots.channel_count()));
  }
  return cosine(pivots[channel], e);
}

ProxyScore pivot_proxy(const EmbeddedSentence& s, const PivotSet& pivots,
                       std::size_t channel) {
  return {pivot_proxy(s.embedding, pivots, channel), channel};
}

FiniteProxyValue lsh_proxy(const EmbeddedSentence& s,
                           std::span<const UnitVector> hyperplanes) {
  if (hyperplanes.empty()) fail(Errc::kEmptyInput, "lsh needs >= 1 hyperplane");
  if (hyperplanes.size() >= 63) {
    fail(Errc::kInvalidShape, "lsh supports at most 62 hyperplanes");
  }
  std::size_t code = 0;
  for (const auto& u : hyperplanes) {
    const bool bit = dot(u.components(), s.embedding.components()) >= 0.0;
    code = (code << 1) | (bit ? 1U : 0U);
  }
  return {code + 1, std::size_t{1} << hyperplanes.size()};
}

FiniteProxyValue cluster_proxy(const EmbeddedSentence& s,
                               std::span<const UnitVector> centers) {
  if (centers.empty()) fail(Errc::kEmptyInput, "cluster proxy needs centers");
  std::size_t best = 0;
  double best_sim = cosine(centers[0], s.embedding);
  for (std::size_t k = 1; k < centers.size(); ++k) {
    const double sim = cosine(centers[k], s.embedding);
    if (sim > best_sim) {
      best_sim = sim;
      best = k;
    }
  }
  return {best + 1, centers.size()};
}

double simmark_proxy(const EmbeddedSentence& previous,
                     const EmbeddedSentence& s) {
  return cosine(previous.embedding, s.embedding);
}

}  // namespace pmark
