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
#include <vector>

#include "pmark/embedding.hpp"
#include "pmark/selection.hpp"

namespace pmark {

enum class Mode { kOnline, kOffline };

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);

struct DetectionParams {
  double delta = 0.001;  // margin around the median
  double K = 150.0;      // smoothing factor for near misses
  double alpha = 0.01;   // significance level
};

/// Evidence of one sentence on one channel. t and channel are 1-based here
/// because this is what the report exposes.
struct EvidenceCell {
  std::size_t t = 0;
  std::size_t channel = 0;
  double x = 0.0;
  double m_hat = 0.0;
  int r = 0;
  double c = 0.0;
};

struct DetectionReport {
  Mode mode = Mode::kOffline;
  std::size_t T = 0;
  std::size_t b = 0;
  double n_green = 0.0;
  std::size_t n_total = 0;
  double z = 0.0;
  double z_alpha = 0.0;
  bool verdict = false;
  std::vector<EvidenceCell> cells;
};

/// 1 when the score sits on the seeded side of the median (widened by delta),
/// otherwise exp(-K |x - m_hat|).
double soft_count(double x, double m_hat, int r, double delta, double K);

/// |N_g - N/2| / sqrt(N/4). Throws InvalidCount when N_g is outside [0, N].
double z_statistic(double n_green, std::size_t n_total);

/// Upper alpha quantile of the standard normal.
double z_threshold(double alpha);

/// Online detection: the median for sentence t on channel j is the
/// Harrell-Davis estimate over `resampled[t-1]`'s channel-j scores.
DetectionReport detect_online(std::span<const UnitVector> sentences,
                              std::span<const ScoreMatrix> resampled,
                              const ChannelSeeds& seeds, const PivotSet& pivots,
                              const DetectionParams& params);

DetectionReport detect_online(std::span<const EmbeddedSentence> sentences,
                              std::span<const CandidateSet> resampled,
                              const ChannelSeeds& seeds, const PivotSet& pivots,
                              const DetectionParams& params);

/// Offline detection with every median fixed at zero. Needs no model access.
DetectionReport detect_offline(std::span<const UnitVector> sentences,
                               const ChannelSeeds& seeds, const PivotSet& pivots,
                               const DetectionParams& params);

/// Shared tail of both detectors: aggregates evidence cells into a report.
DetectionReport summarize_cells(Mode mode, std::size_t T, std::size_t b,
                                std::vector<EvidenceCell> cells,
                                const DetectionParams& params);

std::string report_to_json(const DetectionReport& report);

}  // namespace pmark
