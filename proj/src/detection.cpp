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

#include "pmark/detection.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "json.hpp"
#include "pmark/errors.hpp"
#include "json_io.hpp"

namespace pmark {

std::string_view mode_name(Mode mode) {
  return mode == Mode::kOnline ? "online" : "offline";
}

Mode parse_mode(std::string_view name) {
  if (name == "online") return Mode::kOnline;
  if (name == "offline") return Mode::kOffline;
  fail(Errc::kInvalidConfig, "mode must be online or offline, got '" +
                                 std::string(name) + "'");
}

double soft_count(double x, double m_hat, int r, double delta, double K) {
  if (!(K > 0.0)) fail(Errc::kDomainError, "K must be positive");
  if (!(delta >= 0.0)) fail(Errc::kDomainError, "delta must be nonnegative");
  if ((r == 1 && x > m_hat - delta) || (r == 0 && x < m_hat + delta)) return 1.0;
  return std::exp(-K * std::abs(x - m_hat));
}

double z_statistic(double n_green, std::size_t n_total) {
  if (n_total == 0) fail(Errc::kInvalidCount, "N_total must be positive");
  const double n = static_cast<double>(n_total);
  if (!(n_green >= 0.0 && n_green <= n)) {
    fail(Errc::kInvalidCount, "N_g outside [0, N_total]");
  }
  return std::abs(n_green - 0.5 * n) / std::sqrt(0.25 * n);
}

double z_threshold(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    fail(Errc::kDomainError, "alpha must lie in (0, 1)");
  }
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(boost::math::complement(standard, alpha));
}

DetectionReport summarize_cells(Mode mode, std::size_t T, std::size_t b,
                                std::vector<EvidenceCell> cells,
                                const DetectionParams& params) {
  DetectionReport report;
  report.mode = mode;
  report.T = T;
  report.b = b;
  report.n_total = T * b;
  for (const auto& cell : cells) report.n_green += cell.c;
  // Guard against accumulated rounding pushing N_g past N_total.
  report.n_green = std::min(report.n_green, static_cast<double>(report.n_total));
  report.z = z_statistic(report.n_green, report.n_total);
  report.z_alpha = z_threshold(params.alpha);
  report.verdict = report.z > report.z_alpha;
  report.cells = std::move(cells);
  return report;
}

DetectionReport detect_online(std::span<const UnitVector> sentences,
                              std::span<const ScoreMatrix> resampled,
                              const ChannelSeeds& seeds, const PivotSet& pivots,
                              const DetectionParams& params) {
  const std::size_t T = sentences.size();
  const std::size_t b = pivots.channel_count();
  if (T == 0) fail(Errc::kEmptyInput, "nothing to detect: no sentences");
  if (resampled.size() < T) {
    fail(Errc::kMissingResample, "need one resampled candidate set per sentence");
  }
  if (seeds.channel_count() != b) {
    fail(Errc::kSeedCoverage, "seed width differs from the number of channels");
  }
  std::vector<EvidenceCell> cells;
  cells.reserve(T * b);
  for (std::size_t t = 1; t <= T; ++t) {
    const ScoreMatrix& w = resampled[t - 1];
    if (w.rows() == 0) {
      fail(Errc::kMissingResample, "empty resample for sentence " + std::to_string(t));
    }
    if (w.cols() != b) fail(Errc::kDimMismatch, "resample scored on wrong channels");
    for (std::size_t j = 0; j < b; ++j) {
      EvidenceCell cell;
      cell.t = t;
      cell.channel = j + 1;
      cell.x = pivot_proxy(sentences[t - 1], pivots, j);
      cell.m_hat = hd_median(w.column(j));
      cell.r = seeds.bit(t, j);
      cell.c = soft_count(cell.x, cell.m_hat, cell.r, params.delta, params.K);
      cells.push_back(cell);
    }
  }
  return summarize_cells(Mode::kOnline, T, b, std::move(cells), params);
}

DetectionReport detect_online(std::span<const EmbeddedSentence> sentences,
                              std::span<const CandidateSet> resampled,
                              const ChannelSeeds& seeds, const PivotSet& pivots,
                              const DetectionParams& params) {
  if (resampled.size() < sentences.size()) {
    fail(Errc::kMissingResample, "need one resampled candidate set per sentence");
  }
  std::vector<UnitVector> embeddings;
  std::vector<ScoreMatrix> scores;
  for (std::size_t t = 0; t < sentences.size(); ++t) {
    embeddings.push_back(sentences[t].embedding);
    scores.push_back(resampled[t].score(pivots));
  }
  return detect_online(embeddings, scores, seeds, pivots, params);
}

DetectionReport detect_offline(std::span<const UnitVector> sentences,
                               const ChannelSeeds& seeds, const PivotSet& pivots,
                               const DetectionParams& params) {
  const std::size_t T = sentences.size();
  const std::size_t b = pivots.channel_count();
  if (T == 0) fail(Errc::kEmptyInput, "nothing to detect: no sentences");
  if (seeds.channel_count() != b) {
    fail(Errc::kSeedCoverage, "seed width differs from the number of channels");
  }
  std::vector<EvidenceCell> cells;
  cells.reserve(T * b);
  for (std::size_t t = 1; t <= T; ++t) {
    for (std::size_t j = 0; j < b; ++j) {
      EvidenceCell cell;
      cell.t = t;
      cell.channel = j + 1;
      cell.x = pivot_proxy(sentences[t - 1], pivots, j);
      cell.m_hat = 0.0;
      cell.r = seeds.bit(t, j);
      cell.c = soft_count(cell.x, 0.0, cell.r, params.delta, params.K);
      cells.push_back(cell);
    }
  }
  return summarize_cells(Mode::kOffline, T, b, std::move(cells), params);
}

std::string report_to_json(const DetectionReport& report) {
  return report_json(report).dump();
}

}  // namespace pmark
