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

#include "pmark/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"
#include "pmark/detection.hpp"
#include "pmark/embedding.hpp"
#include "pmark/errors.hpp"
#include "pmark/selection.hpp"
#include "pmark/sim.hpp"
#include "pmark/theory.hpp"

namespace pmark {
namespace {

CheckResult at_most(std::string name, double measured, double tolerance,
                    std::string detail = {}) {
  return {std::move(name), measured <= tolerance, measured, tolerance, std::move(detail)};
}

CheckResult at_least(std::string name, double measured, double bound,
                     std::string detail = {}) {
  return {std::move(name), measured > bound, measured, bound, std::move(detail)};
}

FiniteDistribution random_distribution(std::size_t M, CounterRng& rng) {
  std::vector<double> q(M);
  double total = 0.0;
  for (double& x : q) {
    x = 0.05 + rng.uniform();
    total += x;
  }
  for (double& x : q) x /= total;
  // Put the rounding residue on the largest mass so the sum is 1 to 1e-12.
  double sum = 0.0;
  for (double x : q) sum += x;
  *std::max_element(q.begin(), q.end()) += 1.0 - sum;
  return FiniteDistribution(std::move(q));
}

CounterRng check_rng(std::uint64_t seed, std::uint32_t check) {
  return CounterRng(seed, StreamId{stream_domain::kTrial, 0xFFFFFF00u, check});
}

void theory_checks(const VerifyOptions& opt, std::vector<CheckResult>& out) {
  // Rejection sampling into a fixed green set: once something is emitted,
  // its law is q(u) / q(S) on S whatever the draw cap.
  {
    const FiniteDistribution q({0.1, 0.2, 0.3, 0.4});
    const std::vector<std::size_t> in_green = {0, 1, 0, 1};  // S = {2, 4}
    const std::size_t green[] = {2, 4};
    double worst = 0.0;
    CounterRng rng = check_rng(opt.seed, 1);
    for (std::uint64_t cap : {1ULL, 4ULL, 64ULL}) {
      std::vector<double> counts(4, 0.0);
      double accepted = 0.0;
      for (int trial = 0; trial < 200'000; ++trial) {
        for (std::uint64_t draw = 0; draw < cap; ++draw) {
          const double u = rng.uniform();
          const std::size_t v = u < 0.1 ? 0 : u < 0.3 ? 1 : u < 0.6 ? 2 : 3;
          if (in_green[v]) {
            counts[v] += 1.0;
            accepted += 1.0;
            break;
          }
        }
      }
      for (std::size_t v = 0; v < 4; ++v) {
        const double p = green_scaling(q, green, q.masses()[v], v + 1);
        const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / accepted);
        worst = std::max(worst, std::abs(counts[v] / accepted - p) / se);
      }
    }
    out.push_back(at_most("green_scaling_independent_of_cap", worst, 5.0,
                          "max |freq - q(u)/q(S)| in standard errors over caps {1,4,64}"));
    double total = 0.0;
    for (std::size_t u : green) total += green_scaling(q, green, q.mass(u), u);
    out.push_back(at_most("green_scaling_normalized", std::abs(total - 1.0), 1e-12));
  }
  {
    const FiniteDistribution q({0.3, 0.7});
    CounterRng rng = check_rng(opt.seed, 2);
    const auto mc = semstamp_monte_carlo(q, {2, 1}, opt.monte_carlo_trials, rng);
    out.push_back(at_most("watermarked_pmf_closed_form_vs_monte_carlo",
                          std::abs(mc.a_hat[0] - 5.0 / 3.0), 0.02,
                          "q=(0.3,0.7), m=1, |A_hat(1) - 5/3|"));
  }
  {
    CounterRng rng = check_rng(opt.seed, 3);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const std::size_t M = 2 + rng.below(9);
      const std::size_t m = 1 + rng.below(M);
      const auto q = random_distribution(M, rng);
      const auto a = watermarked_pmf_factors(q, {M, m});
      double s = 0.0;
      for (std::size_t u = 0; u < M; ++u) s += q.masses()[u] * a[u];
      worst = std::max(worst, std::abs(s - 1.0));
    }
    out.push_back(at_most("watermarked_pmf_normalization", worst, 1e-10,
                          "max |sum_u q(u) A(u) - 1| over 50 random instances"));
  }
  {
    std::vector<double> q(6, 1.0 / 6.0);
    if (opt.inject_nonuniform) q = {0.3, 0.2, 0.2, 0.1, 0.1, 0.1};
    const double gap = distortion_gap(FiniteDistribution(q), {6, 3});
    out.push_back(at_most("uniform_mass_is_distortion_free", gap, 1e-12,
                          opt.inject_nonuniform ? "negative control: non-uniform q injected"
                                                : "q uniform, M=6, m=3"));
  }
  {
    CounterRng rng = check_rng(opt.seed, 4);
    double smallest = 1e300;
    bool monotone = true;
    for (int i = 0; i < 100; ++i) {
      const std::size_t M = 2 + rng.below(9);
      const std::size_t m = 1 + rng.below(M - 1);  // m = M is trivially free
      const auto q = random_distribution(M, rng);
      const auto a = watermarked_pmf_factors(q, {M, m});
      smallest = std::min(smallest, distortion_gap(q, {M, m}));
      for (std::size_t u = 0; u < M; ++u) {
        for (std::size_t v = 0; v < M; ++v) {
          if (q.masses()[u] > q.masses()[v] && !(a[u] < a[v])) monotone = false;
        }
      }
    }
    out.push_back(at_least("non_uniform_mass_distorts", smallest, 1e-6,
                           "min gap over 100 random non-uniform q"));
    out.push_back({"larger_mass_gets_smaller_factor", monotone, monotone ? 1.0 : 0.0, 1.0,
                   "q(u) > q(v) implies A(u) < A(v)"});
  }
  {
    CounterRng rng = check_rng(opt.seed, 5);
    const auto exact2 = exact_selection_probabilities(std::vector<std::vector<double>>{{0.1, -0.2}});
    double worst = std::max(std::abs(exact2[0] - 0.5), std::abs(exact2[1] - 0.5));
    out.push_back(at_most("single_channel_exact_n2", worst, 1e-15));
    const auto mc = single_channel_distortion_check(8, opt.monte_carlo_trials, rng);
    const double bound =
        4.0 * std::sqrt((1.0 / 8.0) * (7.0 / 8.0) / static_cast<double>(opt.monte_carlo_trials));
    out.push_back(at_most("single_channel_monte_carlo_n8", mc.max_deviation, bound));
  }
  {
    CounterRng rng = check_rng(opt.seed, 6);
    double worst = 0.0;
    for (std::size_t b = 1; b <= 3; ++b) {
      std::vector<std::vector<double>> scores(b, std::vector<double>(8));
      for (auto& col : scores) {
        for (double& x : col) x = rng.gaussian();
      }
      for (double p : exact_selection_probabilities(scores)) {
        worst = std::max(worst, std::abs(p - 1.0 / 8.0));
      }
    }
    out.push_back(at_most("multi_channel_exact_enumeration", worst, 1e-15,
                          "N=8, b in {1,2,3}"));
    const MasterKey key{opt.seed, 16, 3};
    const PivotSet pivots = generate_pivots(key);
    std::vector<UnitVector> cands;
    for (int i = 0; i < 8; ++i) cands.push_back(sample_sphere(rng, 16));
    const auto hist = selection_index_histogram(Mode::kOnline, cands, pivots, 100'000, rng);
    out.push_back(at_most("multi_channel_monte_carlo_tv", tv_from_uniform(hist), 0.02,
                          "N=8, b=3, 1e5 trials"));
  }
  {
    CounterRng rng = check_rng(opt.seed, 7);
    const std::size_t dim = 128;
    const UnitVector pivot = sample_sphere(rng, dim);
    double worst_excess = -1.0;
    double worst_flip_margin = -1e300;
    for (double d : {0.005, 0.02, 0.08}) {
      const double half = std::sqrt(2.0 * d);
      std::vector<double> natural(10'000);
      for (double& s : natural) s = cosine(pivot, sample_sphere(rng, dim));
      const double band = robustness_band_bound(natural, 0.0, d);
      const int n = 10'000;
      int flips = 0;
      for (int i = 0; i < n; ++i) {
        const UnitVector e = sample_sphere(rng, dim);
        const UnitVector e2 = rotate_toward_random(e, std::acos(1.0 - d), rng);
        const double f = cosine(pivot, e);
        const double f2 = cosine(pivot, e2);
        worst_excess = std::max(worst_excess, std::abs(f2 - f) - half);
        flips += (f > 0.0) != (f2 > 0.0) ? 1 : 0;
      }
      const double rate = static_cast<double>(flips) / n;
      const double se = std::sqrt(std::max(band * (1 - band), 1e-12) / 10'000.0 +
                                  rate * (1 - rate) / n);
      worst_flip_margin = std::max(worst_flip_margin, rate - (band + 3 * se));
    }
    out.push_back(at_most("attack_shift_within_band", worst_excess, 1e-9,
                          "max |f' - f| - sqrt(2d) over d in {0.005,0.02,0.08}"));
    out.push_back(at_most("evidence_flip_rate_below_band_mass", worst_flip_margin, 0.0,
                          "max flip rate - (band mass + 3 se)"));
  }
}

double simpson(double (*f)(double, int), int d, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  double s = f(a, d) + f(b, d);
  for (int i = 1; i < intervals; ++i) s += f(a + i * h, d) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

void extended_checks(const VerifyOptions& opt, std::vector<CheckResult>& out) {
  {
    const MasterKey key{opt.seed, 768, 4};
    const PivotSet p = generate_pivots(key);
    double worst = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        const double g = dot(p[i].components(), p[j].components());
        worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
      }
    }
    out.push_back(at_most("pivot_gram_matrix", worst, kOrthogonalityTolerance, "d=768, b=4"));
    const PivotSet again = generate_pivots(key);
    bool same = true;
    for (std::size_t j = 0; j < 4; ++j) same = same && again[j] == p[j];
    out.push_back({"pivot_regeneration_bit_exact", same, same ? 1.0 : 0.0, 1.0, ""});
  }
  {
    double worst = 0.0;
    for (int d : {2, 3, 10, 768}) {
      worst = std::max(worst, std::abs(simpson(angle_density, d, 0.0, std::numbers::pi,
                                               200'000) - 1.0));
    }
    out.push_back(at_most("angle_density_normalized", worst, 1e-6, "d in {2,3,10,768}"));
  }
  {
    out.push_back(at_most("z_full_evidence", std::abs(z_statistic(48, 48) - 6.9282), 1e-4));
    out.push_back(at_most("z_null_center", std::abs(z_statistic(24, 48)), 0.0));
    out.push_back(at_most("z_threshold_one_percent", std::abs(z_threshold(0.01) - 2.3263), 1e-3));
  }
  {
    const double a[] = {1.0, 2.0, 3.0};
    const double b[] = {0.0, 1.0};
    const double worst = std::max(std::abs(hd_median(a) - 2.0), std::abs(hd_median(b) - 0.5));
    out.push_back(at_most("hd_median_symmetric_samples", worst, 1e-12));
  }
  {
    CounterRng rng = check_rng(opt.seed, 8);
    const MasterKey key{opt.seed ^ 0x5555, 64, 4};
    const PivotSet pivots = generate_pivots(key);
    const ChannelSeeds seeds = ChannelSeeds::from_key(key);
    const int n = 20'000;
    int matches = 0;
    for (int t = 1; t <= n; ++t) {
      const auto sig = offline_signature(sample_sphere(rng, 64), pivots);
      for (std::size_t j = 0; j < 4; ++j) matches += sig[j] == seeds.bit(t, j) ? 1 : 0;
    }
    const double rate = matches / (4.0 * n);
    out.push_back(at_most("null_signature_match_rate", std::abs(rate - 0.5),
                          4.0 * 0.5 / std::sqrt(4.0 * n)));
  }
}

}  // namespace

bool VerificationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

VerificationReport run_verification(const VerifyOptions& options) {
  if (options.suite != "theory" && options.suite != "all") {
    fail(Errc::kInvalidConfig, "suite must be 'theory' or 'all'");
  }
  VerificationReport report;
  report.suite = options.suite;
  theory_checks(options, report.checks);
  if (options.suite == "all") extended_checks(options, report.checks);
  return report;
}

std::string verification_to_json(const VerificationReport& report) {
  nlohmann::ordered_json j;
  j["suite"] = report.suite;
  j["passed"] = report.all_passed();
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"measured", c.measured},
                           {"tolerance", c.tolerance},
                           {"detail", c.detail}});
  }
  return j.dump(2) + "\n";
}

}  // namespace pmark
