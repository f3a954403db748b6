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

#include "json_io.hpp"

#include <cstdio>

namespace pmark {
namespace {

std::string level_key(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", f);
  return buf;
}

}  // namespace

Json report_json(const DetectionReport& report) {
  Json j;
  j["mode"] = mode_name(report.mode);
  j["T"] = report.T;
  j["b"] = report.b;
  j["N_g"] = report.n_green;
  j["N_total"] = report.n_total;
  j["z"] = report.z;
  j["z_alpha"] = report.z_alpha;
  j["verdict"] = report.verdict;
  j["cells"] = Json::array();
  for (const auto& c : report.cells) {
    j["cells"].push_back(
        {{"t", c.t}, {"j", c.channel}, {"x", c.x}, {"m_hat", c.m_hat}, {"r", c.r}, {"c", c.c}});
  }
  return j;
}

Json trace_json(const SelectionTrace& trace) {
  Json j;
  j["channels"] = Json::array();
  for (const auto& step : trace.channels) {
    j["channels"].push_back({{"side", step.seed_bit == 1 ? "upper" : "lower"},
                             {"median", step.median},
                             {"size_before", step.size_before},
                             {"size_after", step.size_after}});
  }
  j["final_size"] = trace.survivors.size();
  j["pick"] = trace.pick;
  return j;
}

Json attack_json(const AttackSpec& attack) {
  return {{"kind", attack_kind_name(attack.kind)}, {"d", attack.d}, {"prob", attack.prob}};
}

Json metrics_json(const MetricsReport& metrics) {
  Json j;
  Json tpr = Json::object();
  Json thr = Json::object();
  for (const auto& [f, v] : metrics.tpr_at_fpr) tpr[level_key(f)] = v;
  for (const auto& [f, v] : metrics.threshold_at_fpr) thr[level_key(f)] = v;
  j["tpr_at_fpr"] = tpr;
  j["threshold_at_fpr"] = thr;
  j["auc"] = metrics.auc;
  j["auc_trapezoid"] = metrics.auc_trapezoid;
  j["watermarked_z"] = metrics.watermarked_z;
  j["null_z"] = metrics.null_z;
  return j;
}

Json scenario_json(const ScenarioResult& s) {
  Json j;
  j["mode"] = mode_name(s.mode);
  j["attack"] = s.attack ? attack_json(*s.attack) : Json();
  j["metrics"] = metrics_json(s.metrics);
  j["fpr_at_z_alpha"] = s.fpr_at_z_alpha;
  j["tpr_at_z_alpha"] = s.tpr_at_z_alpha;
  j["mean_candidates_per_sentence"] = s.mean_candidates_per_sentence;
  j["selected_index_tv"] = s.selected_index_tv;
  return j;
}

}  // namespace pmark
