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

#include "json.hpp"
#include "pmark/detection.hpp"
#include "pmark/selection.hpp"
#include "pmark/sim.hpp"

namespace pmark {

using Json = nlohmann::ordered_json;

Json report_json(const DetectionReport& report);
Json trace_json(const SelectionTrace& trace);
Json attack_json(const AttackSpec& attack);
Json metrics_json(const MetricsReport& metrics);
Json scenario_json(const ScenarioResult& scenario);

}  // namespace pmark
