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
#include <memory>
#include <optional>
#include <string>

#include "json_io.hpp"
#include "pmark/embedding.hpp"
#include "pmark/errors.hpp"
#include "pmark/llm_io.hpp"

namespace pmark {

/// Settings shared by generation and detection. Read from the same JSON file
/// the simulator uses; simulator-only keys are ignored here.
struct EngineConfig {
  PipelineConfig pipeline;
  DetectionParams params;
  ModelEndpointConfig endpoint;
  std::uint64_t mock_seed = 1;
  std::optional<std::size_t> dim;
  std::optional<std::size_t> b;
};

EngineConfig engine_config_from_json(const std::string& text);

/// First 16 hex digits of SHA-256(bytes).
std::string fingerprint(std::string_view bytes);

/// ISO-8601 UTC. SOURCE_DATE_EPOCH wins when set; otherwise reproducible
/// runs stamp the epoch and live runs the wall clock.
std::string record_timestamp(bool reproducible);

class Engine {
 public:
  Engine(MasterKey key, std::string key_bytes, EngineConfig cfg, bool mock);

  /// Throws BudgetNotDivisible for online mode when N is not a multiple of 2^b.
  void check_mode(Mode mode) const;

  void set_detection(const DetectionParams& params);
  const DetectionParams& detection() const { return cfg_.params; }

  /// One generation RunRecord. Failures are recorded in the "error" field and
  /// reported through `error`.
  std::string generate_record(Mode mode, const std::string& prompt,
                              std::optional<Error>& error) const;

  /// One detection RunRecord for one input JSONL line.
  std::string detect_record(Mode mode, const std::string& line, std::optional<bool>& verdict,
                            std::optional<Error>& error) const;

 private:
  Json base_record(const char* kind, Mode mode) const;

  MasterKey key_;
  std::string fingerprint_;
  EngineConfig cfg_;
  bool mock_;
  std::unique_ptr<ModelClient> client_;
};

/// Runs the configured experiment; returns the metrics RunRecord and fills
/// `trials_jsonl` with one line per detected document.
std::string simulation_record(const std::string& config_json, std::string& trials_jsonl);

}  // namespace pmark
