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
#include <string>
#include <vector>

namespace pmark {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerificationReport {
  std::string suite;
  std::vector<CheckResult> checks;

  bool all_passed() const;
};

struct VerifyOptions {
  std::string suite = "theory";  // "theory" or "all"
  std::uint64_t seed = 20260101;
  std::uint64_t monte_carlo_trials = 1'000'000;
  // Negative control: feed a non-uniform q into the check that asserts a
  // uniform q is distortion-free. That check must then fail.
  bool inject_nonuniform = false;
};

/// Runs the executable versions of the sampling and detection guarantees.
/// Throws InvalidConfig for an unknown suite name.
VerificationReport run_verification(const VerifyOptions& options);

std::string verification_to_json(const VerificationReport& report);

}  // namespace pmark
