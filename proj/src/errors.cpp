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

#include "pmark/errors.hpp"

namespace pmark {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kZeroVector: return "ZeroVector";
    case Errc::kDimMismatch: return "DimMismatch";
    case Errc::kInvalidShape: return "InvalidShape";
    case Errc::kDomainError: return "DomainError";
    case Errc::kChannelOutOfRange: return "ChannelOutOfRange";
    case Errc::kEmptyInput: return "EmptyInput";
    case Errc::kOddSetSize: return "OddSetSize";
    case Errc::kBudgetNotDivisible: return "BudgetNotDivisible";
    case Errc::kEmptyCandidateSet: return "EmptyCandidateSet";
    case Errc::kInvalidCount: return "InvalidCount";
    case Errc::kMissingResample: return "MissingResample";
    case Errc::kSeedCoverage: return "SeedCoverage";
    case Errc::kZeroGreenMass: return "ZeroGreenMass";
    case Errc::kEnumerationTooLarge: return "EnumerationTooLarge";
    case Errc::kBudgetOutOfRange: return "BudgetOutOfRange";
    case Errc::kEmptyScoreSet: return "EmptyScoreSet";
    case Errc::kEndpointUnavailable: return "EndpointUnavailable";
    case Errc::kEmptyCompletion: return "EmptyCompletion";
    case Errc::kInvalidConfig: return "InvalidConfig";
    case Errc::kIo: return "IOError";
    case Errc::kParse: return "ParseError";
  }
  return "Unknown";
}

}  // namespace pmark
