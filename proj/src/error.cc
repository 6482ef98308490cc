// Copyright 2026 The cfnav Authors
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

#include "cfnav/error.h"

namespace cfnav {

std::string_view ErrorName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDegeneratePath: return "degenerate-path";
    case ErrorCode::kDegenerateTarget: return "degenerate-target";
    case ErrorCode::kMissingObservation: return "missing-observation";
    case ErrorCode::kInvalidRecord: return "invalid-record";
    case ErrorCode::kDuplicateRecord: return "duplicate-record";
    case ErrorCode::kNoAnnotations: return "no-annotations";
    case ErrorCode::kUnderIdentified: return "under-identified";
    case ErrorCode::kTrainingDiverged: return "training-diverged";
    case ErrorCode::kRejectedStale: return "rejected-stale";
    case ErrorCode::kStaleTask: return "stale-task";
    case ErrorCode::kOutOfBounds: return "out-of-bounds";
    case ErrorCode::kUnknownTask: return "unknown-task";
    case ErrorCode::kWrongRole: return "wrong-role";
    case ErrorCode::kIoError: return "io-error";
    case ErrorCode::kParseError: return "parse-error";
  }
  return "unknown-error";
}

}  // namespace cfnav
