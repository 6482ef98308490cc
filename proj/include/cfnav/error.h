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

#ifndef CFNAV_ERROR_H_
#define CFNAV_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace cfnav {

// Every failure the library reports. The string form (see ErrorName) is the
// stable identifier surfaced on the CLI and over HTTP.
enum class ErrorCode {
  kInvalidArgument,
  kDegeneratePath,
  kDegenerateTarget,
  kMissingObservation,
  kInvalidRecord,
  kDuplicateRecord,
  kNoAnnotations,
  kUnderIdentified,
  kTrainingDiverged,
  kRejectedStale,
  kStaleTask,
  kOutOfBounds,
  kUnknownTask,
  kWrongRole,
  kIoError,
  kParseError,
};

std::string_view ErrorName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  std::string_view name() const { return ErrorName(code_); }

 private:
  ErrorCode code_;
};

}  // namespace cfnav

#endif  // CFNAV_ERROR_H_
