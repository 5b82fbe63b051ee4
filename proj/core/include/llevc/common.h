// Copyright 2026 The llevc Authors
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

#ifndef LLEVC_COMMON_H_
#define LLEVC_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

namespace llevc {

// Frames are rows, feature dimensions are columns.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

enum class ErrorCode {
  kInputTooShort,
  kShapeError,
  kUnknownPhoneme,
  kUnknownSpeaker,
  kIoError,
  kNoTranscribedData,
  kDivergence,
  kIncompatibleCheckpoint,
  kCorruptCheckpoint,
  kNoAdaptationData,
  kNotAdapted,
  kDegenerateLabels,
  kMissingCheckpoint,
  kInvalidScenario,
  kInvalidArgument,
  kConfigError,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// CLI can map it to an exit status and a stable diagnostic name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Training blew up. Points at the most recent checkpoint written before the
// non-finite loss, or is empty when none was written.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, std::string last_good)
      : Error(ErrorCode::kDivergence,
              message + " (last good checkpoint: " +
                  (last_good.empty() ? std::string("none") : last_good) + ")"),
        last_good_checkpoint_(std::move(last_good)) {}

  const std::string& last_good_checkpoint() const {
    return last_good_checkpoint_;
  }

 private:
  std::string last_good_checkpoint_;
};

// Derives an independent 64-bit stream seed from a base seed and a tag
// sequence (splitmix64 finalizer).
uint64_t MixSeed(uint64_t base, uint64_t a, uint64_t b = 0, uint64_t c = 0);

}  // namespace llevc

#endif  // LLEVC_COMMON_H_
