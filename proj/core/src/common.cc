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

#include "llevc/common.h"

namespace llevc {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInputTooShort: return "InputTooShort";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kUnknownPhoneme: return "UnknownPhoneme";
    case ErrorCode::kUnknownSpeaker: return "UnknownSpeaker";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kNoTranscribedData: return "NoTranscribedData";
    case ErrorCode::kDivergence: return "DivergenceError";
    case ErrorCode::kIncompatibleCheckpoint: return "IncompatibleCheckpoint";
    case ErrorCode::kCorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::kNoAdaptationData: return "NoAdaptationData";
    case ErrorCode::kNotAdapted: return "NotAdapted";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kMissingCheckpoint: return "MissingCheckpoint";
    case ErrorCode::kInvalidScenario: return "InvalidScenario";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

uint64_t MixSeed(uint64_t base, uint64_t a, uint64_t b, uint64_t c) {
  auto mix = [](uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  uint64_t h = mix(base);
  h = mix(h ^ a);
  h = mix(h ^ b);
  h = mix(h ^ c);
  return h;
}

}  // namespace llevc
