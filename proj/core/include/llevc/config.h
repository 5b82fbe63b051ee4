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

#ifndef LLEVC_CONFIG_H_
#define LLEVC_CONFIG_H_

#include <filesystem>
#include <string>

#include "llevc/adapt.h"
#include "llevc/corpus.h"
#include "llevc/eval.h"
#include "llevc/model.h"
#include "llevc/signal.h"
#include "llevc/train.h"

namespace llevc {

// Everything the command-line pipeline needs. Defaults: 22050 Hz, 80 mel
// bands, 64-dim latent, beta 0.25, decoder speaker biases at layers 5-8.
struct PipelineConfig {
  FrameConfig signal;
  int griffin_lim_iterations = 60;
  CorpusConfig corpus;
  ModelConfig model;
  TrainConfig train;
  AdaptConfig adapt;
  EvalSetupConfig eval;
  ProbeConfig probe;
};

// INI with sections [signal] [corpus] [model] [train] [adapt] [eval]
// [probe]. Unknown keys and malformed values throw kConfigError.
PipelineConfig ParsePipelineConfig(const std::string& text);
PipelineConfig LoadPipelineConfig(const std::filesystem::path& path);

// Serialized form with every key spelled out.
std::string PipelineConfigToIni(const PipelineConfig& cfg);

}  // namespace llevc

#endif  // LLEVC_CONFIG_H_
