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

#ifndef LLEVC_TRAIN_H_
#define LLEVC_TRAIN_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "llevc/checkpoint.h"
#include "llevc/corpus.h"
#include "llevc/losses.h"
#include "llevc/model.h"
#include "llevc/optimizer.h"

namespace llevc {

struct TrainConfig {
  double beta = 0.25;
  int batch_size = 8;  // utterances per step
  int max_steps = 2000;
  double validation_fraction = 0.1;
  uint64_t seed = 0;
  AdamConfig adam;  // learning rate 1e-3
  TieDirection tie_direction = TieDirection::kAcousticToLinguistic;
  // Weight of an extra Mae(Dec(z^A), y) term; zero disables it.
  double acoustic_reconstruction_weight = 0.0;
  // Progress line to stdout every N steps; 0 is silent.
  int log_every = 0;
  // Snapshot (with optimizer state) every N steps into checkpoint_dir.
  int checkpoint_every = 0;
  std::filesystem::path checkpoint_dir;
};

struct TrainingUtterance {
  std::string utterance_id;
  std::string speaker_id;
  Matrix linguistic;
  Matrix mel;
};

struct TrainStepRecord {
  int64_t step = 0;
  LossBreakdown loss;
};

struct TrainReport {
  std::vector<TrainStepRecord> history;
  LossBreakdown validation;
  LossBreakdown initial_validation;
  int train_utterances = 0;
  int validation_utterances = 0;
  double wall_clock_seconds = 0.0;
};

std::string TrainReportToJson(const TrainReport& report);

// Reads the transcribed entries of a manifest (those with a feature file)
// and computes their mel spectrograms. Paths resolve against root.
std::vector<TrainingUtterance> LoadTrainingData(
    const CorpusManifest& manifest, const std::filesystem::path& root,
    const FrameConfig& frame);

// Holds out the last round(fraction * n) utterances of each speaker (at
// least one when the speaker has two or more).
std::pair<std::vector<TrainingUtterance>, std::vector<TrainingUtterance>>
SplitTrainValidation(const std::vector<TrainingUtterance>& data,
                     double fraction);

// Frame-weighted training loss over a batch. When grads is non-null it
// receives the gradient of total with respect to every parameter group.
// The latent noise for utterance i comes from MixSeed(noise_seed, i).
LossBreakdown TrainLossAndGradients(
    const Model& model, const std::vector<const TrainingUtterance*>& batch,
    const TrainConfig& cfg, uint64_t noise_seed, ParameterPartition* grads);

// Deterministic evaluation loss (fixed noise stream).
LossBreakdown EvaluateTrainLoss(const Model& model,
                                const std::vector<TrainingUtterance>& data,
                                const TrainConfig& cfg);

struct TrainState {
  Model model;
  AdamState optimizer;
  int64_t step = 0;
};

TrainState InitTrainState(const std::vector<TrainingUtterance>& train_set,
                          const ModelConfig& mcfg);

// Runs from state->step up to (not including) until_step. Appends to
// report->history. Batches and noise depend only on (seed, step), so a
// state restored from a snapshot continues the same trajectory.
void RunTrainingSteps(TrainState* state,
                      const std::vector<TrainingUtterance>& train_set,
                      const TrainConfig& cfg, int64_t until_step,
                      TrainReport* report);

Checkpoint ToCheckpoint(const TrainState& state);
TrainState FromCheckpoint(const Checkpoint& ckpt);

// Joint training of both encoders, the decoder core and the speaker
// biases. Throws kNoTranscribedData when fewer than two speakers have
// linguistic features and DivergenceError on a non-finite loss.
std::pair<Model, TrainReport> TrainJoint(
    const std::vector<TrainingUtterance>& data, const ModelConfig& mcfg,
    const TrainConfig& tcfg);

std::pair<Model, TrainReport> TrainJoint(const CorpusManifest& manifest,
                                         const std::filesystem::path& root,
                                         const FrameConfig& frame,
                                         const ModelConfig& mcfg,
                                         const TrainConfig& tcfg);

}  // namespace llevc

#endif  // LLEVC_TRAIN_H_
