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

#ifndef LLEVC_EVAL_H_
#define LLEVC_EVAL_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "llevc/adapt.h"
#include "llevc/corpus.h"
#include "llevc/model.h"
#include "llevc/signal.h"

namespace llevc {

inline constexpr int kMcdOrder = 13;

// Orthonormal DCT-II of each log-mel row, coefficients 0..D-1.
Matrix MelCepstrum(const Matrix& log_mel);

// Mel-cepstral distortion in dB over coefficients 1..kMcdOrder, averaged
// over frames. Frame counts must match (kShapeError).
double Mcd(const Matrix& a, const Matrix& b);

struct LabeledSequence {
  Matrix frames;
  std::string label;
};

struct ProbeConfig {
  double train_fraction = 0.7;
  double l2 = 1e-3;
  int iterations = 300;
  double learning_rate = 0.05;
  uint64_t seed = 0;
};

// Frame-level multinomial logistic regression on standardized features.
// Sequences (not frames) are split per label into train and held-out sets;
// returns held-out frame accuracy. Throws kDegenerateLabels for fewer than
// two labels and kInvalidArgument for fewer than ten sequences per label.
double SpeakerProbe(const std::vector<LabeledSequence>& data,
                    const ProbeConfig& cfg);

enum class ScenarioId { kAAA, kAAB, kABA, kABB, kBBBReference };

std::string_view ScenarioName(ScenarioId id);
ScenarioId ParseScenarioId(std::string_view name);

struct ScenarioSpec {
  ScenarioId id = ScenarioId::kAAA;
  Language adapt_language = Language::kA;
  Language convert_language = Language::kA;
  std::string target_speaker;
  std::vector<std::string> source_speakers;
};

// Language the base model for this scenario was trained on.
Language BaseLanguage(ScenarioId id);
// Throws kInvalidScenario if the id disagrees with the language fields.
void ValidateScenario(const ScenarioSpec& spec);

// Speakers and utterance counts used by the scenario matrix. Targets are
// bilingual: each can be rendered in either language.
struct EvalSetup {
  std::vector<SyntheticSpeaker> speakers;
  int adaptation_utterances = 20;
  int eval_utterances_per_source = 5;
  UtterancePlanConfig utterance;
  FrameConfig frame;
  uint64_t seed = 0;

  const SyntheticSpeaker& Speaker(const std::string& id) const;
};

struct EvalSetupConfig {
  int targets_per_language = 1;
  int sources_per_language = 2;
  int adaptation_utterances = 20;
  int eval_utterances_per_source = 5;
};

// Fresh speakers ("target-A0", "source-B1", ...) never present in a
// training corpus built from a different seed.
EvalSetup MakeEvalSetup(const EvalSetupConfig& cfg, const FrameConfig& frame,
                        uint64_t seed);

// Target speech for adaptation and (source, utterance) pairs for
// conversion are rendered deterministically from the setup seed.
std::vector<Matrix> AdaptationMels(const EvalSetup& setup,
                                   const std::string& target, Language lang);

struct EvalPair {
  std::string scenario;
  std::string source;
  std::string target;
  std::string utterance;
  double mcd = 0.0;
  double baseline_mcd = 0.0;  // MCD(source, reference): do-nothing
  int frames_in = 0;
  int frames_out = 0;
};

struct ScenarioSummary {
  std::string scenario;
  int count = 0;
  double mcd_mean = 0.0;
  double mcd_std = 0.0;
  double baseline_mean = 0.0;
};

struct EvalReport {
  std::vector<EvalPair> pairs;
  std::vector<ScenarioSummary> summaries;
  std::map<std::string, double> probe_accuracies;
  bool durations_preserved = true;
  std::map<std::string, std::string> metadata;

  const ScenarioSummary* Summary(std::string_view scenario) const;
};

// Base models keyed by the language they were trained on.
using BaseCheckpoints = std::map<Language, Model>;

// Adapts the base model per scenario (cached per target and adaptation
// language), converts every source utterance and scores it against the
// target's parallel reference. Throws kMissingCheckpoint and
// kInvalidScenario.
EvalReport RunScenarios(const std::vector<ScenarioSpec>& specs,
                        const BaseCheckpoints& checkpoints,
                        const EvalSetup& setup, const AdaptConfig& adapt);

// Every scenario id against every target in the setup, skipping
// BB-B-reference when include_reference is false.
std::vector<ScenarioSpec> DefaultScenarios(const EvalSetup& setup,
                                           bool include_reference);

std::string EvalReportToJson(const EvalReport& report);
std::string EvalReportToCsv(const EvalReport& report);

}  // namespace llevc

#endif  // LLEVC_EVAL_H_
