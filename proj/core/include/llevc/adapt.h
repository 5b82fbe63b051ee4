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

#ifndef LLEVC_ADAPT_H_
#define LLEVC_ADAPT_H_

#include <cstdint>
#include <vector>

#include "llevc/model.h"
#include "llevc/optimizer.h"

namespace llevc {

struct AdaptConfig {
  AdamConfig adam{1e-4};
  int max_steps = 1000;
  int batch_size = 4;
  uint64_t seed = 0;
  bool freeze_acoustic_encoder = true;
};

struct AdaptResult {
  Model model;
  std::vector<double> loss_history;
};

// Frame-weighted Mae(Dec(mean(AEnc(y)), none), y) over the utterances.
// Uses the posterior mean only, so it is a pure function of the model.
double AdaptationLoss(const Model& model, const std::vector<Matrix>& mels);

// Batch loss with gradients for the decoder core and, when
// encoder_gradients is set, the acoustic encoder. grads may be null.
double AdaptLossAndGradients(const Model& model,
                             const std::vector<const Matrix*>& batch,
                             bool encoder_gradients, ParameterPartition* grads);

// Strips all speaker biases, then fine-tunes the decoder core (and the
// acoustic encoder if not frozen) on untranscribed target speech. The
// linguistic encoder is never touched. Throws kNoAdaptationData and
// kShapeError.
AdaptResult AdaptTarget(const Model& base, const std::vector<Matrix>& mels,
                        const AdaptConfig& cfg);

}  // namespace llevc

#endif  // LLEVC_ADAPT_H_
