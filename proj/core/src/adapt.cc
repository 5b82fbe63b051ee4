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

#include "llevc/adapt.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "llevc/losses.h"

namespace llevc {

namespace {

void CheckMels(const Model& model, const std::vector<Matrix>& mels) {
  if (mels.empty()) {
    throw Error(ErrorCode::kNoAdaptationData, "no target utterances given");
  }
  for (const auto& m : mels) {
    if (m.cols() != model.config.mel_dim || m.rows() < 1) {
      throw Error(ErrorCode::kShapeError,
                  "adaptation mel is " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()) + ", model expects " +
                      std::to_string(model.config.mel_dim) + " bands");
    }
  }
}

double TotalFrames(const std::vector<const Matrix*>& batch) {
  double n = 0.0;
  for (const auto* m : batch) n += static_cast<double>(m->rows());
  return n;
}

}  // namespace

double AdaptationLoss(const Model& model, const std::vector<Matrix>& mels) {
  std::vector<const Matrix*> all;
  for (const auto& m : mels) all.push_back(&m);
  return AdaptLossAndGradients(model, all, false, nullptr);
}

double AdaptLossAndGradients(const Model& model,
                             const std::vector<const Matrix*>& batch,
                             bool encoder_gradients,
                             ParameterPartition* grads) {
  if (grads) *grads = ZerosLike(model.params);
  const double total_frames = TotalFrames(batch);
  if (total_frames == 0.0) return 0.0;
  double loss = 0.0;
  for (const Matrix* y : batch) {
    if (y->cols() != model.config.mel_dim) {
      throw Error(ErrorCode::kShapeError, "adaptation mel width");
    }
    const double weight = y->rows() / total_frames;
    const EncoderTrace enc =
        EncoderForward(model.params.acoustic_encoder, *y, model.config);
    const DecoderTrace dec =
        DecoderForward(MeanLatent(enc.output), std::nullopt, model);
    loss += weight * Mae(dec.output, *y);
    if (!grads) continue;
    Matrix d_z;
    DecoderBackward(model, dec, std::nullopt,
                    weight * MaeGradient(dec.output, *y), &grads->decoder_core,
                    nullptr, encoder_gradients ? &d_z : nullptr);
    if (encoder_gradients) {
      EncoderBackward(model.params.acoustic_encoder, enc, d_z,
                      Matrix::Zero(d_z.rows(), d_z.cols()), model.config,
                      &grads->acoustic_encoder, nullptr);
    }
  }
  return loss;
}

AdaptResult AdaptTarget(const Model& base, const std::vector<Matrix>& mels,
                        const AdaptConfig& cfg) {
  CheckMels(base, mels);
  if (cfg.max_steps < 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_steps must be >= 0");
  }
  AdaptResult result;
  result.model = StripSpeakerParams(base);
  Model& model = result.model;

  std::set<ParamGroup> trainable = {ParamGroup::kDecoderCore};
  if (!cfg.freeze_acoustic_encoder) trainable.insert(ParamGroup::kAcousticEncoder);
  AdamState adam = InitAdam(model.params);

  // With a frozen encoder the posterior means never change.
  std::vector<Matrix> cached_latents;
  if (cfg.freeze_acoustic_encoder) {
    for (const auto& y : mels) cached_latents.push_back(MeanLatent(AcousticEncode(y, model)));
  }

  const int64_t n = static_cast<int64_t>(mels.size());
  const int64_t batch_size = std::max(1, cfg.batch_size);
  std::vector<int64_t> order(n);
  int64_t cached_epoch = -1;
  for (int64_t step = 0; step < cfg.max_steps; ++step) {
    std::vector<int64_t> picks;
    for (int64_t j = 0; j < batch_size; ++j) {
      const int64_t slot = step * batch_size + j;
      const int64_t epoch = slot / n;
      if (epoch != cached_epoch) {
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(MixSeed(cfg.seed, 21, epoch));
        std::shuffle(order.begin(), order.end(), rng);
        cached_epoch = epoch;
      }
      picks.push_back(order[slot % n]);
    }

    ParameterPartition grads;
    double loss = 0.0;
    if (cfg.freeze_acoustic_encoder) {
      grads = ZerosLike(model.params);
      double total_frames = 0.0;
      for (int64_t i : picks) total_frames += static_cast<double>(mels[i].rows());
      for (int64_t i : picks) {
        const double weight = mels[i].rows() / total_frames;
        const DecoderTrace dec = DecoderForward(cached_latents[i], std::nullopt, model);
        loss += weight * Mae(dec.output, mels[i]);
        DecoderBackward(model, dec, std::nullopt,
                        weight * MaeGradient(dec.output, mels[i]),
                        &grads.decoder_core, nullptr, nullptr);
      }
    } else {
      std::vector<const Matrix*> batch;
      for (int64_t i : picks) batch.push_back(&mels[i]);
      loss = AdaptLossAndGradients(model, batch, true, &grads);
    }
    if (!std::isfinite(loss)) {
      throw DivergenceError("non-finite adaptation loss at step " +
                                std::to_string(step),
                            "");
    }
    AdamStep(cfg.adam, trainable, grads, &model.params, &adam);
    result.loss_history.push_back(loss);
  }
  return result;
}

}  // namespace llevc
