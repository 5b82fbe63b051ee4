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

#include "llevc/train.h"

#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "llevc/audio_io.h"

namespace llevc {

namespace {

using json = nlohmann::json;

const std::set<ParamGroup> kAllGroups = {
    ParamGroup::kLinguisticEncoder, ParamGroup::kAcousticEncoder,
    ParamGroup::kDecoderCore, ParamGroup::kSpeakerBias};

json LossToJson(const LossBreakdown& l) {
  return {{"loss_main", l.loss_main},
          {"loss_tie", l.loss_tie},
          {"total", l.total},
          {"beta", l.beta}};
}

// d/d(log_var) of means + exp(0.5 log_var) * noise, given d/dz.
Matrix ReparamLogVarGrad(const Matrix& d_z, const Matrix& log_vars,
                         const Matrix& noise) {
  return (d_z.array() * noise.array() * 0.5 * (0.5 * log_vars.array()).exp())
      .matrix();
}

std::vector<std::string> SpeakersOf(const std::vector<TrainingUtterance>& data) {
  std::set<std::string> ids;
  for (const auto& u : data) ids.insert(u.speaker_id);
  return {ids.begin(), ids.end()};
}

}  // namespace

std::string TrainReportToJson(const TrainReport& report) {
  json j;
  j["history"] = json::array();
  for (const auto& rec : report.history) {
    json r = LossToJson(rec.loss);
    r["step"] = rec.step;
    j["history"].push_back(std::move(r));
  }
  j["initial_validation"] = LossToJson(report.initial_validation);
  j["validation"] = LossToJson(report.validation);
  j["train_utterances"] = report.train_utterances;
  j["validation_utterances"] = report.validation_utterances;
  j["wall_clock_seconds"] = report.wall_clock_seconds;
  return j.dump(1);
}

std::vector<TrainingUtterance> LoadTrainingData(
    const CorpusManifest& manifest, const std::filesystem::path& root,
    const FrameConfig& frame) {
  const MelFilterbank fb(frame);
  std::vector<TrainingUtterance> data;
  for (const auto& e : manifest.entries) {
    if (!e.features_path) continue;
    TrainingUtterance u;
    u.utterance_id = e.utterance_id;
    u.speaker_id = e.speaker_id;
    u.linguistic = ReadFeatureMatrix(root / *e.features_path, kLingMagic);
    u.mel = ComputeMelSpectrogram(ReadWav(root / e.waveform_path), frame, fb)
                .frames;
    if (u.mel.rows() != u.linguistic.rows()) {
      throw Error(ErrorCode::kShapeError,
                  e.utterance_id + ": " + std::to_string(u.mel.rows()) +
                      " mel frames vs " + std::to_string(u.linguistic.rows()) +
                      " linguistic frames");
    }
    data.push_back(std::move(u));
  }
  return data;
}

std::pair<std::vector<TrainingUtterance>, std::vector<TrainingUtterance>>
SplitTrainValidation(const std::vector<TrainingUtterance>& data,
                     double fraction) {
  std::map<std::string, std::vector<const TrainingUtterance*>> by_speaker;
  for (const auto& u : data) by_speaker[u.speaker_id].push_back(&u);
  std::set<const TrainingUtterance*> held_out;
  for (const auto& [_, utts] : by_speaker) {
    const int n = static_cast<int>(utts.size());
    int k = static_cast<int>(std::lround(fraction * n));
    if (fraction > 0.0 && n >= 2) k = std::max(k, 1);
    k = std::min(k, n - 1);
    for (int i = n - k; i < n; ++i) held_out.insert(utts[i]);
  }
  std::vector<TrainingUtterance> train, validation;
  for (const auto& u : data) {
    (held_out.contains(&u) ? validation : train).push_back(u);
  }
  return {std::move(train), std::move(validation)};
}

LossBreakdown TrainLossAndGradients(
    const Model& model, const std::vector<const TrainingUtterance*>& batch,
    const TrainConfig& cfg, uint64_t noise_seed, ParameterPartition* grads) {
  const ModelConfig& mcfg = model.config;
  LossBreakdown loss;
  loss.beta = cfg.beta;
  if (grads) *grads = ZerosLike(model.params);
  double total_frames = 0.0;
  for (const auto* u : batch) total_frames += static_cast<double>(u->mel.rows());
  if (total_frames == 0.0) return loss;

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const TrainingUtterance& u = *batch[i];
    if (u.linguistic.rows() != u.mel.rows()) {
      throw Error(ErrorCode::kShapeError, u.utterance_id + ": frame mismatch");
    }
    if (u.linguistic.cols() != mcfg.ling_dim || u.mel.cols() != mcfg.mel_dim) {
      throw Error(ErrorCode::kShapeError, u.utterance_id + ": feature width");
    }
    const double weight = u.mel.rows() / total_frames;
    const SpeakerId speaker = u.speaker_id;

    const EncoderTrace ling =
        EncoderForward(model.params.linguistic_encoder, u.linguistic, mcfg);
    const EncoderTrace acou =
        EncoderForward(model.params.acoustic_encoder, u.mel, mcfg);
    const LatentDistributionSequence& p = ling.output;
    const LatentDistributionSequence& q = acou.output;
    const Matrix noise =
        StandardNormal(u.mel.rows(), mcfg.latent_dim, MixSeed(noise_seed, i));
    const DecoderTrace dec = DecoderForward(SampleLatent(p, noise), speaker, model);

    const bool forward_kl = cfg.tie_direction == TieDirection::kAcousticToLinguistic;
    double main = Mae(dec.output, u.mel);
    const double tie = forward_kl ? GaussianKld(q, p) : GaussianKld(p, q);

    Matrix noise_a;
    DecoderTrace dec_a;
    const bool acoustic_term = cfg.acoustic_reconstruction_weight != 0.0;
    if (acoustic_term) {
      noise_a = StandardNormal(u.mel.rows(), mcfg.latent_dim,
                               MixSeed(noise_seed, i, 1));
      dec_a = DecoderForward(SampleLatent(q, noise_a), speaker, model);
      main += cfg.acoustic_reconstruction_weight * Mae(dec_a.output, u.mel);
    }
    loss.loss_main += weight * main;
    loss.loss_tie += weight * tie;

    if (!grads) continue;
    SpeakerBiases& grad_spk = grads->speaker_biases.at(u.speaker_id);
    Matrix d_z;
    DecoderBackward(model, dec, speaker, weight * MaeGradient(dec.output, u.mel),
                    &grads->decoder_core, &grad_spk, &d_z);
    Matrix d_p_means = d_z;
    Matrix d_p_log_vars = ReparamLogVarGrad(d_z, p.log_vars, noise);

    KldGradient kg = forward_kl ? GaussianKldGradient(q, p) : GaussianKldGradient(p, q);
    if (!forward_kl) {
      std::swap(kg.q_means, kg.p_means);
      std::swap(kg.q_log_vars, kg.p_log_vars);
    }
    const double tie_scale = weight * cfg.beta;
    d_p_means += tie_scale * kg.p_means;
    d_p_log_vars += tie_scale * kg.p_log_vars;
    Matrix d_q_means = tie_scale * kg.q_means;
    Matrix d_q_log_vars = tie_scale * kg.q_log_vars;

    if (acoustic_term) {
      Matrix d_z_a;
      DecoderBackward(model, dec_a, speaker,
                      weight * cfg.acoustic_reconstruction_weight *
                          MaeGradient(dec_a.output, u.mel),
                      &grads->decoder_core, &grad_spk, &d_z_a);
      d_q_means += d_z_a;
      d_q_log_vars += ReparamLogVarGrad(d_z_a, q.log_vars, noise_a);
    }
    EncoderBackward(model.params.linguistic_encoder, ling, d_p_means,
                    d_p_log_vars, mcfg, &grads->linguistic_encoder, nullptr);
    EncoderBackward(model.params.acoustic_encoder, acou, d_q_means,
                    d_q_log_vars, mcfg, &grads->acoustic_encoder, nullptr);
  }
  loss.total = loss.loss_main + cfg.beta * loss.loss_tie;
  return loss;
}

LossBreakdown EvaluateTrainLoss(const Model& model,
                                const std::vector<TrainingUtterance>& data,
                                const TrainConfig& cfg) {
  std::vector<const TrainingUtterance*> all;
  for (const auto& u : data) all.push_back(&u);
  return TrainLossAndGradients(model, all, cfg, MixSeed(cfg.seed, 99), nullptr);
}

TrainState InitTrainState(const std::vector<TrainingUtterance>& train_set,
                          const ModelConfig& mcfg) {
  TrainState state;
  state.model = InitializeModel(mcfg, SpeakersOf(train_set));
  state.optimizer = InitAdam(state.model.params);
  return state;
}

void RunTrainingSteps(TrainState* state,
                      const std::vector<TrainingUtterance>& train_set,
                      const TrainConfig& cfg, int64_t until_step,
                      TrainReport* report) {
  const int64_t n = static_cast<int64_t>(train_set.size());
  if (n == 0) throw Error(ErrorCode::kNoTranscribedData, "empty training set");
  const int64_t batch_size = std::max(1, cfg.batch_size);
  int64_t cached_epoch = -1;
  std::vector<int64_t> order(n);
  std::string last_good;

  for (int64_t step = state->step; step < until_step; ++step) {
    std::vector<const TrainingUtterance*> batch;
    for (int64_t j = 0; j < batch_size; ++j) {
      const int64_t slot = step * batch_size + j;
      const int64_t epoch = slot / n;
      if (epoch != cached_epoch) {
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(MixSeed(cfg.seed, 11, epoch));
        std::shuffle(order.begin(), order.end(), rng);
        cached_epoch = epoch;
      }
      batch.push_back(&train_set[order[slot % n]]);
    }
    ParameterPartition grads;
    const LossBreakdown loss = TrainLossAndGradients(
        state->model, batch, cfg, MixSeed(cfg.seed, 12, step), &grads);
    if (!std::isfinite(loss.total)) {
      throw DivergenceError("non-finite loss at step " + std::to_string(step),
                            last_good);
    }
    AdamStep(cfg.adam, kAllGroups, grads, &state->model.params,
             &state->optimizer);
    state->step = step + 1;
    if (report) report->history.push_back({step, loss});
    if (cfg.log_every > 0 && (step % cfg.log_every == 0 || step + 1 == until_step)) {
      std::cout << "step " << step << " loss_main " << loss.loss_main
                << " loss_tie " << loss.loss_tie << " total " << loss.total
                << std::endl;
    }
    if (cfg.checkpoint_every > 0 && state->step % cfg.checkpoint_every == 0) {
      std::filesystem::create_directories(cfg.checkpoint_dir);
      const auto path = cfg.checkpoint_dir /
                        ("step_" + std::to_string(state->step) + ".ckpt");
      SaveCheckpoint(path, ToCheckpoint(*state));
      last_good = path.string();
    }
  }
}

Checkpoint ToCheckpoint(const TrainState& state) {
  Checkpoint ckpt;
  ckpt.model = state.model;
  ckpt.optimizer = state.optimizer;
  ckpt.step = state.step;
  return ckpt;
}

TrainState FromCheckpoint(const Checkpoint& ckpt) {
  TrainState state;
  state.model = ckpt.model;
  state.optimizer = ckpt.optimizer ? *ckpt.optimizer : InitAdam(ckpt.model.params);
  state.step = ckpt.step;
  return state;
}

std::pair<Model, TrainReport> TrainJoint(
    const std::vector<TrainingUtterance>& data, const ModelConfig& mcfg,
    const TrainConfig& tcfg) {
  if (tcfg.beta < 0.0 || tcfg.max_steps < 0) {
    throw Error(ErrorCode::kInvalidArgument, "beta and max_steps must be >= 0");
  }
  const auto speakers = SpeakersOf(data);
  if (speakers.size() < 2) {
    throw Error(ErrorCode::kNoTranscribedData,
                "need transcribed data from at least two speakers, got " +
                    std::to_string(speakers.size()));
  }
  const auto start = std::chrono::steady_clock::now();
  auto [train_set, validation_set] =
      SplitTrainValidation(data, tcfg.validation_fraction);
  const auto& eval_set = validation_set.empty() ? train_set : validation_set;

  TrainState state;
  state.model = InitializeModel(mcfg, speakers);
  state.optimizer = InitAdam(state.model.params);

  TrainReport report;
  report.train_utterances = static_cast<int>(train_set.size());
  report.validation_utterances = static_cast<int>(validation_set.size());
  report.initial_validation = EvaluateTrainLoss(state.model, eval_set, tcfg);
  RunTrainingSteps(&state, train_set, tcfg, tcfg.max_steps, &report);
  report.validation = EvaluateTrainLoss(state.model, eval_set, tcfg);
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return {std::move(state.model), std::move(report)};
}

std::pair<Model, TrainReport> TrainJoint(const CorpusManifest& manifest,
                                         const std::filesystem::path& root,
                                         const FrameConfig& frame,
                                         const ModelConfig& mcfg,
                                         const TrainConfig& tcfg) {
  const auto data = LoadTrainingData(manifest, root, frame);
  if (data.empty()) {
    throw Error(ErrorCode::kNoTranscribedData,
                "manifest has no entries with linguistic features");
  }
  return TrainJoint(data, mcfg, tcfg);
}

}  // namespace llevc
