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

#ifndef LLEVC_MODEL_H_
#define LLEVC_MODEL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "llevc/common.h"

namespace llevc {

enum class Activation { kTanh, kRelu };

struct ModelConfig {
  int ling_dim = 15;
  int mel_dim = 80;
  int latent_dim = 64;
  std::vector<int> encoder_widths = {256, 256, 256, 256};
  std::vector<int> decoder_widths = {256, 256, 256, 256, 256, 256, 256, 256};
  // 1-based decoder hidden layers that receive a per-speaker additive bias
  // before their activation.
  std::vector<int> bias_sites = {5, 6, 7, 8};
  Activation activation = Activation::kTanh;
  double logvar_min = -10.0;
  double logvar_max = 2.0;
  uint64_t init_seed = 0;

  bool operator==(const ModelConfig&) const = default;
};

void ValidateModelConfig(const ModelConfig& cfg);

// y = x W^T + b applied row-wise. weight is out x in.
struct DenseLayer {
  Matrix weight;
  Vector bias;
};

struct GaussianEncoderParams {
  std::vector<DenseLayer> hidden;
  DenseLayer mean_head;
  DenseLayer logvar_head;
};

struct DecoderCoreParams {
  std::vector<DenseLayer> hidden;
  DenseLayer output;
};

// One bias vector per bias site, each as wide as its host layer.
using SpeakerBiases = std::vector<Vector>;

// The four parameter groups: linguistic encoder, acoustic encoder, the
// speaker-independent decoder core and the per-speaker decoder biases.
struct ParameterPartition {
  GaussianEncoderParams linguistic_encoder;
  GaussianEncoderParams acoustic_encoder;
  DecoderCoreParams decoder_core;
  std::map<std::string, SpeakerBiases> speaker_biases;
};

enum class ParamGroup {
  kLinguisticEncoder,
  kAcousticEncoder,
  kDecoderCore,
  kSpeakerBias,
};

std::string_view ParamGroupName(ParamGroup group);

struct ParamRef {
  std::string name;
  ParamGroup group;
  std::span<double> values;
};

struct ConstParamRef {
  std::string name;
  ParamGroup group;
  std::span<const double> values;
};

// Every trainable tensor, in a fixed order that depends only on the
// partition's structure. Two partitions with the same structure list their
// tensors in the same order under the same names.
std::vector<ParamRef> NamedParameters(ParameterPartition& params);
std::vector<ConstParamRef> NamedParameters(const ParameterPartition& params);

// Same structure, all values zero.
ParameterPartition ZerosLike(const ParameterPartition& params);

struct Model {
  ModelConfig config;
  ParameterPartition params;
};

// Fan-in scaled uniform weights, zero biases, zero speaker biases for every
// listed speaker.
Model InitializeModel(const ModelConfig& cfg,
                      const std::vector<std::string>& speakers);

// Zero-initialized bias vectors for one speaker.
SpeakerBiases ZeroSpeakerBiases(const ModelConfig& cfg);

// Per-frame diagonal Gaussian over the latent linguistic embedding.
struct LatentDistributionSequence {
  Matrix means;
  Matrix log_vars;

  Eigen::Index num_frames() const { return means.rows(); }
};

// Speaker-independent encoders. Throw kShapeError on a column mismatch.
LatentDistributionSequence LinguisticEncode(const Matrix& x,
                                            const Model& model);
LatentDistributionSequence AcousticEncode(const Matrix& y, const Model& model);

// Standard-normal draws from a seeded stream.
Matrix StandardNormal(Eigen::Index rows, Eigen::Index cols, uint64_t seed);

// means + exp(0.5 log_vars) * noise, elementwise.
Matrix SampleLatent(const LatentDistributionSequence& d, const Matrix& noise);
Matrix SampleLatent(const LatentDistributionSequence& d, uint64_t seed);

inline Matrix MeanLatent(const LatentDistributionSequence& d) {
  return d.means;
}

// Empty optional means no speaker: every bias site contributes zero.
using SpeakerId = std::optional<std::string>;

// Frame-level decoder; output has as many frames as z.
// Throws kUnknownSpeaker for an id with no bias entry.
Matrix Decode(const Matrix& z, const SpeakerId& speaker, const Model& model);

// Drops every speaker bias. Encoders and decoder core are copied verbatim.
Model StripSpeakerParams(const Model& model);

// Forward traces and backward passes used by the training loops.

struct EncoderTrace {
  std::vector<Matrix> activations;  // [0] is the input
  Matrix logvar_raw;                // before clamping
  LatentDistributionSequence output;
};

EncoderTrace EncoderForward(const GaussianEncoderParams& enc,
                            const Matrix& input, const ModelConfig& cfg);

// Accumulates into grad. d_input may be null.
void EncoderBackward(const GaussianEncoderParams& enc,
                     const EncoderTrace& trace, const Matrix& d_means,
                     const Matrix& d_log_vars, const ModelConfig& cfg,
                     GaussianEncoderParams* grad, Matrix* d_input);

struct DecoderTrace {
  std::vector<Matrix> activations;  // [0] is z
  Matrix output;
};

DecoderTrace DecoderForward(const Matrix& z, const SpeakerId& speaker,
                            const Model& model);

// Accumulates into grad_core and, when a speaker is given, grad_speaker.
// grad_speaker and d_z may be null.
void DecoderBackward(const Model& model, const DecoderTrace& trace,
                     const SpeakerId& speaker, const Matrix& d_output,
                     DecoderCoreParams* grad_core, SpeakerBiases* grad_speaker,
                     Matrix* d_z);

}  // namespace llevc

#endif  // LLEVC_MODEL_H_
