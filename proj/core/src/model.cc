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

#include "llevc/model.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace llevc {

namespace {

void CheckColumns(const Matrix& m, int expected, const char* what) {
  if (m.cols() != expected) {
    throw Error(ErrorCode::kShapeError,
                std::string(what) + " has " + std::to_string(m.cols()) +
                    " columns, expected " + std::to_string(expected));
  }
}

DenseLayer MakeLayer(int in, int out, std::mt19937_64& rng) {
  const double limit = std::sqrt(3.0 / in);
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseLayer layer;
  layer.weight.resize(out, in);
  for (Eigen::Index r = 0; r < out; ++r) {
    for (Eigen::Index c = 0; c < in; ++c) layer.weight(r, c) = dist(rng);
  }
  layer.bias = Vector::Zero(out);
  return layer;
}

DenseLayer ZeroLayerLike(const DenseLayer& l) {
  return {Matrix::Zero(l.weight.rows(), l.weight.cols()),
          Vector::Zero(l.bias.size())};
}

GaussianEncoderParams MakeEncoder(int in, const ModelConfig& cfg,
                                  std::mt19937_64& rng) {
  GaussianEncoderParams enc;
  int width = in;
  for (int w : cfg.encoder_widths) {
    enc.hidden.push_back(MakeLayer(width, w, rng));
    width = w;
  }
  enc.mean_head = MakeLayer(width, cfg.latent_dim, rng);
  enc.logvar_head = MakeLayer(width, cfg.latent_dim, rng);
  return enc;
}

Matrix Affine(const Matrix& x, const DenseLayer& layer) {
  Matrix a = x * layer.weight.transpose();
  a.rowwise() += layer.bias.transpose();
  return a;
}

void Activate(Activation act, Matrix* a) {
  if (act == Activation::kTanh) {
    *a = a->array().tanh().matrix();
  } else {
    *a = a->cwiseMax(0.0);
  }
}

// Derivative of the activation expressed through its output.
Matrix ActivationGrad(Activation act, const Matrix& h) {
  if (act == Activation::kTanh) return (1.0 - h.array().square()).matrix();
  return (h.array() > 0.0).cast<double>().matrix();
}

void AccumulateLayerGrad(const Matrix& d_pre, const Matrix& input,
                         DenseLayer* grad) {
  grad->weight.noalias() += d_pre.transpose() * input;
  grad->bias += d_pre.colwise().sum().transpose();
}

// Slot of each 1-based decoder layer in the speaker bias vector, or -1.
std::vector<int> SiteSlots(const ModelConfig& cfg) {
  std::vector<int> slots(cfg.decoder_widths.size(), -1);
  for (std::size_t j = 0; j < cfg.bias_sites.size(); ++j) {
    slots[cfg.bias_sites[j] - 1] = static_cast<int>(j);
  }
  return slots;
}

const SpeakerBiases* LookupSpeaker(const Model& model,
                                   const SpeakerId& speaker) {
  if (!speaker) return nullptr;
  auto it = model.params.speaker_biases.find(*speaker);
  if (it == model.params.speaker_biases.end()) {
    throw Error(ErrorCode::kUnknownSpeaker,
                "no speaker bias for '" + *speaker + "'");
  }
  return &it->second;
}

template <typename Partition, typename Ref, typename Span>
std::vector<Ref> CollectParameters(Partition& p) {
  std::vector<Ref> refs;
  auto add_matrix = [&](std::string name, ParamGroup g, auto& m) {
    refs.push_back(Ref{std::move(name), g, Span(m.data(), m.size())});
  };
  auto add_layer = [&](const std::string& prefix, ParamGroup g, auto& layer) {
    add_matrix(prefix + ".weight", g, layer.weight);
    add_matrix(prefix + ".bias", g, layer.bias);
  };
  auto add_encoder = [&](const std::string& prefix, ParamGroup g, auto& enc) {
    for (std::size_t i = 0; i < enc.hidden.size(); ++i) {
      add_layer(prefix + ".hidden" + std::to_string(i), g, enc.hidden[i]);
    }
    add_layer(prefix + ".mean", g, enc.mean_head);
    add_layer(prefix + ".logvar", g, enc.logvar_head);
  };
  add_encoder("lenc", ParamGroup::kLinguisticEncoder, p.linguistic_encoder);
  add_encoder("aenc", ParamGroup::kAcousticEncoder, p.acoustic_encoder);
  for (std::size_t i = 0; i < p.decoder_core.hidden.size(); ++i) {
    add_layer("dec.hidden" + std::to_string(i), ParamGroup::kDecoderCore,
              p.decoder_core.hidden[i]);
  }
  add_layer("dec.output", ParamGroup::kDecoderCore, p.decoder_core.output);
  for (auto& [id, biases] : p.speaker_biases) {
    for (std::size_t j = 0; j < biases.size(); ++j) {
      add_matrix("spk." + id + ".site" + std::to_string(j),
                 ParamGroup::kSpeakerBias, biases[j]);
    }
  }
  return refs;
}

}  // namespace

void ValidateModelConfig(const ModelConfig& cfg) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "model config: " + what);
  };
  if (cfg.ling_dim < 1 || cfg.mel_dim < 1 || cfg.latent_dim < 1) {
    fail("dimensions must be >= 1");
  }
  if (cfg.decoder_widths.empty()) fail("decoder needs at least one layer");
  for (int w : cfg.encoder_widths) {
    if (w < 1) fail("encoder widths must be >= 1");
  }
  for (int w : cfg.decoder_widths) {
    if (w < 1) fail("decoder widths must be >= 1");
  }
  std::set<int> seen;
  for (int site : cfg.bias_sites) {
    if (site < 1 || site > static_cast<int>(cfg.decoder_widths.size())) {
      fail("bias site " + std::to_string(site) + " outside decoder layers");
    }
    if (!seen.insert(site).second) fail("duplicate bias site");
  }
  if (!(cfg.logvar_min < cfg.logvar_max)) fail("logvar_min >= logvar_max");
}

std::string_view ParamGroupName(ParamGroup group) {
  switch (group) {
    case ParamGroup::kLinguisticEncoder: return "linguistic_encoder";
    case ParamGroup::kAcousticEncoder: return "acoustic_encoder";
    case ParamGroup::kDecoderCore: return "decoder_core";
    case ParamGroup::kSpeakerBias: return "speaker_bias";
  }
  return "unknown";
}

std::vector<ParamRef> NamedParameters(ParameterPartition& params) {
  return CollectParameters<ParameterPartition, ParamRef, std::span<double>>(
      params);
}

std::vector<ConstParamRef> NamedParameters(const ParameterPartition& params) {
  return CollectParameters<const ParameterPartition, ConstParamRef,
                           std::span<const double>>(params);
}

ParameterPartition ZerosLike(const ParameterPartition& params) {
  auto zero_encoder = [](const GaussianEncoderParams& e) {
    GaussianEncoderParams z;
    for (const auto& l : e.hidden) z.hidden.push_back(ZeroLayerLike(l));
    z.mean_head = ZeroLayerLike(e.mean_head);
    z.logvar_head = ZeroLayerLike(e.logvar_head);
    return z;
  };
  ParameterPartition z;
  z.linguistic_encoder = zero_encoder(params.linguistic_encoder);
  z.acoustic_encoder = zero_encoder(params.acoustic_encoder);
  for (const auto& l : params.decoder_core.hidden) {
    z.decoder_core.hidden.push_back(ZeroLayerLike(l));
  }
  z.decoder_core.output = ZeroLayerLike(params.decoder_core.output);
  for (const auto& [id, biases] : params.speaker_biases) {
    SpeakerBiases zb;
    for (const auto& b : biases) zb.push_back(Vector::Zero(b.size()));
    z.speaker_biases.emplace(id, std::move(zb));
  }
  return z;
}

SpeakerBiases ZeroSpeakerBiases(const ModelConfig& cfg) {
  SpeakerBiases biases;
  for (int site : cfg.bias_sites) {
    biases.push_back(Vector::Zero(cfg.decoder_widths[site - 1]));
  }
  return biases;
}

Model InitializeModel(const ModelConfig& cfg,
                      const std::vector<std::string>& speakers) {
  ValidateModelConfig(cfg);
  std::mt19937_64 rng(cfg.init_seed);
  Model model;
  model.config = cfg;
  model.params.linguistic_encoder = MakeEncoder(cfg.ling_dim, cfg, rng);
  model.params.acoustic_encoder = MakeEncoder(cfg.mel_dim, cfg, rng);
  int width = cfg.latent_dim;
  for (int w : cfg.decoder_widths) {
    model.params.decoder_core.hidden.push_back(MakeLayer(width, w, rng));
    width = w;
  }
  model.params.decoder_core.output = MakeLayer(width, cfg.mel_dim, rng);
  for (const auto& id : speakers) {
    model.params.speaker_biases[id] = ZeroSpeakerBiases(cfg);
  }
  return model;
}

EncoderTrace EncoderForward(const GaussianEncoderParams& enc,
                            const Matrix& input, const ModelConfig& cfg) {
  EncoderTrace trace;
  trace.activations.reserve(enc.hidden.size() + 1);
  trace.activations.push_back(input);
  for (const auto& layer : enc.hidden) {
    Matrix h = Affine(trace.activations.back(), layer);
    Activate(cfg.activation, &h);
    trace.activations.push_back(std::move(h));
  }
  const Matrix& top = trace.activations.back();
  trace.output.means = Affine(top, enc.mean_head);
  trace.logvar_raw = Affine(top, enc.logvar_head);
  trace.output.log_vars =
      trace.logvar_raw.cwiseMax(cfg.logvar_min).cwiseMin(cfg.logvar_max);
  return trace;
}

void EncoderBackward(const GaussianEncoderParams& enc,
                     const EncoderTrace& trace, const Matrix& d_means,
                     const Matrix& d_log_vars, const ModelConfig& cfg,
                     GaussianEncoderParams* grad, Matrix* d_input) {
  const Matrix d_raw =
      d_log_vars.cwiseProduct(((trace.logvar_raw.array() > cfg.logvar_min) &&
                               (trace.logvar_raw.array() < cfg.logvar_max))
                                  .cast<double>()
                                  .matrix());
  const Matrix& top = trace.activations.back();
  AccumulateLayerGrad(d_means, top, &grad->mean_head);
  AccumulateLayerGrad(d_raw, top, &grad->logvar_head);
  Matrix d_h = d_means * enc.mean_head.weight + d_raw * enc.logvar_head.weight;
  for (std::size_t i = enc.hidden.size(); i-- > 0;) {
    const Matrix d_pre =
        d_h.cwiseProduct(ActivationGrad(cfg.activation, trace.activations[i + 1]));
    AccumulateLayerGrad(d_pre, trace.activations[i], &grad->hidden[i]);
    if (i > 0 || d_input) d_h = d_pre * enc.hidden[i].weight;
  }
  if (d_input) *d_input = std::move(d_h);
}

LatentDistributionSequence LinguisticEncode(const Matrix& x,
                                            const Model& model) {
  CheckColumns(x, model.config.ling_dim, "linguistic features");
  return EncoderForward(model.params.linguistic_encoder, x, model.config)
      .output;
}

LatentDistributionSequence AcousticEncode(const Matrix& y,
                                          const Model& model) {
  CheckColumns(y, model.config.mel_dim, "mel spectrogram");
  return EncoderForward(model.params.acoustic_encoder, y, model.config).output;
}

Matrix StandardNormal(Eigen::Index rows, Eigen::Index cols, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

Matrix SampleLatent(const LatentDistributionSequence& d, const Matrix& noise) {
  return d.means +
         (0.5 * d.log_vars.array()).exp().matrix().cwiseProduct(noise);
}

Matrix SampleLatent(const LatentDistributionSequence& d, uint64_t seed) {
  return SampleLatent(d, StandardNormal(d.means.rows(), d.means.cols(), seed));
}

DecoderTrace DecoderForward(const Matrix& z, const SpeakerId& speaker,
                            const Model& model) {
  const ModelConfig& cfg = model.config;
  CheckColumns(z, cfg.latent_dim, "latent sequence");
  const SpeakerBiases* biases = LookupSpeaker(model, speaker);
  const std::vector<int> slots = SiteSlots(cfg);
  const auto& core = model.params.decoder_core;

  DecoderTrace trace;
  trace.activations.reserve(core.hidden.size() + 1);
  trace.activations.push_back(z);
  for (std::size_t i = 0; i < core.hidden.size(); ++i) {
    Matrix a = Affine(trace.activations.back(), core.hidden[i]);
    if (biases && slots[i] >= 0) {
      a.rowwise() += (*biases)[slots[i]].transpose();
    }
    Activate(cfg.activation, &a);
    trace.activations.push_back(std::move(a));
  }
  trace.output = Affine(trace.activations.back(), core.output);
  return trace;
}

void DecoderBackward(const Model& model, const DecoderTrace& trace,
                     const SpeakerId& speaker, const Matrix& d_output,
                     DecoderCoreParams* grad_core, SpeakerBiases* grad_speaker,
                     Matrix* d_z) {
  const ModelConfig& cfg = model.config;
  const auto& core = model.params.decoder_core;
  const std::vector<int> slots = SiteSlots(cfg);
  AccumulateLayerGrad(d_output, trace.activations.back(), &grad_core->output);
  Matrix d_h = d_output * core.output.weight;
  for (std::size_t i = core.hidden.size(); i-- > 0;) {
    const Matrix d_pre =
        d_h.cwiseProduct(ActivationGrad(cfg.activation, trace.activations[i + 1]));
    AccumulateLayerGrad(d_pre, trace.activations[i], &grad_core->hidden[i]);
    if (speaker && grad_speaker && slots[i] >= 0) {
      (*grad_speaker)[slots[i]] += d_pre.colwise().sum().transpose();
    }
    if (i > 0 || d_z) d_h = d_pre * core.hidden[i].weight;
  }
  if (d_z) *d_z = std::move(d_h);
}

Matrix Decode(const Matrix& z, const SpeakerId& speaker, const Model& model) {
  return DecoderForward(z, speaker, model).output;
}

Model StripSpeakerParams(const Model& model) {
  Model stripped = model;
  stripped.params.speaker_biases.clear();
  return stripped;
}

}  // namespace llevc
