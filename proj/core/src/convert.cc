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

#include "llevc/convert.h"

#include <string>

namespace llevc {

ConvertedMel ConvertMel(const MelSpectrogram& source, const Model& model) {
  ConvertedMel out;
  out.not_adapted = !model.params.speaker_biases.empty();
  const Matrix z = MeanLatent(AcousticEncode(source.frames, model));
  out.mel.frames = Decode(z, std::nullopt, model);
  out.mel.config = source.config;
  return out;
}

Waveform GriffinLimVocoder::Synthesize(const MelSpectrogram& mel,
                                       const FrameConfig& frame) const {
  MelSpectrogram framed = mel;
  framed.config = frame;
  return GriffinLimInvert(framed, iterations_);
}

VocoderKind ParseVocoderKind(std::string_view name) {
  if (name == "griffin_lim" || name == "griffin-lim") return VocoderKind::kGriffinLim;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown vocoder '" + std::string(name) + "'");
}

std::unique_ptr<Vocoder> MakeVocoder(VocoderKind kind) {
  switch (kind) {
    case VocoderKind::kGriffinLim:
      return std::make_unique<GriffinLimVocoder>();
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown vocoder");
}

ConvertedWaveform ConvertWaveform(const Waveform& source, const Model& model,
                                  const Vocoder& vocoder,
                                  const FrameConfig& frame) {
  const MelSpectrogram mel = ComputeMelSpectrogram(source, frame);
  ConvertedMel converted = ConvertMel(mel, model);
  ConvertedWaveform out;
  out.waveform = vocoder.Synthesize(converted.mel, frame);
  out.mel = std::move(converted.mel);
  out.not_adapted = converted.not_adapted;
  return out;
}

ConvertedWaveform ConvertWaveform(const Waveform& source, const Model& model,
                                  VocoderKind vocoder,
                                  const FrameConfig& frame) {
  return ConvertWaveform(source, model, *MakeVocoder(vocoder), frame);
}

}  // namespace llevc
