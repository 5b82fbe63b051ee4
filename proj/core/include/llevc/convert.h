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

#ifndef LLEVC_CONVERT_H_
#define LLEVC_CONVERT_H_

#include <memory>
#include <string_view>

#include "llevc/model.h"
#include "llevc/signal.h"

namespace llevc {

struct ConvertedMel {
  MelSpectrogram mel;
  // Set when the model still carries speaker biases. Conversion still runs
  // with no speaker bias; the caller decides whether to surface it.
  bool not_adapted = false;
};

// Dec(mean(AEnc(source)), none). Frame count is preserved.
ConvertedMel ConvertMel(const MelSpectrogram& source, const Model& model);

class Vocoder {
 public:
  virtual ~Vocoder() = default;
  virtual Waveform Synthesize(const MelSpectrogram& mel,
                              const FrameConfig& frame) const = 0;
};

class GriffinLimVocoder : public Vocoder {
 public:
  explicit GriffinLimVocoder(int iterations = 60) : iterations_(iterations) {}
  Waveform Synthesize(const MelSpectrogram& mel,
                      const FrameConfig& frame) const override;

 private:
  int iterations_;
};

enum class VocoderKind { kGriffinLim };

VocoderKind ParseVocoderKind(std::string_view name);
std::unique_ptr<Vocoder> MakeVocoder(VocoderKind kind);

struct ConvertedWaveform {
  Waveform waveform;
  MelSpectrogram mel;
  bool not_adapted = false;
};

ConvertedWaveform ConvertWaveform(const Waveform& source, const Model& model,
                                  const Vocoder& vocoder,
                                  const FrameConfig& frame);
ConvertedWaveform ConvertWaveform(const Waveform& source, const Model& model,
                                  VocoderKind vocoder,
                                  const FrameConfig& frame);

}  // namespace llevc

#endif  // LLEVC_CONVERT_H_
