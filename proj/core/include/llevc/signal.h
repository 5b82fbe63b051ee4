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

#ifndef LLEVC_SIGNAL_H_
#define LLEVC_SIGNAL_H_

#include <complex>
#include <vector>

#include "llevc/common.h"

namespace llevc {

// Framing and filterbank settings shared by analysis and inversion.
struct FrameConfig {
  int sample_rate = 22050;
  int fft_size = 1024;
  int window_size = 1024;
  int hop_size = 256;
  int mel_dim = 80;
  double fmin = 0.0;
  double fmax = 11025.0;
  double log_floor = 1e-5;

  bool operator==(const FrameConfig&) const = default;
};

void ValidateFrameConfig(const FrameConfig& cfg);

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 22050;
};

// Log-mel frames, natural log, T x mel_dim.
struct MelSpectrogram {
  Matrix frames;
  FrameConfig config;

  Eigen::Index num_frames() const { return frames.rows(); }
};

using ComplexMatrix = Eigen::MatrixXcd;

// Number of full windows that fit in a signal of the given length.
Eigen::Index NumFrames(std::size_t num_samples, const FrameConfig& cfg);

// Length of the signal reconstructed from num_frames frames.
std::size_t NumSamplesForFrames(Eigen::Index num_frames,
                                const FrameConfig& cfg);

// Periodic Hann window of length cfg.window_size.
Vector HannWindow(int length);

// Triangular HTK-mel filterbank, mel_dim x (fft_size/2 + 1), no area
// normalization. Rows are ordered by ascending center frequency.
class MelFilterbank {
 public:
  explicit MelFilterbank(const FrameConfig& cfg);

  const Matrix& weights() const { return weights_; }
  // Center frequency of band k in Hz.
  double CenterHz(int band) const { return centers_hz_[band]; }

 private:
  Matrix weights_;
  std::vector<double> centers_hz_;
};

double HzToMel(double hz);
double MelToHz(double mel);

// Hann-windowed short-time Fourier transform without center padding.
// Frame t covers samples [t*hop, t*hop + window). Throws kInputTooShort.
ComplexMatrix Stft(const Waveform& w, const FrameConfig& cfg);

// log(max(filterbank * |stft|, log_floor)), T x mel_dim.
MelSpectrogram ComputeMelSpectrogram(const Waveform& w, const FrameConfig& cfg);

// Same as above with a caller-owned filterbank, for batch extraction.
MelSpectrogram ComputeMelSpectrogram(const Waveform& w, const FrameConfig& cfg,
                                     const MelFilterbank& fb);

// Non-negative linear magnitude estimate (T x bins) whose filterbank
// projection approximates exp(mel). Clipped pseudo-inverse refined with
// multiplicative NNLS updates.
Matrix MelToLinearMagnitude(const MelSpectrogram& mel,
                            int nnls_iterations = 50);

// Weighted overlap-add inverse of Stft. Output length is
// (T-1)*hop + window.
Waveform InverseStft(const ComplexMatrix& spectrum, const FrameConfig& cfg);

// Griffin-Lim phase reconstruction starting from zero phase.
Waveform GriffinLimInvert(const MelSpectrogram& mel, int iterations);

// Phase reconstruction from a linear magnitude target.
Waveform GriffinLimFromMagnitude(const Matrix& magnitude,
                                 const FrameConfig& cfg, int iterations);

}  // namespace llevc

#endif  // LLEVC_SIGNAL_H_
