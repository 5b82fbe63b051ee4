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

#include "llevc/signal.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace llevc {

namespace {

// FFTW's planner is not thread-safe; execution with the new-array API is.
// Plans are created once per size under a lock and shared afterwards.
class RealFftPlan {
 public:
  explicit RealFftPlan(int n) : n_(n) {
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    forward_ = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(n, out, in, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
  }
  ~RealFftPlan() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  RealFftPlan(const RealFftPlan&) = delete;
  RealFftPlan& operator=(const RealFftPlan&) = delete;

  fftw_plan forward() const { return forward_; }
  fftw_plan backward() const { return backward_; }
  int size() const { return n_; }

 private:
  int n_;
  fftw_plan forward_;
  fftw_plan backward_;
};

const RealFftPlan& PlanFor(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<RealFftPlan>> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = plans[n];
  if (!slot) slot = std::make_unique<RealFftPlan>(n);
  return *slot;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

// Scratch buffers with FFTW's alignment, owned per call.
struct FftBuffers {
  explicit FftBuffers(int n)
      : real(fftw_alloc_real(n)), spectrum(fftw_alloc_complex(n / 2 + 1)) {}
  std::unique_ptr<double, FftwDeleter> real;
  std::unique_ptr<fftw_complex, FftwDeleter> spectrum;
};

}  // namespace

void ValidateFrameConfig(const FrameConfig& cfg) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "frame config: " + what);
  };
  if (cfg.sample_rate <= 0) fail("sample_rate must be positive");
  if (cfg.hop_size <= 0) fail("hop_size must be positive");
  if (cfg.hop_size > cfg.window_size) fail("hop_size exceeds window_size");
  if (cfg.window_size > cfg.fft_size) fail("window_size exceeds fft_size");
  if (cfg.fft_size % 2 != 0) fail("fft_size must be even");
  if (cfg.mel_dim <= 0) fail("mel_dim must be positive");
  if (!(cfg.fmin >= 0.0 && cfg.fmin < cfg.fmax)) fail("need 0 <= fmin < fmax");
  if (cfg.fmax > cfg.sample_rate / 2.0) fail("fmax above Nyquist");
  if (!(cfg.log_floor > 0.0)) fail("log_floor must be positive");
}

Eigen::Index NumFrames(std::size_t num_samples, const FrameConfig& cfg) {
  if (num_samples < static_cast<std::size_t>(cfg.window_size)) return 0;
  return 1 + static_cast<Eigen::Index>((num_samples - cfg.window_size) /
                                       cfg.hop_size);
}

std::size_t NumSamplesForFrames(Eigen::Index num_frames,
                                const FrameConfig& cfg) {
  if (num_frames <= 0) return 0;
  return static_cast<std::size_t>(num_frames - 1) * cfg.hop_size +
         cfg.window_size;
}

Vector HannWindow(int length) {
  Vector w(length);
  for (int n = 0; n < length; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
  }
  return w;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank::MelFilterbank(const FrameConfig& cfg) {
  ValidateFrameConfig(cfg);
  const int bins = cfg.fft_size / 2 + 1;
  const int bands = cfg.mel_dim;
  weights_ = Matrix::Zero(bands, bins);
  centers_hz_.resize(bands);

  const double mel_lo = HzToMel(cfg.fmin);
  const double mel_hi = HzToMel(cfg.fmax);
  std::vector<double> edges(bands + 2);
  for (int i = 0; i < bands + 2; ++i) {
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (bands + 1));
  }
  const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.fft_size;
  for (int m = 0; m < bands; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    centers_hz_[m] = center;
    for (int k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      const double rise = (f - left) / (center - left);
      const double fall = (right - f) / (right - center);
      weights_(m, k) = std::max(0.0, std::min(rise, fall));
    }
    // Narrow low bands can fall between two bins.
    if (weights_.row(m).maxCoeff() <= 0.0) {
      const int nearest =
          std::clamp(static_cast<int>(std::lround(center / bin_hz)), 0,
                     bins - 1);
      weights_(m, nearest) = 1.0;
    }
  }
}

ComplexMatrix Stft(const Waveform& w, const FrameConfig& cfg) {
  ValidateFrameConfig(cfg);
  if (w.sample_rate != cfg.sample_rate) {
    throw Error(ErrorCode::kInvalidArgument,
                "waveform sample rate " + std::to_string(w.sample_rate) +
                    " does not match frame config " +
                    std::to_string(cfg.sample_rate));
  }
  if (w.samples.size() < static_cast<std::size_t>(cfg.window_size)) {
    throw Error(ErrorCode::kInputTooShort,
                std::to_string(w.samples.size()) +
                    " samples, need at least " +
                    std::to_string(cfg.window_size));
  }
  const Eigen::Index frames = NumFrames(w.samples.size(), cfg);
  const int n = cfg.fft_size;
  const int bins = n / 2 + 1;
  const Vector window = HannWindow(cfg.window_size);
  const RealFftPlan& plan = PlanFor(n);
  FftBuffers buf(n);
  double* in = buf.real.get();
  fftw_complex* out = buf.spectrum.get();

  ComplexMatrix spec(frames, bins);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * cfg.hop_size;
    for (int i = 0; i < cfg.window_size; ++i) {
      in[i] = w.samples[start + i] * window[i];
    }
    std::fill(in + cfg.window_size, in + n, 0.0);
    fftw_execute_dft_r2c(plan.forward(), in, out);
    for (int k = 0; k < bins; ++k) {
      spec(t, k) = std::complex<double>(out[k][0], out[k][1]);
    }
  }
  return spec;
}

MelSpectrogram ComputeMelSpectrogram(const Waveform& w,
                                     const FrameConfig& cfg) {
  return ComputeMelSpectrogram(w, cfg, MelFilterbank(cfg));
}

MelSpectrogram ComputeMelSpectrogram(const Waveform& w, const FrameConfig& cfg,
                                     const MelFilterbank& fb) {
  const Matrix magnitude = Stft(w, cfg).cwiseAbs();
  Matrix energy = magnitude * fb.weights().transpose();
  MelSpectrogram mel;
  mel.config = cfg;
  mel.frames = energy.array().max(cfg.log_floor).log().matrix();
  return mel;
}

Matrix MelToLinearMagnitude(const MelSpectrogram& mel, int nnls_iterations) {
  const FrameConfig& cfg = mel.config;
  if (mel.frames.cols() != cfg.mel_dim || mel.frames.rows() < 1) {
    throw Error(ErrorCode::kShapeError, "mel spectrogram has " +
                                            std::to_string(mel.frames.cols()) +
                                            " bands, config says " +
                                            std::to_string(cfg.mel_dim));
  }
  const MelFilterbank fb(cfg);
  const Matrix& basis = fb.weights();  // D x F
  const Matrix target = mel.frames.array().exp().matrix().transpose();  // D x T
  const Matrix pinv = basis.completeOrthogonalDecomposition().pseudoInverse();

  const double seed_level = 1e-6 * target.maxCoeff();
  Matrix x = (pinv * target).cwiseMax(0.0).array() + seed_level;  // F x T
  const Matrix numerator = basis.transpose() * target;
  for (int it = 0; it < nnls_iterations; ++it) {
    const Matrix denominator = basis.transpose() * (basis * x);
    x = x.cwiseProduct(numerator).cwiseQuotient(
        (denominator.array() + 1e-30).matrix());
  }
  return x.transpose();
}

Waveform InverseStft(const ComplexMatrix& spectrum, const FrameConfig& cfg) {
  ValidateFrameConfig(cfg);
  const int n = cfg.fft_size;
  const int bins = n / 2 + 1;
  if (spectrum.cols() != bins) {
    throw Error(ErrorCode::kShapeError, "spectrum has " +
                                            std::to_string(spectrum.cols()) +
                                            " bins, expected " +
                                            std::to_string(bins));
  }
  const Eigen::Index frames = spectrum.rows();
  const std::size_t length = NumSamplesForFrames(frames, cfg);
  const Vector window = HannWindow(cfg.window_size);
  const RealFftPlan& plan = PlanFor(n);
  FftBuffers buf(n);
  double* time = buf.real.get();
  fftw_complex* freq = buf.spectrum.get();

  std::vector<double> signal(length, 0.0);
  std::vector<double> norm(length, 0.0);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int k = 0; k < bins; ++k) {
      freq[k][0] = spectrum(t, k).real();
      freq[k][1] = spectrum(t, k).imag();
    }
    fftw_execute_dft_c2r(plan.backward(), freq, time);
    const std::size_t start = static_cast<std::size_t>(t) * cfg.hop_size;
    for (int i = 0; i < cfg.window_size; ++i) {
      signal[start + i] += time[i] / n * window[i];
      norm[start + i] += window[i] * window[i];
    }
  }
  Waveform out;
  out.sample_rate = cfg.sample_rate;
  out.samples.resize(length);
  for (std::size_t i = 0; i < length; ++i) {
    out.samples[i] = norm[i] > 1e-8 ? signal[i] / norm[i] : 0.0;
  }
  return out;
}

Waveform GriffinLimFromMagnitude(const Matrix& magnitude,
                                 const FrameConfig& cfg, int iterations) {
  if (iterations < 0) {
    throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 0");
  }
  ComplexMatrix estimate = magnitude.cast<std::complex<double>>();
  Waveform w = InverseStft(estimate, cfg);
  for (int it = 0; it < iterations; ++it) {
    const ComplexMatrix rebuilt = Stft(w, cfg);
    for (Eigen::Index t = 0; t < estimate.rows(); ++t) {
      for (Eigen::Index k = 0; k < estimate.cols(); ++k) {
        const double mag = std::abs(rebuilt(t, k));
        estimate(t, k) = mag > 1e-12 ? rebuilt(t, k) * (magnitude(t, k) / mag)
                                     : std::complex<double>(magnitude(t, k));
      }
    }
    w = InverseStft(estimate, cfg);
  }
  return w;
}

Waveform GriffinLimInvert(const MelSpectrogram& mel, int iterations) {
  return GriffinLimFromMagnitude(MelToLinearMagnitude(mel), mel.config,
                                 iterations);
}

}  // namespace llevc
