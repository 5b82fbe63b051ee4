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

#ifndef LLEVC_TESTS_TEST_UTIL_H_
#define LLEVC_TESTS_TEST_UTIL_H_

#include <cmath>
#include <algorithm>
#include <complex>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "llevc/common.h"
#include "llevc/model.h"
#include "llevc/signal.h"
#include "llevc/train.h"

namespace llevc::testing {

inline Matrix RandomMatrix(Eigen::Index rows, Eigen::Index cols, uint64_t seed,
                           double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  }
  return m;
}

// Small network for finite-difference checks and fast unit tests.
inline ModelConfig TinyModelConfig() {
  ModelConfig cfg;
  cfg.ling_dim = 5;
  cfg.mel_dim = 6;
  cfg.latent_dim = 3;
  cfg.encoder_widths = {7, 5};
  cfg.decoder_widths = {6, 5};
  cfg.bias_sites = {1, 2};
  cfg.init_seed = 17;
  return cfg;
}

// Random non-zero values everywhere, including biases that start at zero.
inline void Perturb(ParameterPartition* params, uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& ref : NamedParameters(*params)) {
    for (double& v : ref.values) v += u(rng);
  }
}

// Perturbed tiny model with three speakers; the third has no utterances in
// GradientCheckBatch.
inline Model GradientCheckModel(const ModelConfig& cfg) {
  Model m = InitializeModel(cfg, {"s0", "s1", "s2"});
  Perturb(&m.params, 55, 0.15);
  return m;
}

inline std::vector<TrainingUtterance> GradientCheckBatch(const ModelConfig& cfg) {
  std::vector<TrainingUtterance> data;
  const std::vector<std::pair<std::string, int>> spec = {{"s0", 6}, {"s1", 9}, {"s0", 4}};
  uint64_t seed = 100;
  for (const auto& [spk, frames] : spec) {
    TrainingUtterance u;
    u.utterance_id = spk + std::to_string(seed);
    u.speaker_id = spk;
    u.linguistic = RandomMatrix(frames, cfg.ling_dim, seed++);
    u.mel = RandomMatrix(frames, cfg.mel_dim, seed++, 2.0);
    data.push_back(u);
  }
  return data;
}

// Textbook O(N^2) DFT of one real frame, bins 0..N/2.
inline std::vector<std::complex<double>> NaiveRealDft(
    const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * t) / n;
      acc += x[t] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

inline double NormalLogPdf(double z, double mean, double var) {
  return -0.5 * (z - mean) * (z - mean) / var -
         0.5 * std::log(2.0 * std::numbers::pi * var);
}

// KL(N(mq, e^lq) || N(mp, e^lp)) by composite Simpson quadrature on [-20, 20].
inline double QuadratureKl(double mq, double lq, double mp, double lp) {
  const double vq = std::exp(lq), vp = std::exp(lp);
  const int n = 200000;
  const double a = -20.0, b = 20.0, h = (b - a) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double z = a + i * h;
    const double log_q = NormalLogPdf(z, mq, vq);
    const double f = std::exp(log_q) * (log_q - NormalLogPdf(z, mp, vp));
    acc += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return acc * h / 3.0;
}

inline double BruteForceMae(const Matrix& a, const Matrix& b) {
  long double acc = 0.0L;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      acc += std::fabs(static_cast<long double>(a(i, j)) - b(i, j));
    }
  }
  return static_cast<double>(acc / (a.rows() * a.cols()));
}

// Direct-summation MCD with an explicit cosine sum per coefficient 1..13.
inline double BruteForceMcd(const Matrix& a, const Matrix& b) {
  const int d = static_cast<int>(a.cols());
  double total = 0.0;
  for (Eigen::Index t = 0; t < a.rows(); ++t) {
    double acc = 0.0;
    for (int k = 1; k <= 13; ++k) {
      double ca = 0.0, cb = 0.0;
      for (int n = 0; n < d; ++n) {
        const double basis = std::sqrt(2.0 / d) *
                             std::cos(std::numbers::pi * k * (2 * n + 1) / (2.0 * d));
        ca += basis * a(t, n);
        cb += basis * b(t, n);
      }
      acc += (ca - cb) * (ca - cb);
    }
    total += 10.0 / std::log(10.0) * std::sqrt(2.0 * acc);
  }
  return total / a.rows();
}

struct TensorGradientError {
  std::string name;
  ParamGroup group;
  double relative_error = 0.0;  // zero when both gradients vanish
};

// Central differences over every entry of every tensor in the listed groups.
// The relative error of a tensor is |analytic - numeric| / max(|analytic|,
// |numeric|) in the Euclidean norm.
inline std::vector<TensorGradientError> FiniteDifferenceCheck(
    Model model, const ParameterPartition& analytic,
    const std::vector<ParamGroup>& groups,
    const std::function<double(const Model&)>& loss, double step = 1e-5) {
  std::vector<TensorGradientError> out;
  auto params = NamedParameters(model.params);
  const auto grads = NamedParameters(analytic);
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (std::find(groups.begin(), groups.end(), params[t].group) == groups.end()) continue;
    double diff_sq = 0.0, a_sq = 0.0, n_sq = 0.0;
    for (std::size_t i = 0; i < params[t].values.size(); ++i) {
      double& v = params[t].values[i];
      const double saved = v;
      v = saved + step;
      const double up = loss(model);
      v = saved - step;
      const double down = loss(model);
      v = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = grads[t].values[i];
      diff_sq += (a - numeric) * (a - numeric);
      a_sq += a * a;
      n_sq += numeric * numeric;
    }
    const double scale = std::max(std::sqrt(a_sq), std::sqrt(n_sq));
    out.push_back({params[t].name, params[t].group,
                   scale < 1e-12 ? 0.0 : std::sqrt(diff_sq) / scale});
  }
  return out;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("llevc_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace llevc::testing

#endif  // LLEVC_TESTS_TEST_UTIL_H_
