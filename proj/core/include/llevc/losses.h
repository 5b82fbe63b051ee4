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

#ifndef LLEVC_LOSSES_H_
#define LLEVC_LOSSES_H_

#include "llevc/common.h"
#include "llevc/model.h"

namespace llevc {

// Mean over all entries of |pred - target|. Throws kShapeError.
double Mae(const Matrix& pred, const Matrix& target);

// d Mae / d pred. Entries where pred == target get a zero subgradient.
Matrix MaeGradient(const Matrix& pred, const Matrix& target);

// Mean over frames and dimensions of KL(N(q) || N(p)) for diagonal
// Gaussians given as means and log-variances. Throws kShapeError.
double GaussianKld(const LatentDistributionSequence& q,
                   const LatentDistributionSequence& p);

struct KldGradient {
  Matrix q_means;
  Matrix q_log_vars;
  Matrix p_means;
  Matrix p_log_vars;
};

KldGradient GaussianKldGradient(const LatentDistributionSequence& q,
                                const LatentDistributionSequence& p);

struct LossBreakdown {
  double loss_main = 0.0;
  double loss_tie = 0.0;
  double total = 0.0;
  double beta = 0.0;
};

// Which encoder plays the first argument of the tie divergence.
enum class TieDirection {
  kAcousticToLinguistic,  // KL(q(z|y) || p(z|x))
  kLinguisticToAcoustic,  // KL(p(z|x) || q(z|y))
};

// loss_main = Mae(y_tilde_l, y), loss_tie = GaussianKld(q, p),
// total = loss_main + beta * loss_tie.
LossBreakdown LossTrain(const Matrix& y_tilde_l, const Matrix& y,
                        const LatentDistributionSequence& q,
                        const LatentDistributionSequence& p, double beta);

}  // namespace llevc

#endif  // LLEVC_LOSSES_H_
