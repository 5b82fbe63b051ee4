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

#include "llevc/losses.h"

#include <string>

namespace llevc {

namespace {

void CheckSameShape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeError,
                std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " +
                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

void CheckDistributions(const LatentDistributionSequence& q,
                        const LatentDistributionSequence& p) {
  CheckSameShape(q.means, q.log_vars, "q means/log_vars");
  CheckSameShape(p.means, p.log_vars, "p means/log_vars");
  CheckSameShape(q.means, p.means, "kld");
}

}  // namespace

double Mae(const Matrix& pred, const Matrix& target) {
  CheckSameShape(pred, target, "mae");
  if (pred.size() == 0) return 0.0;
  return (pred - target).cwiseAbs().sum() / static_cast<double>(pred.size());
}

Matrix MaeGradient(const Matrix& pred, const Matrix& target) {
  CheckSameShape(pred, target, "mae");
  const double n = static_cast<double>(pred.size());
  return (pred - target).array().sign().matrix() / n;
}

double GaussianKld(const LatentDistributionSequence& q,
                   const LatentDistributionSequence& p) {
  CheckDistributions(q, p);
  if (q.means.size() == 0) return 0.0;
  const auto lq = q.log_vars.array();
  const auto lp = p.log_vars.array();
  const auto diff = q.means.array() - p.means.array();
  const auto kl = 0.5 * (lp - lq) +
                  (lq.exp() + diff.square()) / (2.0 * lp.exp()) - 0.5;
  return kl.sum() / static_cast<double>(q.means.size());
}

KldGradient GaussianKldGradient(const LatentDistributionSequence& q,
                                const LatentDistributionSequence& p) {
  CheckDistributions(q, p);
  const double n = static_cast<double>(q.means.size());
  const auto lq = q.log_vars.array();
  const auto inv_vp = (-p.log_vars.array()).exp();
  const auto diff = q.means.array() - p.means.array();
  KldGradient g;
  g.q_means = (diff * inv_vp / n).matrix();
  g.p_means = -g.q_means;
  g.q_log_vars = ((-0.5 + 0.5 * lq.exp() * inv_vp) / n).matrix();
  g.p_log_vars =
      ((0.5 - 0.5 * (lq.exp() + diff.square()) * inv_vp) / n).matrix();
  return g;
}

LossBreakdown LossTrain(const Matrix& y_tilde_l, const Matrix& y,
                        const LatentDistributionSequence& q,
                        const LatentDistributionSequence& p, double beta) {
  LossBreakdown loss;
  loss.beta = beta;
  loss.loss_main = Mae(y_tilde_l, y);
  loss.loss_tie = GaussianKld(q, p);
  loss.total = loss.loss_main + beta * loss.loss_tie;
  return loss;
}

}  // namespace llevc
