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

#include "llevc/optimizer.h"

#include <cmath>

namespace llevc {

AdamState InitAdam(const ParameterPartition& params) {
  return {ZerosLike(params), ZerosLike(params), 0};
}

void AdamStep(const AdamConfig& cfg, const std::set<ParamGroup>& trainable,
              const ParameterPartition& grads, ParameterPartition* params,
              AdamState* state) {
  auto p = NamedParameters(*params);
  const auto g = NamedParameters(grads);
  auto m = NamedParameters(state->first_moment);
  auto v = NamedParameters(state->second_moment);
  if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
    throw Error(ErrorCode::kShapeError,
                "optimizer state does not match parameter structure");
  }
  ++state->steps;
  const double t = static_cast<double>(state->steps);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!trainable.contains(p[i].group)) continue;
    auto& pv = p[i].values;
    const auto& gv = g[i].values;
    auto& mv = m[i].values;
    auto& vv = v[i].values;
    for (std::size_t k = 0; k < pv.size(); ++k) {
      mv[k] = cfg.beta1 * mv[k] + (1.0 - cfg.beta1) * gv[k];
      vv[k] = cfg.beta2 * vv[k] + (1.0 - cfg.beta2) * gv[k] * gv[k];
      const double m_hat = mv[k] / correction1;
      const double v_hat = vv[k] / correction2;
      pv[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace llevc
