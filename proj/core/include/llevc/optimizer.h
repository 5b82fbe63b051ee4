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

#ifndef LLEVC_OPTIMIZER_H_
#define LLEVC_OPTIMIZER_H_

#include <cstdint>
#include <set>

#include "llevc/model.h"

namespace llevc {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam moments shaped like the parameters they track.
struct AdamState {
  ParameterPartition first_moment;
  ParameterPartition second_moment;
  int64_t steps = 0;
};

AdamState InitAdam(const ParameterPartition& params);

// Applies one update to every tensor whose group is in `trainable`.
// Tensors outside those groups are left bit-unchanged.
void AdamStep(const AdamConfig& cfg, const std::set<ParamGroup>& trainable,
              const ParameterPartition& grads, ParameterPartition* params,
              AdamState* state);

}  // namespace llevc

#endif  // LLEVC_OPTIMIZER_H_
