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

#ifndef LLEVC_CHECKPOINT_H_
#define LLEVC_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "llevc/model.h"
#include "llevc/optimizer.h"

namespace llevc {

// Binary container:
//   magic "LLVC", u32 version, u64 header length, JSON header (model
//   config, metadata, tensor table), then raw little-endian float64 tensor
//   data in table order.
inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  std::map<std::string, std::string> metadata;
  // Present only for mid-training snapshots.
  std::optional<AdamState> optimizer;
  int64_t step = 0;
};

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
void SaveCheckpoint(const std::filesystem::path& path, const Model& model);

// Throws kIncompatibleCheckpoint on a version mismatch and
// kCorruptCheckpoint on a bad magic, truncation or inconsistent content.
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// 64-bit FNV-1a of the file's bytes, as 16 hex digits.
std::string FileHash(const std::filesystem::path& path);

}  // namespace llevc

#endif  // LLEVC_CHECKPOINT_H_
