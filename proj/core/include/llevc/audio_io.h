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

#ifndef LLEVC_AUDIO_IO_H_
#define LLEVC_AUDIO_IO_H_

#include <array>
#include <filesystem>

#include "llevc/common.h"
#include "llevc/signal.h"

namespace llevc {

// 16-bit PCM mono RIFF/WAVE. Samples are clipped to [-1, 1] on write.
void WriteWav(const std::filesystem::path& path, const Waveform& w);
Waveform ReadWav(const std::filesystem::path& path);

// Little-endian float32 matrix with a 16-byte header:
// 4-byte magic, u32 rows, u32 cols, u32 reserved (zero).
inline constexpr std::array<char, 4> kMelMagic = {'M', 'E', 'L', 'F'};
inline constexpr std::array<char, 4> kLingMagic = {'L', 'I', 'N', 'G'};

void WriteFeatureMatrix(const std::filesystem::path& path, const Matrix& m,
                        const std::array<char, 4>& magic);
Matrix ReadFeatureMatrix(const std::filesystem::path& path,
                         const std::array<char, 4>& magic);

}  // namespace llevc

#endif  // LLEVC_AUDIO_IO_H_
