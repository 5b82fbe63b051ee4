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

#include "llevc/audio_io.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace llevc {

namespace {

void PutU16(std::vector<char>* out, uint16_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>((v >> 8) & 0xff));
}

void PutU32(std::vector<char>* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t GetU32(const char* p) {
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  return u[0] | (u[1] << 8) | (u[2] << 16) | (static_cast<uint32_t>(u[3]) << 24);
}

uint16_t GetU16(const char* p) {
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  return static_cast<uint16_t>(u[0] | (u[1] << 8));
}

std::vector<char> ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

void WriteAll(const std::filesystem::path& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

}  // namespace

void WriteWav(const std::filesystem::path& path, const Waveform& w) {
  const uint32_t data_bytes = static_cast<uint32_t>(w.samples.size() * 2);
  std::vector<char> bytes;
  bytes.reserve(44 + data_bytes);
  bytes.insert(bytes.end(), {'R', 'I', 'F', 'F'});
  PutU32(&bytes, 36 + data_bytes);
  bytes.insert(bytes.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  PutU32(&bytes, 16);
  PutU16(&bytes, 1);  // PCM
  PutU16(&bytes, 1);  // mono
  PutU32(&bytes, static_cast<uint32_t>(w.sample_rate));
  PutU32(&bytes, static_cast<uint32_t>(w.sample_rate) * 2);
  PutU16(&bytes, 2);
  PutU16(&bytes, 16);
  bytes.insert(bytes.end(), {'d', 'a', 't', 'a'});
  PutU32(&bytes, data_bytes);
  for (double s : w.samples) {
    const double clipped = std::clamp(s, -1.0, 1.0);
    const auto v = static_cast<int16_t>(std::lround(clipped * 32767.0));
    PutU16(&bytes, static_cast<uint16_t>(v));
  }
  WriteAll(path, bytes);
}

Waveform ReadWav(const std::filesystem::path& path) {
  const std::vector<char> bytes = ReadAll(path);
  auto bad = [&](const std::string& why) {
    return Error(ErrorCode::kIoError, path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw bad("not a RIFF/WAVE file");
  }
  Waveform w;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* chunk = bytes.data() + pos;
    const uint32_t size = GetU32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw bad("truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw bad("short fmt chunk");
      const uint16_t format = GetU16(bytes.data() + body);
      const uint16_t channels = GetU16(bytes.data() + body + 2);
      const uint16_t bits = GetU16(bytes.data() + body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw bad("only 16-bit PCM mono is supported");
      }
      w.sample_rate = static_cast<int>(GetU32(bytes.data() + body + 4));
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw bad("data chunk before fmt chunk");
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const auto v = static_cast<int16_t>(GetU16(bytes.data() + body + 2 * i));
        w.samples[i] = v / 32767.0;
      }
      return w;
    }
    pos = body + size + (size & 1);
  }
  throw bad("no data chunk");
}

void WriteFeatureMatrix(const std::filesystem::path& path, const Matrix& m,
                        const std::array<char, 4>& magic) {
  std::vector<char> bytes(magic.begin(), magic.end());
  PutU32(&bytes, static_cast<uint32_t>(m.rows()));
  PutU32(&bytes, static_cast<uint32_t>(m.cols()));
  PutU32(&bytes, 0);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const float f = static_cast<float>(m(r, c));
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      PutU32(&bytes, bits);
    }
  }
  WriteAll(path, bytes);
}

Matrix ReadFeatureMatrix(const std::filesystem::path& path,
                         const std::array<char, 4>& magic) {
  const std::vector<char> bytes = ReadAll(path);
  if (bytes.size() < 16 || !std::equal(magic.begin(), magic.end(), bytes.begin())) {
    throw Error(ErrorCode::kIoError,
                path.string() + ": bad magic, expected " +
                    std::string(magic.begin(), magic.end()));
  }
  const uint32_t rows = GetU32(bytes.data() + 4);
  const uint32_t cols = GetU32(bytes.data() + 8);
  if (bytes.size() != 16 + static_cast<std::size_t>(rows) * cols * 4) {
    throw Error(ErrorCode::kIoError, path.string() + ": size does not match header");
  }
  Matrix m(rows, cols);
  const char* p = bytes.data() + 16;
  for (uint32_t r = 0; r < rows; ++r) {
    for (uint32_t c = 0; c < cols; ++c, p += 4) {
      const uint32_t bits = GetU32(p);
      float f;
      std::memcpy(&f, &bits, 4);
      m(r, c) = f;
    }
  }
  return m;
}

}  // namespace llevc
