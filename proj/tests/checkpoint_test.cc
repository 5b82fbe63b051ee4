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

#include "llevc/checkpoint.h"

#include <cstring>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.h"

namespace llevc {
namespace {

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Dump(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

bool BitEqual(const ParameterPartition& a, const ParameterPartition& b) {
  const auto pa = NamedParameters(a);
  const auto pb = NamedParameters(b);
  if (pa.size() != pb.size()) return false;
  for (std::size_t t = 0; t < pa.size(); ++t) {
    if (pa[t].name != pb[t].name || pa[t].values.size() != pb[t].values.size()) return false;
    if (std::memcmp(pa[t].values.data(), pb[t].values.data(),
                    pa[t].values.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

Checkpoint Sample() {
  Checkpoint c;
  c.model = InitializeModel(testing::TinyModelConfig(), {"spkA00", "spkA01"});
  testing::Perturb(&c.model.params, 4, 0.3);
  c.model.params.decoder_core.output.bias[0] = 1.0 / 3.0;
  c.metadata = {{"adapted_for", "x"}, {"stage", "test"}};
  c.step = 42;
  AdamState adam = InitAdam(c.model.params);
  testing::Perturb(&adam.first_moment, 5, 1.0);
  testing::Perturb(&adam.second_moment, 6, 1.0);
  adam.steps = 42;
  c.optimizer = adam;
  return c;
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  testing::TempDir dir("ckpt");
  const Checkpoint c = Sample();
  SaveCheckpoint(dir.path() / "a.ckpt", c);
  const Checkpoint r = LoadCheckpoint(dir.path() / "a.ckpt");
  EXPECT_EQ(r.model.config, c.model.config);
  EXPECT_TRUE(BitEqual(r.model.params, c.model.params));
  EXPECT_EQ(r.metadata, c.metadata);
  EXPECT_EQ(r.step, 42);
  ASSERT_TRUE(r.optimizer.has_value());
  EXPECT_EQ(r.optimizer->steps, 42);
  EXPECT_TRUE(BitEqual(r.optimizer->first_moment, c.optimizer->first_moment));
  EXPECT_TRUE(BitEqual(r.optimizer->second_moment, c.optimizer->second_moment));

  SaveCheckpoint(dir.path() / "b.ckpt", r);
  EXPECT_EQ(Slurp(dir.path() / "a.ckpt"), Slurp(dir.path() / "b.ckpt"));
  EXPECT_EQ(FileHash(dir.path() / "a.ckpt"), FileHash(dir.path() / "b.ckpt"));
  EXPECT_EQ(FileHash(dir.path() / "a.ckpt").size(), 16u);
}

TEST(CheckpointTest, ModelOnlyAndStripped) {
  testing::TempDir dir("ckpt_model");
  const Model m = StripSpeakerParams(Sample().model);
  SaveCheckpoint(dir.path() / "m.ckpt", m);
  const Checkpoint r = LoadCheckpoint(dir.path() / "m.ckpt");
  EXPECT_FALSE(r.optimizer.has_value());
  EXPECT_TRUE(r.model.params.speaker_biases.empty());
  EXPECT_TRUE(BitEqual(r.model.params, m.params));
}

TEST(CheckpointTest, CorruptionDetected) {
  testing::TempDir dir("ckpt_bad");
  SaveCheckpoint(dir.path() / "a.ckpt", Sample());
  const std::string bytes = Slurp(dir.path() / "a.ckpt");
  auto expect_code = [&](const std::string& content, ErrorCode code) {
    Dump(dir.path() / "x.ckpt", content);
    try {
      LoadCheckpoint(dir.path() / "x.ckpt");
      ADD_FAILURE() << "expected " << ErrorCodeName(code);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << e.what();
    }
  };
  expect_code(bytes.substr(0, bytes.size() - 9), ErrorCode::kCorruptCheckpoint);
  expect_code(bytes.substr(0, 10), ErrorCode::kCorruptCheckpoint);
  expect_code(bytes + "extra", ErrorCode::kCorruptCheckpoint);
  std::string magic = bytes;
  magic[0] = 'X';
  expect_code(magic, ErrorCode::kCorruptCheckpoint);
  std::string version = bytes;
  version[4] = static_cast<char>(kCheckpointVersion + 1);
  expect_code(version, ErrorCode::kIncompatibleCheckpoint);
  std::string header = bytes;
  header[20] = '\x01';
  expect_code(header, ErrorCode::kCorruptCheckpoint);
}

TEST(CheckpointTest, MissingFileIsIoError) {
  try {
    LoadCheckpoint("/nonexistent/dir/none.ckpt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

}  // namespace
}  // namespace llevc
