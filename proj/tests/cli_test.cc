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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "llevc/checkpoint.h"
#include "test_util.h"

namespace llevc {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunResult {
  int exit_code = -1;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("cli");
    std::ofstream(dir_->path() / "tiny.ini") <<
        "[corpus]\nspeakers_a = 2\nspeakers_b = 1\n"
        "utterances_per_speaker_a = 4\nutterances_per_speaker_b = 3\n"
        "[model]\nlatent_dim = 4\nencoder_widths = 8\ndecoder_widths = 8,8\nbias_sites = 2\n"
        "[train]\nmax_steps = 5\nbatch_size = 2\n"
        "[adapt]\nmax_steps = 5\n"
        "[eval]\nadaptation_utterances = 2\neval_utterances_per_source = 1\n"
        "sources_per_language = 1\n"
        "[signal]\ngriffin_lim_iterations = 3\n";
  }
  static void TearDownTestSuite() { delete dir_; }

  static RunResult Run(const std::string& args) {
    const fs::path err = dir_->path() / "stderr.txt";
    const std::string cmd = std::string(LLEVC_CLI_PATH) + " " + args + " > " +
                            (dir_->path() / "stdout.txt").string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = Slurp(err);
    return r;
  }

  static std::string P(const std::string& name) { return (dir_->path() / name).string(); }

  // Corpus, base checkpoint and adapted checkpoint shared by later tests.
  static void EnsurePipeline() {
    if (fs::exists(P("adapted.ckpt"))) return;
    ASSERT_EQ(Run("gen-corpus --config " + P("tiny.ini") + " --out " + P("corpus") + " --seed 3")
                  .exit_code, 0);
    ASSERT_EQ(Run("train --config " + P("tiny.ini") + " --manifest " +
                  P("corpus/manifest.jsonl") + " --out " + P("base.ckpt"))
                  .exit_code, 0);
    ASSERT_EQ(Run("adapt --config " + P("tiny.ini") + " --checkpoint " + P("base.ckpt") +
                  " --manifest " + P("corpus/manifest.jsonl") +
                  " --target-speaker spkB00 --out " + P("adapted.ckpt"))
                  .exit_code, 0);
  }

  static testing::TempDir* dir_;
};

testing::TempDir* CliTest::dir_ = nullptr;

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(Run("").exit_code, 2);
  EXPECT_EQ(Run("frobnicate").exit_code, 2);
  EXPECT_EQ(Run("gen-corpus").exit_code, 2);
  const RunResult missing = Run("gen-corpus --config " + P("missing.ini") + " --out " + P("x"));
  EXPECT_EQ(missing.exit_code, 2);
  EXPECT_NE(missing.err.find("missing.ini"), std::string::npos);
  std::ofstream(P("bad.ini")) << "[train]\nnot_a_key = 1\n";
  EXPECT_EQ(Run("gen-corpus --config " + P("bad.ini") + " --out " + P("x")).exit_code, 2);
}

TEST_F(CliTest, GenCorpusDeterministic) {
  ASSERT_EQ(Run("gen-corpus --config " + P("tiny.ini") + " --out " + P("c1") + " --seed 9")
                .exit_code, 0);
  ASSERT_EQ(Run("gen-corpus --config " + P("tiny.ini") + " --out " + P("c2") + " --seed 9")
                .exit_code, 0);
  EXPECT_EQ(FileHash(P("c1/manifest.jsonl")), FileHash(P("c2/manifest.jsonl")));
  EXPECT_EQ(Slurp(P("c1/corpus.json")), Slurp(P("c2/corpus.json")));
}

TEST_F(CliTest, AdaptRecordsProvenance) {
  EnsurePipeline();
  const Checkpoint c = LoadCheckpoint(P("adapted.ckpt"));
  EXPECT_EQ(c.metadata.at("adapted_for"), "spkB00");
  EXPECT_EQ(c.metadata.at("source_hash"), FileHash(P("base.ckpt")));
  EXPECT_TRUE(c.model.params.speaker_biases.empty());
}

TEST_F(CliTest, AdaptWithoutUtterancesExitsOne) {
  EnsurePipeline();
  const RunResult r = Run("adapt --config " + P("tiny.ini") + " --checkpoint " + P("base.ckpt") +
                          " --manifest " + P("corpus/manifest.jsonl") +
                          " --target-speaker nobody --out " + P("none.ckpt"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("NoAdaptationData"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(P("none.ckpt")));
}

TEST_F(CliTest, ConvertWarnsOnBaseCheckpoint) {
  EnsurePipeline();
  const std::string input = P("corpus/wav/spkA00_u000.wav");
  const RunResult base = Run("convert --config " + P("tiny.ini") + " --checkpoint " +
                             P("base.ckpt") + " --input " + input + " --out " + P("b.wav"));
  EXPECT_EQ(base.exit_code, 0);
  EXPECT_NE(base.err.find("warning"), std::string::npos);

  const RunResult adapted = Run("convert --config " + P("tiny.ini") + " --checkpoint " +
                                P("adapted.ckpt") + " --input " + input + " --out " + P("a1.wav"));
  EXPECT_EQ(adapted.exit_code, 0);
  EXPECT_EQ(adapted.err.find("warning"), std::string::npos);
  EXPECT_EQ(fs::file_size(P("a1.wav")), fs::file_size(input));

  Run("convert --config " + P("tiny.ini") + " --checkpoint " + P("adapted.ckpt") +
      " --input " + input + " --out " + P("a2.wav"));
  EXPECT_EQ(Slurp(P("a1.wav")), Slurp(P("a2.wav")));

  EXPECT_EQ(Run("convert --checkpoint " + P("adapted.ckpt") + " --input " + input +
                " --out " + P("v.wav") + " --vocoder wavenet")
                .exit_code, 2);
  EXPECT_EQ(Run("convert --checkpoint " + P("missing.ckpt") + " --input " + input +
                " --out " + P("v.wav"))
                .exit_code, 1);
}

TEST_F(CliTest, EvalWritesReport) {
  EnsurePipeline();
  const RunResult r = Run("eval --config " + P("tiny.ini") + " --checkpoint " + P("base.ckpt") +
                          " --out " + P("report.json") + " --csv " + P("report.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = nlohmann::json::parse(Slurp(P("report.json")));
  EXPECT_EQ(j.at("summaries").size(), 4u);
  EXPECT_TRUE(j.at("durations_preserved").get<bool>());
  EXPECT_EQ(Slurp(P("report.csv")).rfind("scenario,source,target,utterance,mcd\n", 0), 0u);
}

}  // namespace
}  // namespace llevc
