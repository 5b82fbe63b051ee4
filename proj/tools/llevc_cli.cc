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

// llevc: corpus generation, training, adaptation, conversion and evaluation.
//
//   llevc gen-corpus --config toy.ini --out corpus --seed 1
//   llevc train --config toy.ini --manifest corpus/manifest.jsonl --out base.ckpt
//   llevc adapt --config toy.ini --checkpoint base.ckpt
//       --manifest corpus/manifest.jsonl --target-speaker spkB00 --out spkB00.ckpt
//   llevc convert --checkpoint spkB00.ckpt --input in.wav --out out.wav
//   llevc eval --config toy.ini --checkpoint base.ckpt --out report.json
//
// Exit codes: 0 success, 1 pipeline error, 2 usage or configuration error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "llevc/adapt.h"
#include "llevc/audio_io.h"
#include "llevc/checkpoint.h"
#include "llevc/config.h"
#include "llevc/convert.h"
#include "llevc/corpus.h"
#include "llevc/eval.h"
#include "llevc/train.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string config;
  uint64_t seed = 1;
};

llevc::PipelineConfig LoadConfig(const CommonArgs& args) {
  if (args.config.empty()) return {};
  return llevc::LoadPipelineConfig(args.config);
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    throw llevc::Error(llevc::ErrorCode::kIoError, "cannot write " + path.string());
  }
}

int GenCorpus(const CommonArgs& common, const std::string& out) {
  const llevc::PipelineConfig cfg = LoadConfig(common);
  const llevc::CorpusManifest manifest =
      llevc::GenerateCorpus(cfg.corpus, common.seed, out);
  std::cerr << "wrote " << manifest.entries.size() << " utterances to " << out << "\n";
  return 0;
}

int Train(const CommonArgs& common, const std::string& manifest_path,
          const std::string& out, const std::string& report_path) {
  llevc::PipelineConfig cfg = LoadConfig(common);
  cfg.train.seed = common.seed;
  cfg.model.init_seed = common.seed;
  const llevc::CorpusManifest manifest = llevc::ReadManifest(manifest_path);
  const fs::path root = fs::path(manifest_path).parent_path();
  auto [model, report] =
      llevc::TrainJoint(manifest, root, cfg.signal, cfg.model, cfg.train);
  llevc::Checkpoint ckpt{std::move(model), {}, std::nullopt, cfg.train.max_steps};
  ckpt.metadata["stage"] = "base";
  ckpt.metadata["seed"] = std::to_string(common.seed);
  ckpt.metadata["manifest_hash"] = llevc::FileHash(manifest_path);
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  llevc::SaveCheckpoint(out, ckpt);
  if (!report_path.empty()) WriteText(report_path, llevc::TrainReportToJson(report));
  std::cerr << "validation loss " << report.initial_validation.total << " -> "
            << report.validation.total << "\n";
  return 0;
}

int Adapt(const CommonArgs& common, const std::string& checkpoint,
          const std::string& manifest_path, const std::string& target,
          const std::string& out, int max_utterances) {
  llevc::PipelineConfig cfg = LoadConfig(common);
  cfg.adapt.seed = common.seed;
  const llevc::Checkpoint base = llevc::LoadCheckpoint(checkpoint);
  const llevc::CorpusManifest manifest = llevc::ReadManifest(manifest_path);
  const fs::path root = fs::path(manifest_path).parent_path();
  const llevc::MelFilterbank fb(cfg.signal);
  std::vector<llevc::Matrix> mels;
  for (const auto& e : manifest.entries) {
    if (e.speaker_id != target) continue;
    if (max_utterances >= 0 && static_cast<int>(mels.size()) >= max_utterances) break;
    const llevc::Waveform w = llevc::ReadWav(root / e.waveform_path);
    mels.push_back(llevc::ComputeMelSpectrogram(w, cfg.signal, fb).frames);
  }
  const llevc::AdaptResult result = llevc::AdaptTarget(base.model, mels, cfg.adapt);
  llevc::Checkpoint ckpt{result.model, {}, std::nullopt, cfg.adapt.max_steps};
  ckpt.metadata["stage"] = "adapted";
  ckpt.metadata["adapted_for"] = target;
  ckpt.metadata["source_hash"] = llevc::FileHash(checkpoint);
  ckpt.metadata["adaptation_utterances"] = std::to_string(mels.size());
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  llevc::SaveCheckpoint(out, ckpt);
  std::cerr << "adaptation loss " << result.loss_history.front() << " -> "
            << result.loss_history.back() << "\n";
  return 0;
}

int Convert(const CommonArgs& common, const std::string& checkpoint,
            const std::string& input, const std::string& out,
            const std::string& vocoder_name) {
  const llevc::PipelineConfig cfg = LoadConfig(common);
  try {
    llevc::ParseVocoderKind(vocoder_name);
  } catch (const llevc::Error& e) {
    throw UsageError(e.what());
  }
  const llevc::GriffinLimVocoder vocoder(cfg.griffin_lim_iterations);
  const llevc::Checkpoint ckpt = llevc::LoadCheckpoint(checkpoint);
  const llevc::Waveform source = llevc::ReadWav(input);
  const llevc::ConvertedWaveform result =
      llevc::ConvertWaveform(source, ckpt.model, vocoder, cfg.signal);
  if (result.not_adapted) {
    std::cerr << "warning: " << checkpoint
              << " has not been adapted to a target speaker; output uses no speaker bias\n";
  }
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  llevc::WriteWav(out, result.waveform);
  return 0;
}

int Eval(const CommonArgs& common, const std::string& checkpoint,
         const std::string& reference_checkpoint, const std::string& manifest_path,
         const std::string& out, const std::string& csv) {
  llevc::PipelineConfig cfg = LoadConfig(common);
  cfg.adapt.seed = common.seed;
  cfg.probe.seed = common.seed;
  llevc::BaseCheckpoints bases;
  bases.emplace(llevc::Language::kA, llevc::LoadCheckpoint(checkpoint).model);
  if (!reference_checkpoint.empty()) {
    bases.emplace(llevc::Language::kB, llevc::LoadCheckpoint(reference_checkpoint).model);
  }
  const llevc::EvalSetup setup = llevc::MakeEvalSetup(cfg.eval, cfg.signal, common.seed);
  const auto specs = llevc::DefaultScenarios(setup, !reference_checkpoint.empty());
  llevc::EvalReport report = llevc::RunScenarios(specs, bases, setup, cfg.adapt);
  report.metadata["checkpoint"] = checkpoint;
  report.metadata["checkpoint_hash"] = llevc::FileHash(checkpoint);

  if (!manifest_path.empty()) {
    const llevc::CorpusManifest manifest = llevc::ReadManifest(manifest_path);
    const auto data = llevc::LoadTrainingData(
        manifest, fs::path(manifest_path).parent_path(), cfg.signal);
    const llevc::Model& model = bases.at(llevc::Language::kA);
    std::vector<llevc::LabeledSequence> mel, latent;
    for (const auto& u : data) {
      mel.push_back({u.mel, u.speaker_id});
      latent.push_back({llevc::AcousticEncode(u.mel, model).means, u.speaker_id});
    }
    report.probe_accuracies["mel"] = llevc::SpeakerProbe(mel, cfg.probe);
    report.probe_accuracies["acoustic_latent"] = llevc::SpeakerProbe(latent, cfg.probe);
  }

  WriteText(out, llevc::EvalReportToJson(report));
  if (!csv.empty()) WriteText(csv, llevc::EvalReportToCsv(report));
  for (const auto& s : report.summaries) {
    std::cout << s.scenario << " mcd " << s.mcd_mean << " +- " << s.mcd_std
              << " baseline " << s.baseline_mean << "\n";
  }
  for (const auto& [name, acc] : report.probe_accuracies) {
    std::cout << "probe " << name << " " << acc << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voice conversion through a latent linguistic embedding"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string out, manifest, checkpoint, reference_checkpoint, target, input,
      report, csv, vocoder = "griffin_lim";
  int max_utterances = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", common.config, "INI configuration file");
    cmd->add_option("--seed", common.seed, "Random seed");
  };

  CLI::App* gen = app.add_subcommand("gen-corpus", "Render the synthetic corpus");
  add_common(gen);
  gen->add_option("--out", out, "Output directory")->required();

  CLI::App* train = app.add_subcommand("train", "Joint training on transcribed data");
  add_common(train);
  train->add_option("--manifest", manifest, "Corpus manifest")->required();
  train->add_option("--out", out, "Output checkpoint")->required();
  train->add_option("--report", report, "Training report (JSON)");

  CLI::App* adapt = app.add_subcommand("adapt", "Adapt to untranscribed target speech");
  add_common(adapt);
  adapt->add_option("--checkpoint", checkpoint, "Base checkpoint")->required();
  adapt->add_option("--manifest", manifest, "Corpus manifest")->required();
  adapt->add_option("--target-speaker", target, "Target speaker id")->required();
  adapt->add_option("--out", out, "Output checkpoint")->required();
  adapt->add_option("--max-utterances", max_utterances,
                    "Use at most this many target utterances");

  CLI::App* convert = app.add_subcommand("convert", "Convert a waveform");
  add_common(convert);
  convert->add_option("--checkpoint", checkpoint, "Adapted checkpoint")->required();
  convert->add_option("--input", input, "Source WAV")->required();
  convert->add_option("--out", out, "Output WAV")->required();
  convert->add_option("--vocoder", vocoder, "Vocoder (griffin_lim)");

  CLI::App* eval = app.add_subcommand("eval", "Run the cross-language scenario matrix");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint, "Base checkpoint trained on A")->required();
  eval->add_option("--reference-checkpoint", reference_checkpoint,
                   "Base checkpoint trained on B (enables BB-B-reference)");
  eval->add_option("--manifest", manifest, "Training manifest for the speaker probe");
  eval->add_option("--out", out, "EvalReport JSON")->required();
  eval->add_option("--csv", csv, "Per-pair CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed()) return GenCorpus(common, out);
    if (train->parsed()) return Train(common, manifest, out, report);
    if (adapt->parsed()) {
      return Adapt(common, checkpoint, manifest, target, out, max_utterances);
    }
    if (convert->parsed()) return Convert(common, checkpoint, input, out, vocoder);
    if (eval->parsed()) {
      return Eval(common, checkpoint, reference_checkpoint, manifest, out, csv);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const llevc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == llevc::ErrorCode::kConfigError ? kExitUsage : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
