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

#ifndef LLEVC_CORPUS_H_
#define LLEVC_CORPUS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "llevc/common.h"
#include "llevc/signal.h"

namespace llevc {

// Two synthetic languages with disjoint phoneme sets. A is the transcribed
// ("abundant") language by default, B the untranscribed one.
enum class Language { kA, kB };

std::string_view LanguageName(Language lang);
Language ParseLanguage(std::string_view name);

struct PhonemeTemplate {
  int id = 0;
  std::array<double, 3> formants_hz{};
  bool voiced = true;
  int mean_duration = 6;  // frames
};

struct PhonemeInventory {
  Language language = Language::kA;
  std::vector<PhonemeTemplate> templates;

  // Position of the phoneme in this inventory, or -1.
  int IndexOf(int phoneme_id) const;
  const PhonemeTemplate& Get(int phoneme_id) const;  // kUnknownPhoneme
  int FeatureDim() const { return static_cast<int>(templates.size()) + 3; }
};

// Built-in inventories. Ids 0..11 belong to A, 100..111 to B.
const PhonemeInventory& DefaultInventory(Language lang);

struct SyntheticSpeaker {
  std::string speaker_id;
  double formant_shift = 1.0;      // [0.8, 1.25]
  double base_f0 = 150.0;          // Hz, [90, 300]
  double spectral_tilt_db = -6.0;  // dB/octave, [-12, 0]
  Language language_home = Language::kA;
};

void ValidateSpeaker(const SyntheticSpeaker& spk);

// Draws a speaker with every parameter uniform over its legal range.
SyntheticSpeaker SampleSpeaker(const std::string& id, Language home,
                               uint64_t seed);

struct PhonemeSegment {
  int phoneme_id = 0;
  int frames = 2;
};

struct UtteranceSpec {
  std::string utterance_id;
  std::string speaker_id;
  Language language = Language::kA;
  std::vector<PhonemeSegment> segments;

  int NumFrames() const;
};

struct UtterancePlanConfig {
  int min_phonemes = 5;
  int max_phonemes = 9;
  int min_total_frames = 10;
};

// Random phoneme sequence from inv with durations jittered around each
// template's mean (never below 2 frames, total never below 10).
UtteranceSpec SampleUtterance(const std::string& utterance_id,
                              const std::string& speaker_id,
                              const PhonemeInventory& inv,
                              const UtterancePlanConfig& cfg, uint64_t seed);

// Frame-aligned linguistic features: one-hot phoneme index followed by
// fraction-into-phoneme, log duration and voicing. Depends only on spec and
// inv, never on the speaker.
Matrix LinguisticFeatures(const UtteranceSpec& spec,
                          const PhonemeInventory& inv);

struct RenderedUtterance {
  Waveform waveform;
  Matrix linguistic;
};

// Harmonic-plus-formant rendering. The waveform has exactly
// NumSamplesForFrames(spec.NumFrames()) samples so its mel spectrogram has
// one frame per linguistic frame.
RenderedUtterance RenderUtterance(const UtteranceSpec& spec,
                                  const SyntheticSpeaker& spk,
                                  const PhonemeInventory& inv, uint64_t seed,
                                  const FrameConfig& frame = {});

// The target speaker's rendition of the exact phoneme/duration sequence in
// utt. Frame count equals that of the source rendering.
Waveform RenderParallelReference(const UtteranceSpec& utt,
                                 const SyntheticSpeaker& target,
                                 const PhonemeInventory& inv, uint64_t seed,
                                 const FrameConfig& frame = {});

struct CorpusConfig {
  int speakers_a = 8;
  int speakers_b = 2;
  int utterances_per_speaker_a = 20;
  int utterances_per_speaker_b = 20;
  Language transcribed_language = Language::kA;
  UtterancePlanConfig utterance;
  FrameConfig frame;
};

// 72 transcribed speakers and 4 untranscribed targets with 81 utterances
// each.
CorpusConfig FullScaleCorpusConfig();

struct PlannedUtterance {
  UtteranceSpec spec;
  uint64_t render_seed = 0;
};

struct CorpusPlan {
  CorpusConfig config;
  std::vector<SyntheticSpeaker> speakers;
  std::vector<PlannedUtterance> utterances;
};

// Deterministic speaker and utterance draws without rendering audio.
CorpusPlan PlanCorpus(const CorpusConfig& cfg, uint64_t seed);

struct ManifestEntry {
  std::string utterance_id;
  std::string speaker_id;
  Language language = Language::kA;
  std::string waveform_path;
  std::optional<std::string> features_path;
  int frames = 0;

  bool operator==(const ManifestEntry&) const = default;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;

  bool operator==(const CorpusManifest&) const = default;
};

// JSON-lines, one object per entry. Paths are stored as given.
std::string ManifestToJsonLines(const CorpusManifest& manifest);
CorpusManifest ManifestFromJsonLines(const std::string& text);
void WriteManifest(const std::filesystem::path& path,
                   const CorpusManifest& manifest);
CorpusManifest ReadManifest(const std::filesystem::path& path);

// Renders every planned utterance into out_dir (wav/, ling/), writes
// manifest.jsonl and corpus.json, and returns the manifest. Entries in the
// transcribed language carry a LING feature file; all others have none.
// Paths in the manifest are relative to out_dir.
CorpusManifest GenerateCorpus(const CorpusConfig& cfg, uint64_t seed,
                              const std::filesystem::path& out_dir);

}  // namespace llevc

#endif  // LLEVC_CORPUS_H_
