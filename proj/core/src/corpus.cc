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

#include "llevc/corpus.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "llevc/audio_io.h"

namespace llevc {

namespace {

using json = nlohmann::json;

PhonemeInventory MakeInventory(Language lang) {
  PhonemeInventory inv;
  inv.language = lang;
  if (lang == Language::kA) {
    inv.templates = {
        {0, {270, 2290, 3010}, true, 7},   {1, {730, 1090, 2440}, true, 8},
        {2, {300, 870, 2240}, true, 7},    {3, {530, 1840, 2480}, true, 7},
        {4, {570, 840, 2410}, true, 7},    {5, {660, 1720, 2410}, true, 8},
        {6, {250, 1200, 2200}, true, 5},   {7, {250, 1700, 2600}, true, 5},
        {8, {360, 1300, 2700}, true, 5},   {9, {4500, 6500, 8000}, false, 6},
        {10, {1500, 4000, 7000}, false, 5}, {11, {2500, 3500, 6000}, false, 6},
    };
  } else {
    inv.templates = {
        {100, {350, 1250, 2300}, true, 6},   {101, {320, 1600, 2500}, true, 6},
        {102, {420, 1550, 2300}, true, 7},   {103, {780, 1250, 2600}, true, 8},
        {104, {600, 1950, 2650}, true, 7},   {105, {260, 2000, 2700}, true, 7},
        {106, {280, 1000, 2400}, true, 5},   {107, {400, 1400, 1900}, true, 4},
        {108, {280, 2200, 3000}, true, 4},   {109, {3500, 5500, 7500}, false, 5},
        {110, {1000, 2500, 4500}, false, 4}, {111, {4000, 6000, 8500}, false, 5},
    };
  }
  return inv;
}

// Relative formant gains and half-power bandwidths (Hz).
constexpr std::array<double, 3> kFormantGain = {1.0, 0.5, 0.25};
constexpr std::array<double, 3> kVoicedBandwidth = {80.0, 120.0, 180.0};
constexpr std::array<double, 3> kUnvoicedBandwidth = {700.0, 900.0, 1200.0};

constexpr double kVoicedRms = 0.1;
constexpr double kUnvoicedRms = 0.03;
constexpr double kNoiseFloorRms = 5e-4;
constexpr double kNoisePartialSpacingHz = 50.0;
constexpr double kMaxPartialFraction = 0.95;  // of Nyquist

double Envelope(double hz, const PhonemeTemplate& ph,
                const SyntheticSpeaker& spk) {
  const auto& bw = ph.voiced ? kVoicedBandwidth : kUnvoicedBandwidth;
  double e = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double center = ph.formants_hz[i] * spk.formant_shift;
    const double d = (hz - center) / bw[i];
    e += kFormantGain[i] / std::sqrt(1.0 + d * d);
  }
  const double octaves = std::log2(std::max(hz, 50.0) / 100.0);
  return e * std::pow(10.0, spk.spectral_tilt_db * octaves / 20.0);
}

// Deterministic intonation: slow oscillation plus declination.
double PitchContour(double progress) {
  return 1.0 + 0.08 * std::sin(2.0 * std::numbers::pi * 1.3 * progress + 0.5) -
         0.06 * progress;
}

// Per-frame amplitudes normalized to a fixed RMS.
std::vector<double> NormalizedAmplitudes(const std::vector<double>& freqs,
                                         const PhonemeTemplate& ph,
                                         const SyntheticSpeaker& spk,
                                         double rms) {
  std::vector<double> amps(freqs.size());
  double energy = 0.0;
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    amps[k] = Envelope(freqs[k], ph, spk);
    energy += 0.5 * amps[k] * amps[k];
  }
  const double scale = energy > 0.0 ? rms / std::sqrt(energy) : 0.0;
  for (double& a : amps) a *= scale;
  return amps;
}

}  // namespace

std::string_view LanguageName(Language lang) {
  return lang == Language::kA ? "A" : "B";
}

Language ParseLanguage(std::string_view name) {
  if (name == "A") return Language::kA;
  if (name == "B") return Language::kB;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown language '" + std::string(name) + "'");
}

int PhonemeInventory::IndexOf(int phoneme_id) const {
  for (std::size_t i = 0; i < templates.size(); ++i) {
    if (templates[i].id == phoneme_id) return static_cast<int>(i);
  }
  return -1;
}

const PhonemeTemplate& PhonemeInventory::Get(int phoneme_id) const {
  const int idx = IndexOf(phoneme_id);
  if (idx < 0) {
    throw Error(ErrorCode::kUnknownPhoneme,
                "phoneme " + std::to_string(phoneme_id) +
                    " not in inventory " + std::string(LanguageName(language)));
  }
  return templates[idx];
}

const PhonemeInventory& DefaultInventory(Language lang) {
  static const PhonemeInventory a = MakeInventory(Language::kA);
  static const PhonemeInventory b = MakeInventory(Language::kB);
  return lang == Language::kA ? a : b;
}

void ValidateSpeaker(const SyntheticSpeaker& spk) {
  if (spk.formant_shift < 0.8 || spk.formant_shift > 1.25 ||
      spk.base_f0 < 90.0 || spk.base_f0 > 300.0 ||
      spk.spectral_tilt_db < -12.0 || spk.spectral_tilt_db > 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "speaker " + spk.speaker_id + " has out-of-range parameters");
  }
}

SyntheticSpeaker SampleSpeaker(const std::string& id, Language home,
                               uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> shift(0.8, 1.25);
  std::uniform_real_distribution<double> f0(90.0, 300.0);
  std::uniform_real_distribution<double> tilt(-12.0, 0.0);
  SyntheticSpeaker spk;
  spk.speaker_id = id;
  spk.formant_shift = shift(rng);
  spk.base_f0 = f0(rng);
  spk.spectral_tilt_db = tilt(rng);
  spk.language_home = home;
  return spk;
}

int UtteranceSpec::NumFrames() const {
  int total = 0;
  for (const auto& seg : segments) total += seg.frames;
  return total;
}

UtteranceSpec SampleUtterance(const std::string& utterance_id,
                              const std::string& speaker_id,
                              const PhonemeInventory& inv,
                              const UtterancePlanConfig& cfg, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(cfg.min_phonemes, cfg.max_phonemes);
  std::uniform_int_distribution<int> pick(
      0, static_cast<int>(inv.templates.size()) - 1);
  std::uniform_int_distribution<int> jitter(-2, 2);
  UtteranceSpec spec;
  spec.utterance_id = utterance_id;
  spec.speaker_id = speaker_id;
  spec.language = inv.language;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const PhonemeTemplate& ph = inv.templates[pick(rng)];
    spec.segments.push_back({ph.id, std::max(2, ph.mean_duration + jitter(rng))});
  }
  const int shortfall = cfg.min_total_frames - spec.NumFrames();
  if (shortfall > 0) spec.segments.back().frames += shortfall;
  return spec;
}

Matrix LinguisticFeatures(const UtteranceSpec& spec,
                          const PhonemeInventory& inv) {
  const int phonemes = static_cast<int>(inv.templates.size());
  Matrix x = Matrix::Zero(spec.NumFrames(), inv.FeatureDim());
  int row = 0;
  for (const auto& seg : spec.segments) {
    const bool voiced = inv.Get(seg.phoneme_id).voiced;
    const int idx = inv.IndexOf(seg.phoneme_id);
    for (int i = 0; i < seg.frames; ++i, ++row) {
      x(row, idx) = 1.0;
      x(row, phonemes) = (i + 0.5) / seg.frames;
      x(row, phonemes + 1) = std::log(static_cast<double>(seg.frames));
      x(row, phonemes + 2) = voiced ? 1.0 : 0.0;
    }
  }
  return x;
}

RenderedUtterance RenderUtterance(const UtteranceSpec& spec,
                                  const SyntheticSpeaker& spk,
                                  const PhonemeInventory& inv, uint64_t seed,
                                  const FrameConfig& frame) {
  ValidateFrameConfig(frame);
  RenderedUtterance out;
  out.linguistic = LinguisticFeatures(spec, inv);

  const int frames = spec.NumFrames();
  std::vector<const PhonemeTemplate*> frame_phoneme;
  frame_phoneme.reserve(frames);
  for (const auto& seg : spec.segments) {
    const PhonemeTemplate& ph = inv.Get(seg.phoneme_id);
    for (int i = 0; i < seg.frames; ++i) frame_phoneme.push_back(&ph);
  }

  const double sr = frame.sample_rate;
  const double max_hz = kMaxPartialFraction * sr / 2.0;
  std::vector<double> f0(frames);
  for (int t = 0; t < frames; ++t) {
    f0[t] = spk.base_f0 * PitchContour((t + 0.5) / frames);
  }
  const double min_f0 = *std::min_element(f0.begin(), f0.end());
  const int harmonics = static_cast<int>(max_hz / min_f0);
  const int partials = static_cast<int>(max_hz / kNoisePartialSpacingHz);

  // Amplitude tables at frame centres; zero where the source is inactive.
  std::vector<std::vector<double>> voiced_amp(frames), noise_amp(frames);
  std::vector<double> partial_hz(partials);
  for (int j = 0; j < partials; ++j) partial_hz[j] = (j + 1) * kNoisePartialSpacingHz;
  for (int t = 0; t < frames; ++t) {
    const PhonemeTemplate& ph = *frame_phoneme[t];
    if (ph.voiced) {
      std::vector<double> hz(harmonics);
      for (int k = 0; k < harmonics; ++k) {
        const double f = (k + 1) * f0[t];
        hz[k] = f;
      }
      voiced_amp[t] = NormalizedAmplitudes(hz, ph, spk, kVoicedRms);
      for (int k = 0; k < harmonics; ++k) {
        if (hz[k] > max_hz) voiced_amp[t][k] = 0.0;
      }
      noise_amp[t].assign(partials, 0.0);
    } else {
      voiced_amp[t].assign(harmonics, 0.0);
      noise_amp[t] = NormalizedAmplitudes(partial_hz, ph, spk, kUnvoicedRms);
    }
  }

  // Low crest-factor harmonic phases.
  std::vector<std::complex<double>> harmonic_offset(harmonics);
  for (int k = 0; k < harmonics; ++k) {
    const double kk = k + 1;
    harmonic_offset[k] = std::polar(1.0, std::numbers::pi * kk * (kk - 1) / harmonics);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<std::complex<double>> noise_phasor(partials), noise_step(partials);
  for (int j = 0; j < partials; ++j) {
    noise_phasor[j] = std::polar(1.0, phase(rng));
    noise_step[j] = std::polar(1.0, 2.0 * std::numbers::pi * partial_hz[j] / sr);
  }
  std::normal_distribution<double> floor_noise(0.0, kNoiseFloorRms);

  const std::size_t length = NumSamplesForFrames(frames, frame);
  out.waveform.sample_rate = frame.sample_rate;
  out.waveform.samples.resize(length);
  const double half_window = frame.window_size / 2.0;
  double f0_phase = 0.0;
  for (std::size_t n = 0; n < length; ++n) {
    // Frame t's analysis window is centred on t*hop + window/2.
    const double pos = std::clamp((n - half_window) / frame.hop_size, 0.0,
                                  static_cast<double>(frames - 1));
    const int t0 = static_cast<int>(pos);
    const int t1 = std::min(t0 + 1, frames - 1);
    const double a = pos - t0;
    const double inst_f0 = (1.0 - a) * f0[t0] + a * f0[t1];

    double sample = 0.0;
    const auto& va0 = voiced_amp[t0];
    const auto& va1 = voiced_amp[t1];
    if (frame_phoneme[t0]->voiced || frame_phoneme[t1]->voiced) {
      const std::complex<double> base = std::polar(1.0, f0_phase);
      std::complex<double> z = base;
      for (int k = 0; k < harmonics; ++k) {
        if ((k + 1) * inst_f0 > max_hz) break;
        const double amp = (1.0 - a) * va0[k] + a * va1[k];
        sample += amp * (z * harmonic_offset[k]).imag();
        z *= base;
      }
    }
    const auto& na0 = noise_amp[t0];
    const auto& na1 = noise_amp[t1];
    const bool noisy = !frame_phoneme[t0]->voiced || !frame_phoneme[t1]->voiced;
    for (int j = 0; j < partials; ++j) {
      if (noisy) {
        const double amp = (1.0 - a) * na0[j] + a * na1[j];
        sample += amp * noise_phasor[j].imag();
      }
      noise_phasor[j] *= noise_step[j];
    }
    sample += floor_noise(rng);
    out.waveform.samples[n] = std::clamp(sample, -1.0, 1.0);
    f0_phase = std::fmod(f0_phase + 2.0 * std::numbers::pi * inst_f0 / sr,
                         2.0 * std::numbers::pi);
  }
  return out;
}

Waveform RenderParallelReference(const UtteranceSpec& utt,
                                 const SyntheticSpeaker& target,
                                 const PhonemeInventory& inv, uint64_t seed,
                                 const FrameConfig& frame) {
  return RenderUtterance(utt, target, inv, seed, frame).waveform;
}

CorpusConfig FullScaleCorpusConfig() {
  CorpusConfig cfg;
  cfg.speakers_a = 72;
  cfg.speakers_b = 4;
  cfg.utterances_per_speaker_a = 350;  // about 21 minutes per speaker
  cfg.utterances_per_speaker_b = 81;
  return cfg;
}

CorpusPlan PlanCorpus(const CorpusConfig& cfg, uint64_t seed) {
  if (cfg.speakers_a < 0 || cfg.speakers_b < 0 ||
      cfg.utterances_per_speaker_a < 0 || cfg.utterances_per_speaker_b < 0 ||
      cfg.utterance.min_phonemes < 1 ||
      cfg.utterance.max_phonemes < cfg.utterance.min_phonemes ||
      cfg.utterance.min_total_frames < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid corpus config");
  }
  CorpusPlan plan;
  plan.config = cfg;
  auto add = [&](Language lang, int count, int utts) {
    const PhonemeInventory& inv = DefaultInventory(lang);
    const uint64_t lang_tag = lang == Language::kA ? 0 : 1;
    for (int s = 0; s < count; ++s) {
      char id[32];
      std::snprintf(id, sizeof(id), "spk%s%02d", lang == Language::kA ? "A" : "B", s);
      plan.speakers.push_back(SampleSpeaker(id, lang, MixSeed(seed, 1, lang_tag, s)));
      for (int u = 0; u < utts; ++u) {
        char uid[48];
        std::snprintf(uid, sizeof(uid), "%s_u%03d", id, u);
        PlannedUtterance pu;
        pu.spec = SampleUtterance(uid, id, inv, cfg.utterance,
                                  MixSeed(seed, 2, lang_tag, (uint64_t(s) << 20) | u));
        pu.render_seed = MixSeed(seed, 3, lang_tag, (uint64_t(s) << 20) | u);
        plan.utterances.push_back(std::move(pu));
      }
    }
  };
  add(Language::kA, cfg.speakers_a, cfg.utterances_per_speaker_a);
  add(Language::kB, cfg.speakers_b, cfg.utterances_per_speaker_b);
  return plan;
}

std::string ManifestToJsonLines(const CorpusManifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    json j;
    j["utterance_id"] = e.utterance_id;
    j["speaker_id"] = e.speaker_id;
    j["language"] = std::string(LanguageName(e.language));
    j["waveform"] = e.waveform_path;
    j["features"] = e.features_path ? json(*e.features_path) : json(nullptr);
    j["frames"] = e.frames;
    out += j.dump();
    out += '\n';
  }
  return out;
}

CorpusManifest ManifestFromJsonLines(const std::string& text) {
  CorpusManifest manifest;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      ManifestEntry e;
      e.utterance_id = j.at("utterance_id").get<std::string>();
      e.speaker_id = j.at("speaker_id").get<std::string>();
      e.language = ParseLanguage(j.at("language").get<std::string>());
      e.waveform_path = j.at("waveform").get<std::string>();
      if (!j.at("features").is_null()) {
        e.features_path = j.at("features").get<std::string>();
      }
      e.frames = j.at("frames").get<int>();
      manifest.entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::kIoError, "manifest line " +
                                           std::to_string(line_no) + ": " +
                                           ex.what());
    }
  }
  return manifest;
}

void WriteManifest(const std::filesystem::path& path,
                   const CorpusManifest& manifest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << ManifestToJsonLines(manifest);
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

CorpusManifest ReadManifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ManifestFromJsonLines(ss.str());
}

namespace {

json SpeakerToJson(const SyntheticSpeaker& s) {
  return {{"speaker_id", s.speaker_id},
          {"formant_shift", s.formant_shift},
          {"base_f0", s.base_f0},
          {"spectral_tilt_db", s.spectral_tilt_db},
          {"language_home", std::string(LanguageName(s.language_home))}};
}

}  // namespace

CorpusManifest GenerateCorpus(const CorpusConfig& cfg, uint64_t seed,
                              const std::filesystem::path& out_dir) {
  const CorpusPlan plan = PlanCorpus(cfg, seed);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "wav", ec);
  if (!ec) std::filesystem::create_directories(out_dir / "ling", ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                "cannot create " + out_dir.string() + ": " + ec.message());
  }

  std::map<std::string, const SyntheticSpeaker*> by_id;
  for (const auto& s : plan.speakers) by_id[s.speaker_id] = &s;

  CorpusManifest manifest;
  for (const auto& pu : plan.utterances) {
    const SyntheticSpeaker& spk = *by_id.at(pu.spec.speaker_id);
    const PhonemeInventory& inv = DefaultInventory(pu.spec.language);
    const RenderedUtterance r =
        RenderUtterance(pu.spec, spk, inv, pu.render_seed, cfg.frame);
    ManifestEntry e;
    e.utterance_id = pu.spec.utterance_id;
    e.speaker_id = pu.spec.speaker_id;
    e.language = pu.spec.language;
    e.waveform_path = "wav/" + e.utterance_id + ".wav";
    WriteWav(out_dir / e.waveform_path, r.waveform);
    if (pu.spec.language == cfg.transcribed_language) {
      e.features_path = "ling/" + e.utterance_id + ".ling";
      WriteFeatureMatrix(out_dir / *e.features_path, r.linguistic, kLingMagic);
    }
    e.frames = pu.spec.NumFrames();
    manifest.entries.push_back(std::move(e));
  }
  WriteManifest(out_dir / "manifest.jsonl", manifest);

  json meta;
  meta["seed"] = seed;
  meta["transcribed_language"] = std::string(LanguageName(cfg.transcribed_language));
  meta["speakers"] = json::array();
  for (const auto& s : plan.speakers) meta["speakers"].push_back(SpeakerToJson(s));
  meta["utterances"] = json::array();
  for (const auto& pu : plan.utterances) {
    json segs = json::array();
    for (const auto& seg : pu.spec.segments) segs.push_back({seg.phoneme_id, seg.frames});
    meta["utterances"].push_back({{"utterance_id", pu.spec.utterance_id},
                                  {"segments", segs},
                                  {"render_seed", pu.render_seed}});
  }
  std::ofstream out(out_dir / "corpus.json", std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write corpus.json");
  out << meta.dump(1) << '\n';
  return manifest;
}

}  // namespace llevc
