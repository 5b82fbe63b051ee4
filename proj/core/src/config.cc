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

#include "llevc/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace llevc {

namespace {

struct Field {
  std::string section;
  std::string key;
  std::function<void(PipelineConfig*, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

[[noreturn]] void BadValue(const std::string& key, const std::string& value) {
  throw Error(ErrorCode::kConfigError,
              "invalid value '" + value + "' for key '" + key + "'");
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) BadValue(key, value);
  return out;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  BadValue(key, value);
}

std::vector<int> ParseIntList(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) BadValue(key, value);
    out.push_back(ParseNumber<int>(key, item.substr(b, e - b + 1)));
  }
  return out;
}

std::string FormatDouble(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::string FormatIntList(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

#define LLEVC_INT(sec, name, expr)                                                \
  Field{sec, name,                                                                \
        [](PipelineConfig* c, const std::string& v) { c->expr = ParseNumber<int>(name, v); }, \
        [](const PipelineConfig& c) { return std::to_string(c.expr); }}
#define LLEVC_U64(sec, name, expr)                                                \
  Field{sec, name,                                                                \
        [](PipelineConfig* c, const std::string& v) { c->expr = ParseNumber<uint64_t>(name, v); }, \
        [](const PipelineConfig& c) { return std::to_string(c.expr); }}
#define LLEVC_DOUBLE(sec, name, expr)                                             \
  Field{sec, name,                                                                \
        [](PipelineConfig* c, const std::string& v) { c->expr = ParseNumber<double>(name, v); }, \
        [](const PipelineConfig& c) { return FormatDouble(c.expr); }}
#define LLEVC_BOOL(sec, name, expr)                                               \
  Field{sec, name,                                                                \
        [](PipelineConfig* c, const std::string& v) { c->expr = ParseBool(name, v); }, \
        [](const PipelineConfig& c) { return std::string(c.expr ? "true" : "false"); }}
#define LLEVC_INTS(sec, name, expr)                                               \
  Field{sec, name,                                                                \
        [](PipelineConfig* c, const std::string& v) { c->expr = ParseIntList(name, v); }, \
        [](const PipelineConfig& c) { return FormatIntList(c.expr); }}

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      LLEVC_INT("signal", "sample_rate", signal.sample_rate),
      LLEVC_INT("signal", "fft_size", signal.fft_size),
      LLEVC_INT("signal", "window_size", signal.window_size),
      LLEVC_INT("signal", "hop_size", signal.hop_size),
      LLEVC_INT("signal", "mel_dim", signal.mel_dim),
      LLEVC_DOUBLE("signal", "fmin", signal.fmin),
      LLEVC_DOUBLE("signal", "fmax", signal.fmax),
      LLEVC_DOUBLE("signal", "log_floor", signal.log_floor),
      LLEVC_INT("signal", "griffin_lim_iterations", griffin_lim_iterations),

      LLEVC_INT("corpus", "speakers_a", corpus.speakers_a),
      LLEVC_INT("corpus", "speakers_b", corpus.speakers_b),
      LLEVC_INT("corpus", "utterances_per_speaker_a", corpus.utterances_per_speaker_a),
      LLEVC_INT("corpus", "utterances_per_speaker_b", corpus.utterances_per_speaker_b),
      Field{"corpus", "transcribed_language",
            [](PipelineConfig* c, const std::string& v) {
              try {
                c->corpus.transcribed_language = ParseLanguage(v);
              } catch (const Error&) {
                BadValue("transcribed_language", v);
              }
            },
            [](const PipelineConfig& c) {
              return std::string(LanguageName(c.corpus.transcribed_language));
            }},
      LLEVC_INT("corpus", "min_phonemes", corpus.utterance.min_phonemes),
      LLEVC_INT("corpus", "max_phonemes", corpus.utterance.max_phonemes),
      LLEVC_INT("corpus", "min_total_frames", corpus.utterance.min_total_frames),

      LLEVC_INT("model", "latent_dim", model.latent_dim),
      LLEVC_INTS("model", "encoder_widths", model.encoder_widths),
      LLEVC_INTS("model", "decoder_widths", model.decoder_widths),
      LLEVC_INTS("model", "bias_sites", model.bias_sites),
      Field{"model", "activation",
            [](PipelineConfig* c, const std::string& v) {
              if (v == "tanh") {
                c->model.activation = Activation::kTanh;
              } else if (v == "relu") {
                c->model.activation = Activation::kRelu;
              } else {
                BadValue("activation", v);
              }
            },
            [](const PipelineConfig& c) {
              return std::string(c.model.activation == Activation::kTanh ? "tanh" : "relu");
            }},
      LLEVC_DOUBLE("model", "logvar_min", model.logvar_min),
      LLEVC_DOUBLE("model", "logvar_max", model.logvar_max),
      LLEVC_U64("model", "init_seed", model.init_seed),

      LLEVC_DOUBLE("train", "beta", train.beta),
      LLEVC_INT("train", "batch_size", train.batch_size),
      LLEVC_INT("train", "max_steps", train.max_steps),
      LLEVC_DOUBLE("train", "validation_fraction", train.validation_fraction),
      LLEVC_DOUBLE("train", "learning_rate", train.adam.learning_rate),
      Field{"train", "tie_direction",
            [](PipelineConfig* c, const std::string& v) {
              if (v == "acoustic_to_linguistic") {
                c->train.tie_direction = TieDirection::kAcousticToLinguistic;
              } else if (v == "linguistic_to_acoustic") {
                c->train.tie_direction = TieDirection::kLinguisticToAcoustic;
              } else {
                BadValue("tie_direction", v);
              }
            },
            [](const PipelineConfig& c) {
              return std::string(c.train.tie_direction == TieDirection::kAcousticToLinguistic
                                     ? "acoustic_to_linguistic"
                                     : "linguistic_to_acoustic");
            }},
      LLEVC_DOUBLE("train", "acoustic_reconstruction_weight",
                   train.acoustic_reconstruction_weight),
      LLEVC_INT("train", "log_every", train.log_every),
      LLEVC_INT("train", "checkpoint_every", train.checkpoint_every),

      LLEVC_DOUBLE("adapt", "learning_rate", adapt.adam.learning_rate),
      LLEVC_INT("adapt", "max_steps", adapt.max_steps),
      LLEVC_INT("adapt", "batch_size", adapt.batch_size),
      LLEVC_BOOL("adapt", "freeze_acoustic_encoder", adapt.freeze_acoustic_encoder),

      LLEVC_INT("eval", "targets_per_language", eval.targets_per_language),
      LLEVC_INT("eval", "sources_per_language", eval.sources_per_language),
      LLEVC_INT("eval", "adaptation_utterances", eval.adaptation_utterances),
      LLEVC_INT("eval", "eval_utterances_per_source", eval.eval_utterances_per_source),

      LLEVC_DOUBLE("probe", "train_fraction", probe.train_fraction),
      LLEVC_DOUBLE("probe", "l2", probe.l2),
      LLEVC_INT("probe", "iterations", probe.iterations),
      LLEVC_DOUBLE("probe", "learning_rate", probe.learning_rate),
  };
  return fields;
}

#undef LLEVC_INT
#undef LLEVC_U64
#undef LLEVC_DOUBLE
#undef LLEVC_BOOL
#undef LLEVC_INTS

}  // namespace

PipelineConfig ParsePipelineConfig(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kConfigError, std::string("malformed ini: ") + e.what());
  }
  PipelineConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw Error(ErrorCode::kConfigError, "key '" + section + "' outside a section");
    }
    for (const auto& [key, value] : body) {
      const Field* field = nullptr;
      for (const auto& f : Fields()) {
        if (f.section == section && f.key == key) field = &f;
      }
      if (field == nullptr) {
        throw Error(ErrorCode::kConfigError, "unknown key '" + section + "." + key + "'");
      }
      field->set(&cfg, value.get_value<std::string>());
    }
  }
  cfg.corpus.frame = cfg.signal;
  cfg.model.mel_dim = cfg.signal.mel_dim;
  try {
    ValidateFrameConfig(cfg.signal);
    ValidateModelConfig(cfg.model);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
  return cfg;
}

PipelineConfig LoadPipelineConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kConfigError, "cannot read config " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ParsePipelineConfig(ss.str());
}

std::string PipelineConfigToIni(const PipelineConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& f : Fields()) {
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

}  // namespace llevc
