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

#include "llevc/eval.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "llevc/convert.h"

namespace llevc {

namespace {

using json = nlohmann::json;

uint64_t StableHash(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t LangTag(Language lang) { return lang == Language::kA ? 0 : 1; }

Matrix DctMatrix(int n) {
  Matrix c(n, n);
  for (int k = 0; k < n; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (int i = 0; i < n; ++i) {
      c(k, i) = scale * std::cos(std::numbers::pi * k * (2.0 * i + 1.0) / (2.0 * n));
    }
  }
  return c;
}

struct SourceUtterance {
  UtteranceSpec spec;
  uint64_t render_seed = 0;
};

SourceUtterance EvalUtterance(const EvalSetup& setup, const std::string& source,
                              Language lang, int index) {
  const uint64_t tag = (LangTag(lang) << 32) | static_cast<uint64_t>(index);
  SourceUtterance u;
  u.spec = SampleUtterance(source + "-" + std::string(LanguageName(lang)) + "-" +
                               std::to_string(index),
                           source, DefaultInventory(lang), setup.utterance,
                           MixSeed(setup.seed, 43, StableHash(source), tag));
  u.render_seed = MixSeed(setup.seed, 44, StableHash(source), tag);
  return u;
}

}  // namespace

Matrix MelCepstrum(const Matrix& log_mel) {
  return log_mel * DctMatrix(static_cast<int>(log_mel.cols())).transpose();
}

double Mcd(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeError,
                "mcd: " + std::to_string(a.rows()) + " vs " +
                    std::to_string(b.rows()) + " frames");
  }
  if (a.rows() == 0) return 0.0;
  const Eigen::Index order = std::min<Eigen::Index>(kMcdOrder, a.cols() - 1);
  const Matrix diff = (MelCepstrum(a) - MelCepstrum(b)).middleCols(1, order);
  const double k = 10.0 / std::log(10.0);
  const Vector per_frame =
      (2.0 * diff.rowwise().squaredNorm()).array().sqrt().matrix() * k;
  return per_frame.mean();
}

double SpeakerProbe(const std::vector<LabeledSequence>& data,
                    const ProbeConfig& cfg) {
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < data.size(); ++i) by_label[data[i].label].push_back(i);
  if (by_label.size() < 2) {
    throw Error(ErrorCode::kDegenerateLabels,
                "speaker probe needs at least two labels, got " +
                    std::to_string(by_label.size()));
  }
  for (const auto& [label, idx] : by_label) {
    if (idx.size() < 10) {
      throw Error(ErrorCode::kInvalidArgument,
                  "label '" + label + "' has " + std::to_string(idx.size()) +
                      " sequences, need at least 10");
    }
  }
  const Eigen::Index dim = data.front().frames.cols();
  for (const auto& s : data) {
    if (s.frames.cols() != dim) throw Error(ErrorCode::kShapeError, "probe feature width");
  }

  std::vector<std::pair<std::size_t, int>> train_seqs, test_seqs;
  int class_index = 0;
  for (auto& [label, idx] : by_label) {
    std::vector<std::size_t> order = idx;
    std::mt19937_64 rng(MixSeed(cfg.seed, 51, StableHash(label)));
    std::shuffle(order.begin(), order.end(), rng);
    const int n = static_cast<int>(order.size());
    const int n_train = std::clamp(static_cast<int>(std::lround(cfg.train_fraction * n)), 1, n - 1);
    for (int i = 0; i < n; ++i) {
      (i < n_train ? train_seqs : test_seqs).push_back({order[i], class_index});
    }
    ++class_index;
  }
  const int classes = class_index;

  auto stack = [&](const std::vector<std::pair<std::size_t, int>>& seqs,
                   Matrix* x, std::vector<int>* y) {
    Eigen::Index rows = 0;
    for (const auto& [i, _] : seqs) rows += data[i].frames.rows();
    x->resize(rows, dim);
    y->clear();
    Eigen::Index r = 0;
    for (const auto& [i, c] : seqs) {
      x->middleRows(r, data[i].frames.rows()) = data[i].frames;
      r += data[i].frames.rows();
      y->insert(y->end(), data[i].frames.rows(), c);
    }
  };
  Matrix x_train, x_test;
  std::vector<int> y_train, y_test;
  stack(train_seqs, &x_train, &y_train);
  stack(test_seqs, &x_test, &y_test);

  const RowVector mean = x_train.colwise().mean();
  RowVector stddev =
      ((x_train.rowwise() - mean).array().square().colwise().mean()).sqrt();
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (stddev[j] < 1e-12) stddev[j] = 1.0;
  }
  auto standardize = [&](Matrix* x) {
    *x = ((x->rowwise() - mean).array().rowwise() / stddev.array()).matrix();
  };
  standardize(&x_train);
  standardize(&x_test);

  Matrix one_hot = Matrix::Zero(x_train.rows(), classes);
  for (std::size_t i = 0; i < y_train.size(); ++i) one_hot(i, y_train[i]) = 1.0;

  // Full-batch softmax regression with Adam.
  Matrix w = Matrix::Zero(dim, classes);
  RowVector b = RowVector::Zero(classes);
  Matrix mw = w, vw = w;
  RowVector mb = b, vb = b;
  const double n = static_cast<double>(x_train.rows());
  for (int it = 1; it <= cfg.iterations; ++it) {
    Matrix logits = x_train * w;
    logits.rowwise() += b;
    const Vector row_max = logits.rowwise().maxCoeff();
    Matrix prob = (logits.colwise() - row_max).array().exp().matrix();
    const Vector z = prob.rowwise().sum();
    prob = prob.array().colwise() / z.array();
    const Matrix d_logits = (prob - one_hot) / n;
    const Matrix gw = x_train.transpose() * d_logits + cfg.l2 * w;
    const RowVector gb = d_logits.colwise().sum();
    const double c1 = 1.0 - std::pow(0.9, it);
    const double c2 = 1.0 - std::pow(0.999, it);
    mw = 0.9 * mw + 0.1 * gw;
    vw = 0.999 * vw + 0.001 * gw.cwiseProduct(gw);
    mb = 0.9 * mb + 0.1 * gb;
    vb = 0.999 * vb + 0.001 * gb.cwiseProduct(gb);
    w.array() -= cfg.learning_rate * (mw.array() / c1) / ((vw.array() / c2).sqrt() + 1e-8);
    b.array() -= cfg.learning_rate * (mb.array() / c1) / ((vb.array() / c2).sqrt() + 1e-8);
  }

  Matrix logits = x_test * w;
  logits.rowwise() += b;
  int correct = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index best;
    logits.row(r).maxCoeff(&best);
    if (best == y_test[r]) ++correct;
  }
  return logits.rows() > 0 ? static_cast<double>(correct) / logits.rows() : 0.0;
}

std::string_view ScenarioName(ScenarioId id) {
  switch (id) {
    case ScenarioId::kAAA: return "AA-A";
    case ScenarioId::kAAB: return "AA-B";
    case ScenarioId::kABA: return "AB-A";
    case ScenarioId::kABB: return "AB-B";
    case ScenarioId::kBBBReference: return "BB-B-reference";
  }
  return "?";
}

ScenarioId ParseScenarioId(std::string_view name) {
  for (ScenarioId id : {ScenarioId::kAAA, ScenarioId::kAAB, ScenarioId::kABA,
                        ScenarioId::kABB, ScenarioId::kBBBReference}) {
    if (ScenarioName(id) == name) return id;
  }
  throw Error(ErrorCode::kInvalidScenario,
              "unknown scenario '" + std::string(name) + "'");
}

Language BaseLanguage(ScenarioId id) {
  return id == ScenarioId::kBBBReference ? Language::kB : Language::kA;
}

void ValidateScenario(const ScenarioSpec& spec) {
  Language adapt = Language::kA, convert = Language::kA;
  switch (spec.id) {
    case ScenarioId::kAAA: break;
    case ScenarioId::kAAB: convert = Language::kB; break;
    case ScenarioId::kABA: adapt = Language::kB; break;
    case ScenarioId::kABB:
    case ScenarioId::kBBBReference:
      adapt = convert = Language::kB;
      break;
  }
  if (spec.adapt_language != adapt || spec.convert_language != convert) {
    throw Error(ErrorCode::kInvalidScenario,
                std::string(ScenarioName(spec.id)) + " requires adaptation in " +
                    std::string(LanguageName(adapt)) + " and conversion in " +
                    std::string(LanguageName(convert)));
  }
  if (spec.target_speaker.empty() || spec.source_speakers.empty()) {
    throw Error(ErrorCode::kInvalidScenario,
                std::string(ScenarioName(spec.id)) + " needs a target and sources");
  }
}

const SyntheticSpeaker& EvalSetup::Speaker(const std::string& id) const {
  for (const auto& s : speakers) {
    if (s.speaker_id == id) return s;
  }
  throw Error(ErrorCode::kInvalidScenario, "unknown speaker '" + id + "'");
}

EvalSetup MakeEvalSetup(const EvalSetupConfig& cfg, const FrameConfig& frame,
                        uint64_t seed) {
  EvalSetup setup;
  setup.adaptation_utterances = cfg.adaptation_utterances;
  setup.eval_utterances_per_source = cfg.eval_utterances_per_source;
  setup.frame = frame;
  setup.seed = seed;
  for (Language lang : {Language::kA, Language::kB}) {
    const std::string tag(LanguageName(lang));
    for (int i = 0; i < cfg.targets_per_language; ++i) {
      setup.speakers.push_back(SampleSpeaker("target-" + tag + std::to_string(i), lang,
                                             MixSeed(seed, 31, LangTag(lang), i)));
    }
    for (int i = 0; i < cfg.sources_per_language; ++i) {
      setup.speakers.push_back(SampleSpeaker("source-" + tag + std::to_string(i), lang,
                                             MixSeed(seed, 32, LangTag(lang), i)));
    }
  }
  return setup;
}

std::vector<Matrix> AdaptationMels(const EvalSetup& setup,
                                   const std::string& target, Language lang) {
  const SyntheticSpeaker& spk = setup.Speaker(target);
  const PhonemeInventory& inv = DefaultInventory(lang);
  const MelFilterbank fb(setup.frame);
  std::vector<Matrix> mels;
  for (int i = 0; i < setup.adaptation_utterances; ++i) {
    const uint64_t tag = (LangTag(lang) << 32) | static_cast<uint64_t>(i);
    const UtteranceSpec spec =
        SampleUtterance("adapt-" + target + "-" + std::to_string(i), target, inv,
                        setup.utterance, MixSeed(setup.seed, 41, StableHash(target), tag));
    const Waveform w = RenderUtterance(spec, spk, inv,
                                       MixSeed(setup.seed, 42, StableHash(target), tag),
                                       setup.frame)
                           .waveform;
    mels.push_back(ComputeMelSpectrogram(w, setup.frame, fb).frames);
  }
  return mels;
}

const ScenarioSummary* EvalReport::Summary(std::string_view scenario) const {
  for (const auto& s : summaries) {
    if (s.scenario == scenario) return &s;
  }
  return nullptr;
}

EvalReport RunScenarios(const std::vector<ScenarioSpec>& specs,
                        const BaseCheckpoints& checkpoints,
                        const EvalSetup& setup, const AdaptConfig& adapt) {
  EvalReport report;
  report.metadata["seed"] = std::to_string(setup.seed);
  report.metadata["scenarios"] = std::to_string(specs.size());
  if (specs.empty()) return report;
  for (const auto& spec : specs) {
    ValidateScenario(spec);
    if (!checkpoints.contains(BaseLanguage(spec.id))) {
      throw Error(ErrorCode::kMissingCheckpoint,
                  std::string(ScenarioName(spec.id)) + " needs a base model trained on " +
                      std::string(LanguageName(BaseLanguage(spec.id))));
    }
  }

  const MelFilterbank fb(setup.frame);
  std::map<std::tuple<Language, std::string, Language>, Model> adapted;
  std::map<std::tuple<std::string, Language, int>, std::pair<SourceUtterance, Matrix>> sources;

  for (const auto& spec : specs) {
    const Language base_lang = BaseLanguage(spec.id);
    const auto key = std::make_tuple(base_lang, spec.target_speaker, spec.adapt_language);
    auto it = adapted.find(key);
    if (it == adapted.end()) {
      const auto mels = AdaptationMels(setup, spec.target_speaker, spec.adapt_language);
      it = adapted.emplace(key, AdaptTarget(checkpoints.at(base_lang), mels, adapt).model).first;
    }
    const Model& model = it->second;
    const SyntheticSpeaker& target = setup.Speaker(spec.target_speaker);
    const PhonemeInventory& inv = DefaultInventory(spec.convert_language);

    for (const auto& source_id : spec.source_speakers) {
      const SyntheticSpeaker& source = setup.Speaker(source_id);
      for (int i = 0; i < setup.eval_utterances_per_source; ++i) {
        const auto skey = std::make_tuple(source_id, spec.convert_language, i);
        auto sit = sources.find(skey);
        if (sit == sources.end()) {
          SourceUtterance u = EvalUtterance(setup, source_id, spec.convert_language, i);
          const Waveform w =
              RenderUtterance(u.spec, source, inv, u.render_seed, setup.frame).waveform;
          Matrix mel = ComputeMelSpectrogram(w, setup.frame, fb).frames;
          sit = sources.emplace(skey, std::make_pair(std::move(u), std::move(mel))).first;
        }
        const auto& [utt, source_mel] = sit->second;
        const Waveform ref_wave = RenderParallelReference(
            utt.spec, target, inv, utt.render_seed, setup.frame);
        const Matrix reference = ComputeMelSpectrogram(ref_wave, setup.frame, fb).frames;

        MelSpectrogram in;
        in.frames = source_mel;
        in.config = setup.frame;
        const ConvertedMel out = ConvertMel(in, model);

        EvalPair pair;
        pair.scenario = std::string(ScenarioName(spec.id));
        pair.source = source_id;
        pair.target = spec.target_speaker;
        pair.utterance = utt.spec.utterance_id;
        pair.frames_in = static_cast<int>(source_mel.rows());
        pair.frames_out = static_cast<int>(out.mel.frames.rows());
        pair.mcd = Mcd(out.mel.frames, reference);
        pair.baseline_mcd = Mcd(source_mel, reference);
        report.durations_preserved =
            report.durations_preserved && pair.frames_in == pair.frames_out;
        report.pairs.push_back(std::move(pair));
      }
    }
  }

  std::vector<std::string> order;
  for (const auto& p : report.pairs) {
    if (std::find(order.begin(), order.end(), p.scenario) == order.end()) {
      order.push_back(p.scenario);
    }
  }
  for (const auto& name : order) {
    ScenarioSummary s;
    s.scenario = name;
    double sum = 0.0, sum_sq = 0.0, base = 0.0;
    for (const auto& p : report.pairs) {
      if (p.scenario != name) continue;
      ++s.count;
      sum += p.mcd;
      sum_sq += p.mcd * p.mcd;
      base += p.baseline_mcd;
    }
    s.mcd_mean = sum / s.count;
    s.mcd_std = std::sqrt(std::max(0.0, sum_sq / s.count - s.mcd_mean * s.mcd_mean));
    s.baseline_mean = base / s.count;
    report.summaries.push_back(s);
  }
  return report;
}

std::vector<ScenarioSpec> DefaultScenarios(const EvalSetup& setup,
                                           bool include_reference) {
  std::vector<ScenarioSpec> specs;
  auto sources_in = [&](Language lang) {
    std::vector<std::string> ids;
    for (const auto& s : setup.speakers) {
      if (s.speaker_id.starts_with("source-") && s.language_home == lang) {
        ids.push_back(s.speaker_id);
      }
    }
    return ids;
  };
  std::vector<std::tuple<ScenarioId, Language, Language>> ids = {
      {ScenarioId::kAAA, Language::kA, Language::kA},
      {ScenarioId::kAAB, Language::kA, Language::kB},
      {ScenarioId::kABA, Language::kB, Language::kA},
      {ScenarioId::kABB, Language::kB, Language::kB}};
  if (include_reference) ids.push_back({ScenarioId::kBBBReference, Language::kB, Language::kB});
  for (const auto& [id, adapt, convert] : ids) {
    for (const auto& t : setup.speakers) {
      if (!t.speaker_id.starts_with("target-")) continue;
      specs.push_back({id, adapt, convert, t.speaker_id, sources_in(convert)});
    }
  }
  return specs;
}

std::string EvalReportToJson(const EvalReport& report) {
  json j;
  j["pairs"] = json::array();
  for (const auto& p : report.pairs) {
    j["pairs"].push_back({{"scenario", p.scenario},
                          {"source", p.source},
                          {"target", p.target},
                          {"utterance", p.utterance},
                          {"mcd", p.mcd},
                          {"baseline_mcd", p.baseline_mcd},
                          {"frames_in", p.frames_in},
                          {"frames_out", p.frames_out}});
  }
  j["summaries"] = json::array();
  for (const auto& s : report.summaries) {
    j["summaries"].push_back({{"scenario", s.scenario},
                              {"count", s.count},
                              {"mcd_mean", s.mcd_mean},
                              {"mcd_std", s.mcd_std},
                              {"baseline_mean", s.baseline_mean}});
  }
  j["probe_accuracies"] = report.probe_accuracies;
  j["durations_preserved"] = report.durations_preserved;
  j["metadata"] = report.metadata;
  return j.dump(1);
}

std::string EvalReportToCsv(const EvalReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "scenario,source,target,utterance,mcd\n";
  for (const auto& p : report.pairs) {
    out << p.scenario << ',' << p.source << ',' << p.target << ','
        << p.utterance << ',' << p.mcd << '\n';
  }
  return out.str();
}

}  // namespace llevc
