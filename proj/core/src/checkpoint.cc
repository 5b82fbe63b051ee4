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

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include <nlohmann/json.hpp>

namespace llevc {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

using json = nlohmann::json;

constexpr char kMagic[4] = {'L', 'L', 'V', 'C'};

json ModelConfigToJson(const ModelConfig& c) {
  return {{"ling_dim", c.ling_dim},
          {"mel_dim", c.mel_dim},
          {"latent_dim", c.latent_dim},
          {"encoder_widths", c.encoder_widths},
          {"decoder_widths", c.decoder_widths},
          {"bias_sites", c.bias_sites},
          {"activation", c.activation == Activation::kTanh ? "tanh" : "relu"},
          {"logvar_min", c.logvar_min},
          {"logvar_max", c.logvar_max},
          {"init_seed", c.init_seed}};
}

ModelConfig ModelConfigFromJson(const json& j) {
  ModelConfig c;
  c.ling_dim = j.at("ling_dim").get<int>();
  c.mel_dim = j.at("mel_dim").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  c.encoder_widths = j.at("encoder_widths").get<std::vector<int>>();
  c.decoder_widths = j.at("decoder_widths").get<std::vector<int>>();
  c.bias_sites = j.at("bias_sites").get<std::vector<int>>();
  const std::string act = j.at("activation").get<std::string>();
  if (act != "tanh" && act != "relu") {
    throw Error(ErrorCode::kCorruptCheckpoint, "unknown activation " + act);
  }
  c.activation = act == "tanh" ? Activation::kTanh : Activation::kRelu;
  c.logvar_min = j.at("logvar_min").get<double>();
  c.logvar_max = j.at("logvar_max").get<double>();
  c.init_seed = j.at("init_seed").get<uint64_t>();
  return c;
}

void AppendRaw(std::vector<char>* out, const void* data, std::size_t bytes) {
  const char* p = static_cast<const char*>(data);
  out->insert(out->end(), p, p + bytes);
}

void AppendTensors(std::vector<char>* out, const ParameterPartition& p) {
  for (const auto& ref : NamedParameters(p)) {
    AppendRaw(out, ref.values.data(), ref.values.size_bytes());
  }
}

json TensorTable(const ParameterPartition& p) {
  json table = json::array();
  for (const auto& ref : NamedParameters(p)) {
    table.push_back({ref.name, ref.values.size()});
  }
  return table;
}

class Reader {
 public:
  Reader(const std::vector<char>& bytes, const std::filesystem::path& path)
      : bytes_(bytes), path_(path) {}

  void Read(void* dst, std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw Error(ErrorCode::kCorruptCheckpoint,
                  path_.string() + ": truncated");
    }
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  void ReadTensors(ParameterPartition* p) {
    for (auto& ref : NamedParameters(*p)) Read(ref.values.data(), ref.values.size_bytes());
  }

  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<char>& bytes_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 0;
};

}  // namespace

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  json header;
  header["model_config"] = ModelConfigToJson(ckpt.model.config);
  header["metadata"] = ckpt.metadata;
  header["step"] = ckpt.step;
  json speakers = json::array();
  for (const auto& [id, _] : ckpt.model.params.speaker_biases) speakers.push_back(id);
  header["speakers"] = speakers;
  header["tensors"] = TensorTable(ckpt.model.params);
  header["optimizer"] = ckpt.optimizer.has_value();
  if (ckpt.optimizer) header["adam_steps"] = ckpt.optimizer->steps;
  const std::string header_text = header.dump();

  std::vector<char> bytes;
  AppendRaw(&bytes, kMagic, 4);
  const uint32_t version = kCheckpointVersion;
  AppendRaw(&bytes, &version, 4);
  const uint64_t header_len = header_text.size();
  AppendRaw(&bytes, &header_len, 8);
  AppendRaw(&bytes, header_text.data(), header_text.size());
  AppendTensors(&bytes, ckpt.model.params);
  if (ckpt.optimizer) {
    AppendTensors(&bytes, ckpt.optimizer->first_moment);
    AppendTensors(&bytes, ckpt.optimizer->second_moment);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

void SaveCheckpoint(const std::filesystem::path& path, const Model& model) {
  Checkpoint ckpt;
  ckpt.model = model;
  SaveCheckpoint(path, ckpt);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  const std::vector<char> bytes(std::istreambuf_iterator<char>(in), {});
  Reader reader(bytes, path);

  char magic[4];
  reader.Read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorCode::kCorruptCheckpoint,
                path.string() + ": not a checkpoint file");
  }
  uint32_t version = 0;
  reader.Read(&version, 4);
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kIncompatibleCheckpoint,
                path.string() + ": version " + std::to_string(version) +
                    ", expected " + std::to_string(kCheckpointVersion));
  }
  uint64_t header_len = 0;
  reader.Read(&header_len, 8);
  if (header_len > bytes.size()) {
    throw Error(ErrorCode::kCorruptCheckpoint, path.string() + ": truncated");
  }
  std::string header_text(header_len, '\0');
  reader.Read(header_text.data(), header_len);

  Checkpoint ckpt;
  std::vector<std::string> speakers;
  json header;
  try {
    header = json::parse(header_text);
    ckpt.model.config = ModelConfigFromJson(header.at("model_config"));
    ckpt.metadata = header.at("metadata").get<std::map<std::string, std::string>>();
    ckpt.step = header.at("step").get<int64_t>();
    speakers = header.at("speakers").get<std::vector<std::string>>();
    ValidateModelConfig(ckpt.model.config);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorruptCheckpoint,
                path.string() + ": bad header: " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCorruptCheckpoint) throw;
    throw Error(ErrorCode::kCorruptCheckpoint, path.string() + ": " + e.what());
  }

  ckpt.model = InitializeModel(ckpt.model.config, speakers);
  if (TensorTable(ckpt.model.params) != header.at("tensors")) {
    throw Error(ErrorCode::kCorruptCheckpoint,
                path.string() + ": tensor table does not match config");
  }
  reader.ReadTensors(&ckpt.model.params);
  if (header.value("optimizer", false)) {
    AdamState state = InitAdam(ckpt.model.params);
    state.steps = header.at("adam_steps").get<int64_t>();
    reader.ReadTensors(&state.first_moment);
    reader.ReadTensors(&state.second_moment);
    ckpt.optimizer = std::move(state);
  }
  if (!reader.AtEnd()) {
    throw Error(ErrorCode::kCorruptCheckpoint,
                path.string() + ": trailing bytes after tensor data");
  }
  return ckpt;
}

std::string FileHash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace llevc
