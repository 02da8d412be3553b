// Copyright 2026 The recap Authors
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
#include "recap/model.hpp"

#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "recap/error.hpp"
#include "recap/serialization.hpp"

namespace recap {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'R', 'C', 'A', 'P', 'W', '0', '0', '1'};
constexpr int kFormat = 1;

enum : std::uint8_t { kFloat32 = 0, kFloat64 = 1 };

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& v, const fs::path& file) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("checkpoint weights truncated: " + file.string());
}

template <typename T>
void write_tensors(std::ostream& out, const std::vector<Parameter<T>>& params) {
  constexpr std::uint8_t dtype = sizeof(T) == 4 ? kFloat32 : kFloat64;
  for (const auto& p : params) {
    write_pod(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_pod(out, dtype);
    write_pod(out, static_cast<std::uint64_t>(p.value.size()));
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(T)));
  }
}

template <typename T>
void read_tensors(std::istream& in, std::vector<Parameter<T>>& params, const fs::path& file) {
  constexpr std::uint8_t expected_dtype = sizeof(T) == 4 ? kFloat32 : kFloat64;
  for (auto& p : params) {
    std::uint32_t name_len = 0;
    read_pod(in, name_len, file);
    if (name_len > 256) throw IoError("corrupt checkpoint (tensor name length): " + file.string());
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    std::uint8_t dtype = 0;
    std::uint64_t count = 0;
    read_pod(in, dtype, file);
    read_pod(in, count, file);
    if (!in || name != p.name || dtype != expected_dtype || count != p.value.size()) {
      throw IoError("corrupt checkpoint: tensor '" + name + "' does not match expected '" + p.name +
                    "' (" + std::to_string(p.value.size()) + " values)");
    }
    in.read(reinterpret_cast<char*>(p.value.data()), static_cast<std::streamsize>(count * sizeof(T)));
    if (!in) throw IoError("checkpoint weights truncated: " + file.string());
  }
}

}  // namespace

ForensicModel::ForensicModel(const ModelConfig& config)
    : embedder(config.embedder), simnet(config.simnet, config.embedder.embed_dim) {}

void save_checkpoint(const ForensicModel& model, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory '" + dir.string() + "': " + ec.message());
  {
    std::ofstream out(dir / "weights.bin", std::ios::binary);
    if (!out) throw IoError("cannot write '" + (dir / "weights.bin").string() + "'");
    out.write(kMagic, sizeof(kMagic));
    const auto& ep = model.embedder.parameters();
    const auto& sp = model.simnet.parameters();
    write_pod(out, static_cast<std::uint32_t>(ep.size() + sp.size()));
    write_tensors(out, ep);
    write_tensors(out, sp);
    if (!out) throw IoError("failed writing '" + (dir / "weights.bin").string() + "'");
  }
  nlohmann::json meta;
  meta["format"] = kFormat;
  meta["model"] = to_json(model.config());
  meta["seeds"] = {{"embedder_init", model.embedder.config().init_seed},
                   {"simnet_init", model.simnet.config().init_seed}};
  meta["step"] = model.step;
  meta["extras"] = model.extras;
  std::ofstream out(dir / "metadata.json");
  if (!out) throw IoError("cannot write '" + (dir / "metadata.json").string() + "'");
  out << meta.dump(2) << '\n';
}

ForensicModel load_checkpoint(const fs::path& dir, const ModelConfig* expected) {
  const auto meta_path = dir / "metadata.json";
  const auto weights_path = dir / "weights.bin";
  if (!fs::is_directory(dir) || !fs::exists(meta_path) || !fs::exists(weights_path)) {
    throw IoError("missing checkpoint: '" + dir.string() + "' lacks metadata.json or weights.bin");
  }
  nlohmann::json meta;
  try {
    std::ifstream in(meta_path);
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("corrupt checkpoint metadata '" + meta_path.string() + "': " + e.what());
  }
  if (!meta.contains("format") || meta["format"] != kFormat || !meta.contains("model")) {
    throw IoError("unsupported checkpoint format in '" + meta_path.string() + "'");
  }
  ModelConfig config;
  read_json(meta["model"], config, "checkpoint.model");
  if (expected && !(*expected == config)) {
    std::string detail;
    if (expected->embedder.embed_dim != config.embedder.embed_dim) {
      detail = " (embed_dim " + std::to_string(config.embedder.embed_dim) + " in checkpoint, " +
               std::to_string(expected->embedder.embed_dim) + " expected)";
    }
    throw ConfigError("checkpoint config mismatch in '" + dir.string() + "'" + detail);
  }
  ForensicModel model(config);
  std::ifstream in(weights_path, std::ios::binary);
  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("corrupt checkpoint weights (bad magic): " + weights_path.string());
  }
  std::uint32_t count = 0;
  read_pod(in, count, weights_path);
  if (count != model.embedder.parameters().size() + model.simnet.parameters().size()) {
    throw IoError("corrupt checkpoint weights (tensor count): " + weights_path.string());
  }
  read_tensors(in, model.embedder.parameters(), weights_path);
  read_tensors(in, model.simnet.parameters(), weights_path);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError("corrupt checkpoint weights (trailing bytes): " + weights_path.string());
  }
  model.step = meta.value("step", std::uint64_t{0});
  if (meta.contains("extras")) model.extras = meta["extras"].get<std::map<std::string, double>>();
  return model;
}

}  // namespace recap
