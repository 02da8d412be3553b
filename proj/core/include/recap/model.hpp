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
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "recap/embedder.hpp"
#include "recap/simnet.hpp"

namespace recap {

struct ModelConfig {
  EmbedderConfig embedder;
  SimNetConfig simnet;

  bool operator==(const ModelConfig&) const = default;
};

/// Embedder and similarity subnet travel together: they are the model.
struct ForensicModel {
  Embedder embedder;
  SimNet simnet;
  std::uint64_t step = 0;
  std::map<std::string, double> extras;  // e.g. a calibrated threshold

  explicit ForensicModel(const ModelConfig& config);

  ModelConfig config() const { return {embedder.config(), simnet.config()}; }
};

/// Checkpoint directory layout:
///   weights.bin    tensors in declaration order (name, dtype, length, data)
///   metadata.json  config echo, seeds, training step, extras
void save_checkpoint(const ForensicModel& model, const std::filesystem::path& dir);

/// Throws IoError for a missing or corrupt checkpoint and ConfigError when
/// \p expected is given and disagrees with the stored configuration.
ForensicModel load_checkpoint(const std::filesystem::path& dir,
                              const ModelConfig* expected = nullptr);

}  // namespace recap
