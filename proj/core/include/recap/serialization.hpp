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

#include <nlohmann/json.hpp>

#include "recap/channelsim.hpp"
#include "recap/corpus.hpp"
#include "recap/embedder.hpp"
#include "recap/loss.hpp"
#include "recap/model.hpp"
#include "recap/simnet.hpp"
#include "recap/trainer.hpp"
#include "recap/triplets.hpp"

namespace recap {

// JSON mappings for every config type. Readers start from defaults, override
// the keys present, and throw ConfigError naming the full key path for an
// unknown key or a badly typed value.

nlohmann::json to_json(const ChannelParams& v);
nlohmann::json to_json(const SynthSpec& v);
nlohmann::json to_json(const SplitSpec& v);
nlohmann::json to_json(const PatchFilterConfig& v);
nlohmann::json to_json(const EmbedderConfig& v);
nlohmann::json to_json(const SimNetConfig& v);
nlohmann::json to_json(const ModelConfig& v);
nlohmann::json to_json(const LossConfig& v);
nlohmann::json to_json(const MiningConfig& v);
nlohmann::json to_json(const TrainConfig& v);

void read_json(const nlohmann::json& j, ChannelParams& v, const std::string& path);
void read_json(const nlohmann::json& j, SynthSpec& v, const std::string& path);
void read_json(const nlohmann::json& j, SplitSpec& v, const std::string& path);
void read_json(const nlohmann::json& j, PatchFilterConfig& v, const std::string& path);
void read_json(const nlohmann::json& j, EmbedderConfig& v, const std::string& path);
void read_json(const nlohmann::json& j, SimNetConfig& v, const std::string& path);
void read_json(const nlohmann::json& j, ModelConfig& v, const std::string& path);
void read_json(const nlohmann::json& j, LossConfig& v, const std::string& path);
void read_json(const nlohmann::json& j, MiningConfig& v, const std::string& path);
void read_json(const nlohmann::json& j, TrainConfig& v, const std::string& path);

/// Throws ConfigError for any key of \p j outside \p allowed.
void require_known_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                        const std::string& path);

}  // namespace recap
