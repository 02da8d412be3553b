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
#include "recap/serialization.hpp"

#include <algorithm>

#include "recap/error.hpp"

namespace recap {

using nlohmann::json;

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError((path.empty() ? "config" : path) + ": expected an object");
}

template <typename T>
void read(const json& j, std::string_view key, T& out, const std::string& path) {
  auto it = j.find(std::string(key));
  if (it == j.end()) return;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError("");
      if constexpr (std::is_unsigned_v<T>) {
        if (it->is_number_integer() && !it->is_number_unsigned() && it->template get<long long>() < 0) {
          throw ConfigError("");
        }
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ConfigError("");
    }
    out = it->template get<T>();
  } catch (const std::exception&) {
    throw ConfigError(join(path, key) + ": invalid value " + it->dump());
  }
}

template <typename E, typename Parse>
void read_enum(const json& j, std::string_view key, E& out, const std::string& path, Parse parse) {
  std::string text;
  read(j, key, text, path);
  if (text.empty()) return;
  try {
    out = parse(text);
  } catch (const Error& e) {
    throw ConfigError(join(path, key) + ": " + e.what());
  }
}

}  // namespace

void require_known_keys(const json& j, std::initializer_list<std::string_view> allowed,
                        const std::string& path) {
  require_object(j, path);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(join(path, key) + ": unknown key");
    }
  }
}

json to_json(const ChannelParams& v) {
  json j;
  j["halftone"] = to_string(v.halftone);
  j["cell_size"] = v.cell_size;
  j["blur_sigma"] = v.blur_sigma;
  j["noise_sigma"] = v.noise_sigma;
  j["color_matrix"] = v.color_matrix;
  j["gamma"] = v.gamma;
  j["grid_period"] = v.grid_period ? json(*v.grid_period) : json(nullptr);
  j["grid_depth"] = v.grid_depth;
  j["seed"] = v.seed;
  return j;
}

void read_json(const json& j, ChannelParams& v, const std::string& path) {
  require_known_keys(j, {"halftone", "cell_size", "blur_sigma", "noise_sigma", "color_matrix", "gamma",
                         "grid_period", "grid_depth", "seed"},
                     path);
  read_enum(j, "halftone", v.halftone, path, parse_halftone);
  read(j, "cell_size", v.cell_size, path);
  read(j, "blur_sigma", v.blur_sigma, path);
  read(j, "noise_sigma", v.noise_sigma, path);
  if (auto it = j.find("color_matrix"); it != j.end()) {
    try {
      v.color_matrix = it->get<ColorMatrix>();
    } catch (const std::exception&) {
      throw ConfigError(join(path, "color_matrix") + ": expected a 3x3 array of numbers");
    }
  }
  if (auto it = j.find("gamma"); it != j.end()) {
    if (it->is_number()) {
      v.gamma.fill(it->get<double>());
    } else {
      try {
        v.gamma = it->get<std::array<double, 3>>();
      } catch (const std::exception&) {
        throw ConfigError(join(path, "gamma") + ": expected a number or three numbers");
      }
    }
  }
  if (auto it = j.find("grid_period"); it != j.end()) {
    if (it->is_null()) v.grid_period.reset();
    else if (it->is_number_integer()) v.grid_period = it->get<int>();
    else throw ConfigError(join(path, "grid_period") + ": expected an integer or null");
  }
  read(j, "grid_depth", v.grid_depth, path);
  read(j, "seed", v.seed, path);
}

json to_json(const SynthSpec& v) {
  json j;
  j["n_templates"] = v.n_templates;
  j["n_genuine_per_template"] = v.n_genuine_per_template;
  j["n_recaptured_per_template"] = v.n_recaptured_per_template;
  j["channel_mix"] = {{"print_scan", v.channel_mix.print_scan},
                      {"display_capture", v.channel_mix.display_capture}};
  j["image_size"] = {v.height, v.width};
  j["master_seed"] = v.master_seed;
  j["template_prefix"] = v.template_prefix;
  j["dataset_id"] = v.dataset_id;
  j["low_resolution_fraction"] = v.low_resolution_fraction;
  j["capture"] = to_json(v.capture);
  j["phone_capture"] = to_json(v.phone_capture);
  j["print_scan"] = to_json(v.print_scan);
  j["display_capture"] = to_json(v.display_capture);
  return j;
}

void read_json(const json& j, SynthSpec& v, const std::string& path) {
  require_known_keys(j, {"n_templates", "n_genuine_per_template", "n_recaptured_per_template",
                         "channel_mix", "image_size", "master_seed", "template_prefix", "dataset_id",
                         "low_resolution_fraction", "capture", "phone_capture", "print_scan",
                         "display_capture"},
                     path);
  read(j, "n_templates", v.n_templates, path);
  read(j, "n_genuine_per_template", v.n_genuine_per_template, path);
  read(j, "n_recaptured_per_template", v.n_recaptured_per_template, path);
  if (auto it = j.find("channel_mix"); it != j.end()) {
    const auto sub = join(path, "channel_mix");
    require_known_keys(*it, {"print_scan", "display_capture"}, sub);
    read(*it, "print_scan", v.channel_mix.print_scan, sub);
    read(*it, "display_capture", v.channel_mix.display_capture, sub);
  }
  if (auto it = j.find("image_size"); it != j.end()) {
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_integer() ||
        !(*it)[1].is_number_integer()) {
      throw ConfigError(join(path, "image_size") + ": expected [height, width]");
    }
    v.height = (*it)[0].get<int>();
    v.width = (*it)[1].get<int>();
  }
  read(j, "master_seed", v.master_seed, path);
  read(j, "template_prefix", v.template_prefix, path);
  read(j, "dataset_id", v.dataset_id, path);
  read(j, "low_resolution_fraction", v.low_resolution_fraction, path);
  if (auto it = j.find("capture"); it != j.end()) read_json(*it, v.capture, join(path, "capture"));
  if (auto it = j.find("phone_capture"); it != j.end())
    read_json(*it, v.phone_capture, join(path, "phone_capture"));
  if (auto it = j.find("print_scan"); it != j.end())
    read_json(*it, v.print_scan, join(path, "print_scan"));
  if (auto it = j.find("display_capture"); it != j.end())
    read_json(*it, v.display_capture, join(path, "display_capture"));
}

json to_json(const SplitSpec& v) {
  return {{"ratios", v.ratios}, {"seed", v.seed}, {"stratify_by", v.stratify_by}};
}

void read_json(const json& j, SplitSpec& v, const std::string& path) {
  require_known_keys(j, {"ratios", "seed", "stratify_by"}, path);
  if (auto it = j.find("ratios"); it != j.end()) {
    try {
      v.ratios = it->get<std::array<double, 3>>();
    } catch (const std::exception&) {
      throw ConfigError(join(path, "ratios") + ": expected [train, val, test]");
    }
  }
  read(j, "seed", v.seed, path);
  if (auto it = j.find("stratify_by"); it != j.end()) {
    try {
      v.stratify_by = it->get<std::vector<std::string>>();
    } catch (const std::exception&) {
      throw ConfigError(join(path, "stratify_by") + ": expected a list of field names");
    }
  }
}

json to_json(const PatchFilterConfig& v) {
  return {{"min_std", v.min_std}, {"min_edge_fraction", v.min_edge_fraction},
          {"gradient_min", v.gradient_min}};
}

void read_json(const json& j, PatchFilterConfig& v, const std::string& path) {
  require_known_keys(j, {"min_std", "min_edge_fraction", "gradient_min"}, path);
  read(j, "min_std", v.min_std, path);
  read(j, "min_edge_fraction", v.min_edge_fraction, path);
  read(j, "gradient_min", v.gradient_min, path);
}

json to_json(const EmbedderConfig& v) {
  return {{"backbone", v.backbone},   {"channels", v.channels},
          {"head", {{"hidden_dim", v.hidden_dim}}},
          {"embed_dim", v.embed_dim}, {"freeze_backbone", v.freeze_backbone},
          {"init_seed", v.init_seed}};
}

void read_json(const json& j, EmbedderConfig& v, const std::string& path) {
  require_known_keys(j, {"backbone", "channels", "head", "embed_dim", "freeze_backbone", "init_seed"},
                     path);
  read(j, "backbone", v.backbone, path);
  if (auto it = j.find("channels"); it != j.end()) {
    try {
      v.channels = it->get<std::vector<int>>();
    } catch (const std::exception&) {
      throw ConfigError(join(path, "channels") + ": expected a list of integers");
    }
  }
  if (auto it = j.find("head"); it != j.end()) {
    require_known_keys(*it, {"hidden_dim"}, join(path, "head"));
    read(*it, "hidden_dim", v.hidden_dim, join(path, "head"));
  }
  read(j, "embed_dim", v.embed_dim, path);
  read(j, "freeze_backbone", v.freeze_backbone, path);
  read(j, "init_seed", v.init_seed, path);
}

json to_json(const SimNetConfig& v) {
  return {{"hidden_dim", v.hidden_dim}, {"activation", v.activation}, {"init_seed", v.init_seed}};
}

void read_json(const json& j, SimNetConfig& v, const std::string& path) {
  require_known_keys(j, {"hidden_dim", "activation", "init_seed"}, path);
  read(j, "hidden_dim", v.hidden_dim, path);
  read(j, "activation", v.activation, path);
  read(j, "init_seed", v.init_seed, path);
}

json to_json(const ModelConfig& v) {
  return {{"embedder", to_json(v.embedder)}, {"simnet", to_json(v.simnet)}};
}

void read_json(const json& j, ModelConfig& v, const std::string& path) {
  require_known_keys(j, {"embedder", "simnet"}, path);
  if (auto it = j.find("embedder"); it != j.end()) read_json(*it, v.embedder, join(path, "embedder"));
  if (auto it = j.find("simnet"); it != j.end()) read_json(*it, v.simnet, join(path, "simnet"));
}

json to_json(const LossConfig& v) {
  return {{"gamma", v.gamma}, {"alpha", v.alpha}, {"reduction", to_string(v.reduction)}};
}

void read_json(const json& j, LossConfig& v, const std::string& path) {
  require_known_keys(j, {"gamma", "alpha", "reduction"}, path);
  read(j, "gamma", v.gamma, path);
  read(j, "alpha", v.alpha, path);
  read_enum(j, "reduction", v.reduction, path, parse_reduction);
}

json to_json(const MiningConfig& v) {
  return {{"gamma", v.gamma},         {"mode", to_string(v.mode)}, {"max_per_anchor", v.max_per_anchor},
          {"max_total", v.max_total}, {"scope", v.scope}};
}

void read_json(const json& j, MiningConfig& v, const std::string& path) {
  require_known_keys(j, {"gamma", "mode", "max_per_anchor", "max_total", "scope"}, path);
  read(j, "gamma", v.gamma, path);
  read_enum(j, "mode", v.mode, path, parse_mining_mode);
  read(j, "max_per_anchor", v.max_per_anchor, path);
  read(j, "max_total", v.max_total, path);
  read(j, "scope", v.scope, path);
}

json to_json(const TrainConfig& v) {
  return {{"epochs", v.epochs},
          {"learning_rate", v.learning_rate},
          {"batch_size", v.batch_size},
          {"optimizer", to_string(v.optimizer)},
          {"beta1", v.beta1},
          {"beta2", v.beta2},
          {"epsilon", v.epsilon},
          {"loss", to_json(v.loss)},
          {"mining", to_json(v.mining)},
          {"seed", v.seed}};
}

void read_json(const json& j, TrainConfig& v, const std::string& path) {
  require_known_keys(j, {"epochs", "learning_rate", "batch_size", "optimizer", "beta1", "beta2",
                         "epsilon", "loss", "mining", "seed"},
                     path);
  read(j, "epochs", v.epochs, path);
  read(j, "learning_rate", v.learning_rate, path);
  read(j, "batch_size", v.batch_size, path);
  read_enum(j, "optimizer", v.optimizer, path, parse_optimizer);
  read(j, "beta1", v.beta1, path);
  read(j, "beta2", v.beta2, path);
  read(j, "epsilon", v.epsilon, path);
  if (auto it = j.find("loss"); it != j.end()) read_json(*it, v.loss, join(path, "loss"));
  // The miner's margin follows the loss margin unless set explicitly.
  v.mining.gamma = v.loss.gamma;
  if (auto it = j.find("mining"); it != j.end()) read_json(*it, v.mining, join(path, "mining"));
  read(j, "seed", v.seed, path);
}

}  // namespace recap
