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
#include <span>
#include <string_view>
#include <vector>

#include "recap/loss.hpp"
#include "recap/model.hpp"
#include "recap/triplets.hpp"

namespace recap {

enum class OptimizerKind { adam };

std::string_view to_string(OptimizerKind k) noexcept;
OptimizerKind parse_optimizer(std::string_view s);

struct TrainConfig {
  int epochs = 20;
  double learning_rate = 1e-4;
  int batch_size = 128;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  LossConfig loss;
  MiningConfig mining;
  std::uint64_t seed = 0;

  // Diagnostics, not part of the persisted config.
  std::filesystem::path epoch_checkpoint_dir;  // saves epoch_<k>/ when set
  bool keep_epoch_triplets = false;
};

void validate(const TrainConfig& config);

struct EpochRecord {
  int epoch = 0;
  double l_ts = 0.0;  // means over the epoch's triplets, end-of-epoch weights
  double l_ns = 0.0;
  double l_fl = 0.0;
  std::size_t triplet_count = 0;
  double wall_time = 0.0;  // seconds
  double val_l_fl = 0.0;   // mean over validation triplets (0 when none)
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 1-based; lowest val_l_fl, else the last epoch
};

struct TrainResult {
  ForensicModel model;
  TrainHistory history;
  std::vector<std::vector<Triplet>> epoch_triplets;  // when keep_epoch_triplets
};

/// Epoch loop: mine with the current weights, shuffle, one Adam step per
/// mini-batch of the forensic loss, then log and track the best validation
/// state. Throws TrainingError without candidates or on a non-finite loss.
TrainResult train(ForensicModel model, const PatchStore& store,
                  std::span<const Triplet> candidates, std::span<const Triplet> validation,
                  const TrainConfig& config);

/// Continues optimisation on the support triplets only (no mining, no
/// validation) and returns the new state; \p model is left untouched.
ForensicModel finetune(const ForensicModel& model, const PatchStore& store,
                       std::span<const Triplet> support, const TrainConfig& config);

/// S(reference, positive) and S(reference, negative) for each triplet.
std::vector<TripletScores> score_triplets(const ForensicModel& model, const PatchStore& store,
                                          std::span<const Triplet> triplets);

/// Per-triplet mean loss terms of \p triplets under the current weights.
LossBreakdown evaluate_loss(const ForensicModel& model, const PatchStore& store,
                            std::span<const Triplet> triplets, const LossConfig& config);

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);

}  // namespace recap
