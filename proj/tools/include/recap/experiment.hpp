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
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "recap/channelsim.hpp"
#include "recap/corpus.hpp"
#include "recap/metrics.hpp"
#include "recap/model.hpp"
#include "recap/trainer.hpp"
#include "recap/verifier.hpp"

namespace recap {

enum class Protocol { intra, cross, fine_tune_transfer };

std::string_view to_string(Protocol p) noexcept;
Protocol parse_protocol(std::string_view s);

struct PatchConfig {
  int train_stride = 112;
  int eval_stride = 224;
  PatchFilterConfig filter;
};

struct VerificationConfig {
  ThresholdPolicy policy;
  int support_size = 3;  // references per template
  std::vector<double> bpcer_targets{0.01, 0.05, 0.10};
};

struct CrossConfig {
  bool label_shuffle_control = true;
};

struct TransferConfig {
  SynthSpec target;
  TrainConfig finetune;
  int high_triplets = 2;
  int low_triplets = 4;
  double bpcer_target = 0.05;
};

TransferConfig default_transfer_config();

struct ExperimentConfig {
  Protocol protocol = Protocol::intra;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  SynthSpec synth;
  SplitSpec split;
  PatchConfig patches;
  ModelConfig model;
  TrainConfig train;
  VerificationConfig verification;
  CrossConfig cross;
  TransferConfig transfer = default_transfer_config();
};

/// Strict parse: unknown keys and ill-typed values raise ConfigError.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);

/// Reads a config file, or the config echoed inside a run summary.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& config);

/// Overwrites every sub-seed with one derived from the master seed.
void derive_seeds(ExperimentConfig& config);

void validate(const ExperimentConfig& config);

struct MetricRow {
  std::string protocol;
  std::string train_set;
  std::string test_set;
  std::string metric;
  std::string operating_point;
  double value = 0.0;
};

void write_metrics_csv(const std::vector<MetricRow>& rows, const std::filesystem::path& path);

void write_roc_csv(const std::vector<RocPoint>& roc, const std::filesystem::path& path);

std::optional<double> find_metric(const std::vector<MetricRow>& rows, std::string_view metric,
                                  std::string_view operating_point);

struct ScoredImage {
  std::string id;
  Provenance provenance;
  double score = 0.0;
};

struct ExperimentResult {
  std::vector<MetricRow> metrics;
  TrainHistory history;
  std::vector<RocPoint> roc;
  std::vector<ScoredImage> test_scores;
  nlohmann::json summary;
};

/// Runs the configured protocol. Writes artifacts when output_dir is set.
ExperimentResult run_experiment(ExperimentConfig config);

// Stage helpers shared with the CLI subcommands.

std::vector<DocumentImage> load_images(const Manifest& manifest);

Manifest manifest_of(std::span<const DocumentImage> images);

std::vector<DocumentImage> select(std::span<const DocumentImage> images, const Manifest& subset);

/// Support set for one template and resolution group, drawn from \p pool.
SupportSet build_support(std::span<const DocumentImage> pool, const std::string& template_id,
                         ResolutionGroup group, int size, int stride, const PatchFilterConfig& filter);

struct EvaluationScores {
  std::vector<ScoredImage> scored;
  std::vector<std::string> skipped;  // no discriminative patch or no support
};

EvaluationScores score_images(const ForensicModel& model, std::span<const DocumentImage> questioned,
                              std::span<const DocumentImage> support_pool, const ExperimentConfig& config);

std::vector<ScoredSample> to_samples(std::span<const ScoredImage> scored);

struct TrainedRun {
  ForensicModel model;
  TrainHistory history;
};

TrainedRun train_on(std::span<const DocumentImage> train_images, std::span<const DocumentImage> val_images,
                    const ExperimentConfig& config);

struct EmbeddingExport {
  std::size_t rows = 0;
  std::vector<std::string> skipped;
};

EmbeddingExport export_embeddings(const ForensicModel& model, std::span<const DocumentImage> images,
                                  int stride, const PatchFilterConfig& filter,
                                  const std::filesystem::path& path);

}  // namespace recap
