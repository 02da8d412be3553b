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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recap/image.hpp"

namespace recap {

struct ForensicModel;
class SimNet;

/// One support triplet: the kept patches of a reference, a positive and a
/// negative image. A questioned patch is compared with the reference patch at
/// its own position, or with every reference patch when none sits there.
struct SupportTriplet {
  std::vector<Patch> reference;
  std::vector<Patch> positive;
  std::vector<Patch> negative;
};

struct SupportSet {
  std::vector<SupportTriplet> triplets;
};

/// Throws DataError when empty, mixed-template or mixed-resolution.
void validate(const SupportSet& support);

struct QuestionedScore {
  double score = 0.0;
  std::vector<double> per_reference;  // mean over questioned patches, per reference
};

/// Mean of S(reference_k, questioned_patch) over all patches and references.
QuestionedScore score_questioned(const ForensicModel& model, std::span<const Patch> questioned,
                                 const SupportSet& support);

/// Same rule on precomputed embeddings.
QuestionedScore score_embeddings(const SimNet& simnet,
                                 std::span<const std::vector<double>> questioned,
                                 std::span<const std::vector<double>> references);

enum class ThresholdPolicyKind { max_accuracy, bpcer_target };

struct ThresholdPolicy {
  ThresholdPolicyKind kind = ThresholdPolicyKind::max_accuracy;
  double target = 0.05;  // bpcer_target only
};

struct Calibration {
  double threshold = 0.0;
  bool degenerate = false;  // every score identical
};

/// max_accuracy: best of the midpoints between adjacent distinct scores and
/// +-infinity; among equally accurate candidates the one centred in the
/// widest gap wins, then the lower one. bpcer_target(t): largest threshold
/// with BPCER on genuine_scores <= t.
Calibration calibrate_threshold(std::span<const double> genuine_scores,
                                std::span<const double> attack_scores,
                                const ThresholdPolicy& policy);

enum class Verdict { genuine, recaptured };
enum class VerifyMode { seen_template, few_shot };

std::string_view to_string(Verdict v) noexcept;
std::string_view to_string(VerifyMode m) noexcept;
VerifyMode parse_verify_mode(std::string_view s);

struct Decision {
  double score = 0.0;
  double threshold = 0.0;  // calibrated value or few-shot midpoint
  Verdict verdict = Verdict::recaptured;
  VerifyMode mode = VerifyMode::seen_template;
  std::vector<double> per_reference;
  std::optional<double> positive_score;
  std::optional<double> negative_score;
};

/// Inclusive at the boundary: score == threshold is genuine.
Verdict threshold_verdict(double score, double threshold) noexcept;

/// genuine iff s_q >= (s_p + s_n) / 2.
Verdict few_shot_verdict(double questioned, double positive, double negative) noexcept;

Decision verify(const ForensicModel& model, std::span<const Patch> questioned,
                const SupportSet& support, std::optional<double> threshold, VerifyMode mode);

/// JSON verification report.
std::string verification_report(std::string_view questioned_id, const Decision& decision);

}  // namespace recap
