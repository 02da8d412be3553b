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
#include "recap/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "recap/error.hpp"
#include "recap/metrics.hpp"
#include "recap/model.hpp"

namespace recap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct EmbeddedPatch {
  int row = 0;
  int col = 0;
  std::vector<double> values;
};

using EmbeddedGroup = std::vector<EmbeddedPatch>;

EmbeddedGroup embed_group(const Embedder& embedder, std::span<const Patch> patches) {
  std::vector<const Image*> images;
  images.reserve(patches.size());
  for (const auto& p : patches) images.push_back(&p.pixels);
  auto values = embedder.embed_images(images);
  EmbeddedGroup out(patches.size());
  for (std::size_t i = 0; i < patches.size(); ++i) out[i] = {patches[i].row, patches[i].col, std::move(values[i])};
  return out;
}

double group_similarity(const SimNet& simnet, const EmbeddedGroup& reference, const EmbeddedPatch& other) {
  for (const auto& r : reference) {
    if (r.row == other.row && r.col == other.col) return simnet.similarity(r.values, other.values);
  }
  double acc = 0.0;
  for (const auto& r : reference) acc += simnet.similarity(r.values, other.values);
  return acc / static_cast<double>(reference.size());
}

double mean_group_similarity(const SimNet& simnet, const EmbeddedGroup& reference, const EmbeddedGroup& others) {
  double acc = 0.0;
  for (const auto& o : others) acc += group_similarity(simnet, reference, o);
  return acc / static_cast<double>(others.size());
}

void check_group(const std::vector<Patch>& group, const std::string& what, std::size_t k) {
  if (group.empty()) throw DataError("support triplet " + std::to_string(k) + " has no " + what + " patches");
  for (const auto& p : group) {
    if (p.source_id != group.front().source_id) {
      throw DataError("support triplet " + std::to_string(k) + " mixes " + what + " images '" +
                      group.front().source_id + "' and '" + p.source_id + "'");
    }
  }
}

}  // namespace

void validate(const SupportSet& support) {
  if (support.triplets.empty()) throw DataError("support set is empty");
  for (std::size_t k = 0; k < support.triplets.size(); ++k) {
    check_group(support.triplets[k].reference, "reference", k);
  }
  const auto& first = support.triplets.front().reference.front().provenance;
  for (const auto& t : support.triplets) {
    for (const auto& p : t.reference) {
      if (p.provenance.template_id != first.template_id) {
        throw DataError("support set mixes templates '" + first.template_id + "' and '" +
                        p.provenance.template_id + "'");
      }
      if (p.provenance.resolution_group != first.resolution_group) {
        throw DataError("support set mixes resolution groups");
      }
      if (p.provenance.label != Label::genuine) {
        throw DataError("support reference '" + p.source_id + "' is not genuine");
      }
    }
  }
}

QuestionedScore score_embeddings(const SimNet& simnet, std::span<const std::vector<double>> questioned,
                                 std::span<const std::vector<double>> references) {
  if (questioned.empty()) throw DataError("no questioned patches to score");
  if (references.empty()) throw DataError("no reference embeddings to score against");
  QuestionedScore out;
  out.per_reference.reserve(references.size());
  for (const auto& ref : references) {
    double acc = 0.0;
    for (const auto& q : questioned) acc += simnet.similarity(ref, q);
    out.per_reference.push_back(acc / static_cast<double>(questioned.size()));
  }
  double acc = 0.0;
  for (double v : out.per_reference) acc += v;
  out.score = acc / static_cast<double>(out.per_reference.size());
  return out;
}

namespace {

QuestionedScore score_groups(const SimNet& simnet, const EmbeddedGroup& questioned,
                             std::span<const EmbeddedGroup> references) {
  QuestionedScore out;
  for (const auto& ref : references) out.per_reference.push_back(mean_group_similarity(simnet, ref, questioned));
  double acc = 0.0;
  for (double v : out.per_reference) acc += v;
  out.score = acc / static_cast<double>(out.per_reference.size());
  return out;
}

void check_questioned(std::span<const Patch> questioned, const SupportSet& support) {
  if (questioned.empty()) throw DataError("no questioned patches to score");
  const auto& ref = support.triplets.front().reference.front().provenance;
  for (const auto& q : questioned) {
    if (q.provenance.template_id != ref.template_id) {
      throw DataError("questioned patch of '" + q.source_id + "' belongs to template '" +
                      q.provenance.template_id + "', support is '" + ref.template_id + "'");
    }
    if (q.provenance.resolution_group != ref.resolution_group) {
      throw DataError("questioned patch of '" + q.source_id +
                      "' has a different resolution group than the support set");
    }
  }
}

std::vector<EmbeddedGroup> embed_references(const Embedder& embedder, const SupportSet& support) {
  std::vector<EmbeddedGroup> out;
  for (const auto& t : support.triplets) out.push_back(embed_group(embedder, t.reference));
  return out;
}

}  // namespace

QuestionedScore score_questioned(const ForensicModel& model, std::span<const Patch> questioned,
                                 const SupportSet& support) {
  validate(support);
  check_questioned(questioned, support);
  const auto q = embed_group(model.embedder, questioned);
  const auto refs = embed_references(model.embedder, support);
  return score_groups(model.simnet, q, refs);
}

Calibration calibrate_threshold(std::span<const double> genuine_scores,
                                std::span<const double> attack_scores, const ThresholdPolicy& policy) {
  if (genuine_scores.empty()) throw DataError("threshold calibration needs genuine scores");
  std::vector<double> all(genuine_scores.begin(), genuine_scores.end());
  all.insert(all.end(), attack_scores.begin(), attack_scores.end());
  for (double v : all) {
    if (!std::isfinite(v)) throw DataError("non-finite score in threshold calibration");
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  if (policy.kind == ThresholdPolicyKind::bpcer_target) {
    return {bpcer_target_threshold(genuine_scores, policy.target), all.size() == 1};
  }
  if (attack_scores.empty()) throw DataError("max_accuracy calibration needs attack scores");
  if (all.size() == 1) return {all.front(), true};

  // Candidate i sits between all[i-1] and all[i]; the ends are the infinities.
  std::size_t best_correct = 0;
  double best_width = -1.0;
  double best = 0.0;
  for (std::size_t i = 0; i <= all.size(); ++i) {
    const double theta = i == 0 ? -kInf : i == all.size() ? kInf : 0.5 * (all[i - 1] + all[i]);
    const double width = (i == 0 || i == all.size()) ? 0.0 : all[i] - all[i - 1];
    std::size_t correct = 0;
    for (double g : genuine_scores) correct += g >= theta ? 1 : 0;
    for (double a : attack_scores) correct += a < theta ? 1 : 0;
    if (correct > best_correct || (correct == best_correct && width > best_width)) {
      best_correct = correct;
      best_width = width;
      best = theta;
    }
  }
  return {best, false};
}

std::string_view to_string(Verdict v) noexcept { return v == Verdict::genuine ? "genuine" : "recaptured"; }

std::string_view to_string(VerifyMode m) noexcept {
  return m == VerifyMode::few_shot ? "few_shot" : "seen_template";
}

VerifyMode parse_verify_mode(std::string_view s) {
  if (s == "seen_template") return VerifyMode::seen_template;
  if (s == "few_shot") return VerifyMode::few_shot;
  throw ConfigError("unknown verification mode '" + std::string(s) + "'");
}

Verdict threshold_verdict(double score, double threshold) noexcept {
  return score >= threshold ? Verdict::genuine : Verdict::recaptured;
}

Verdict few_shot_verdict(double questioned, double positive, double negative) noexcept {
  return threshold_verdict(questioned, 0.5 * (positive + negative));
}

Decision verify(const ForensicModel& model, std::span<const Patch> questioned, const SupportSet& support,
                std::optional<double> threshold, VerifyMode mode) {
  validate(support);
  Decision d;
  d.mode = mode;
  if (mode == VerifyMode::seen_template) {
    if (!threshold) {
      auto it = model.extras.find("threshold");
      if (it == model.extras.end()) {
        throw ConfigError("seen_template verification needs a threshold (none given, none in checkpoint)");
      }
      threshold = it->second;
    }
    const auto s = score_questioned(model, questioned, support);
    d.score = s.score;
    d.per_reference = s.per_reference;
    d.threshold = *threshold;
    d.verdict = threshold_verdict(d.score, d.threshold);
    return d;
  }

  for (std::size_t k = 0; k < support.triplets.size(); ++k) {
    check_group(support.triplets[k].positive, "positive", k);
    check_group(support.triplets[k].negative, "negative", k);
  }
  check_questioned(questioned, support);
  const auto q = embed_group(model.embedder, questioned);
  const auto refs = embed_references(model.embedder, support);
  const auto s = score_groups(model.simnet, q, refs);
  double sp = 0.0;
  double sn = 0.0;
  for (std::size_t k = 0; k < refs.size(); ++k) {
    sp += mean_group_similarity(model.simnet, refs[k], embed_group(model.embedder, support.triplets[k].positive));
    sn += mean_group_similarity(model.simnet, refs[k], embed_group(model.embedder, support.triplets[k].negative));
  }
  d.score = s.score;
  d.per_reference = s.per_reference;
  d.positive_score = sp / static_cast<double>(refs.size());
  d.negative_score = sn / static_cast<double>(refs.size());
  d.threshold = 0.5 * (*d.positive_score + *d.negative_score);
  d.verdict = threshold_verdict(d.score, d.threshold);
  return d;
}

std::string verification_report(std::string_view questioned_id, const Decision& decision) {
  nlohmann::json j;
  j["questioned_id"] = questioned_id;
  j["mode"] = to_string(decision.mode);
  j["score"] = decision.score;
  j[decision.mode == VerifyMode::few_shot ? "midpoint" : "threshold"] = decision.threshold;
  j["verdict"] = to_string(decision.verdict);
  j["per_reference_scores"] = decision.per_reference;
  if (decision.positive_score) j["positive_score"] = *decision.positive_score;
  if (decision.negative_score) j["negative_score"] = *decision.negative_score;
  return j.dump();
}

}  // namespace recap
