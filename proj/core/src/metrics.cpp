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
#include "recap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "recap/error.hpp"

namespace recap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Counts {
  std::size_t bona_fide = 0;
  std::size_t attack = 0;
};

Counts count_classes(std::span<const ScoredSample> samples) {
  Counts c;
  for (const auto& s : samples) {
    if (!std::isfinite(s.score)) throw DataError("non-finite score in metric input");
    (s.label == SampleLabel::attack ? c.attack : c.bona_fide) += 1;
  }
  if (c.bona_fide == 0) throw DataError("metric needs at least one bona fide sample");
  if (c.attack == 0) throw DataError("metric needs at least one attack sample");
  return c;
}

// Sorted distinct scores, their midpoints, and the two infinities.
std::vector<double> candidate_thresholds(std::span<const ScoredSample> samples) {
  std::vector<double> scores;
  scores.reserve(samples.size());
  for (const auto& s : samples) scores.push_back(s.score);
  std::sort(scores.begin(), scores.end());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
  std::vector<double> out;
  out.reserve(scores.size() + 1);
  out.push_back(-kInf);
  for (std::size_t i = 0; i + 1 < scores.size(); ++i) out.push_back(0.5 * (scores[i] + scores[i + 1]));
  out.push_back(kInf);
  return out;
}

}  // namespace

ErrorRates apcer_bpcer(std::span<const ScoredSample> samples, double threshold) {
  const Counts c = count_classes(samples);
  std::size_t accepted_attacks = 0;
  std::size_t rejected_bona_fide = 0;
  for (const auto& s : samples) {
    if (s.label == SampleLabel::attack) {
      if (s.score >= threshold) ++accepted_attacks;
    } else if (s.score < threshold) {
      ++rejected_bona_fide;
    }
  }
  return {static_cast<double>(accepted_attacks) / static_cast<double>(c.attack),
          static_cast<double>(rejected_bona_fide) / static_cast<double>(c.bona_fide)};
}

std::vector<RocPoint> roc_points(std::span<const ScoredSample> samples) {
  const Counts c = count_classes(samples);
  std::vector<double> bona, attack;
  for (const auto& s : samples) (s.label == SampleLabel::attack ? attack : bona).push_back(s.score);
  std::sort(bona.begin(), bona.end());
  std::sort(attack.begin(), attack.end());
  std::vector<RocPoint> out;
  for (double t : candidate_thresholds(samples)) {
    const auto below_a = std::lower_bound(attack.begin(), attack.end(), t) - attack.begin();
    const auto below_b = std::lower_bound(bona.begin(), bona.end(), t) - bona.begin();
    out.push_back({t, static_cast<double>(c.attack - static_cast<std::size_t>(below_a)) / static_cast<double>(c.attack),
                   static_cast<double>(below_b) / static_cast<double>(c.bona_fide)});
  }
  return out;
}

EerResult eer(std::span<const ScoredSample> samples) {
  EerResult best;
  double best_gap = kInf;
  // Candidates arrive in increasing order, so strict improvement keeps the lower threshold.
  for (const auto& p : roc_points(samples)) {
    const double gap = std::abs(p.apcer - p.bpcer);
    if (gap < best_gap) {
      best_gap = gap;
      best = {0.5 * (p.apcer + p.bpcer), p.threshold};
    }
  }
  return best;
}

double auc(std::span<const ScoredSample> samples) {
  const Counts c = count_classes(samples);
  std::vector<double> bona, attack;
  for (const auto& s : samples) (s.label == SampleLabel::attack ? attack : bona).push_back(s.score);
  std::sort(attack.begin(), attack.end());
  double wins = 0.0;
  for (double b : bona) {
    const auto lo = std::lower_bound(attack.begin(), attack.end(), b);
    const auto hi = std::upper_bound(lo, attack.end(), b);
    wins += static_cast<double>(lo - attack.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(c.bona_fide) * static_cast<double>(c.attack));
}

double bpcer_target_threshold(std::span<const double> bona_fide, double target) {
  if (bona_fide.empty()) throw DataError("bpcer target needs at least one bona fide score");
  if (!(target >= 0.0 && target <= 1.0)) {
    throw ConfigError("bpcer target must lie in [0, 1], got " + std::to_string(target));
  }
  std::vector<double> sorted(bona_fide.begin(), bona_fide.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw DataError("non-finite bona fide score");
  }
  std::sort(sorted.begin(), sorted.end());
  // At most floor(t n) scores may fall strictly below the threshold.
  const auto allowed = static_cast<std::size_t>(std::floor(target * static_cast<double>(sorted.size()) + 1e-9));
  if (allowed >= sorted.size()) return kInf;
  return sorted[allowed];
}

OperatingPoint apcer_at_bpcer(std::span<const ScoredSample> samples, double target_bpcer) {
  count_classes(samples);
  std::vector<double> bona;
  for (const auto& s : samples) {
    if (s.label == SampleLabel::bona_fide) bona.push_back(s.score);
  }
  const double theta = bpcer_target_threshold(bona, target_bpcer);
  return {apcer_bpcer(samples, theta).apcer, theta};
}

}  // namespace recap
