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

#include <span>
#include <vector>

namespace recap {

enum class SampleLabel { bona_fide, attack };

/// Higher score means more genuine.
struct ScoredSample {
  double score = 0.0;
  SampleLabel label = SampleLabel::bona_fide;
};

struct ErrorRates {
  double apcer = 0.0;  // attacks with score >= threshold
  double bpcer = 0.0;  // bona fide with score < threshold
};

// All metrics throw DataError when a class is absent.
ErrorRates apcer_bpcer(std::span<const ScoredSample> samples, double threshold);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

/// Sweeps midpoints between adjacent distinct scores (and +-infinity), keeps
/// the point minimising |APCER - BPCER| (lowest threshold on ties) and reports
/// the mean of the two rates there.
EerResult eer(std::span<const ScoredSample> samples);

/// Mann-Whitney statistic; ties count one half.
double auc(std::span<const ScoredSample> samples);

/// Largest threshold whose BPCER over \p bona_fide stays <= target. Returns
/// +infinity when every score may be rejected.
double bpcer_target_threshold(std::span<const double> bona_fide, double target);

struct OperatingPoint {
  double apcer = 0.0;
  double threshold = 0.0;
};

OperatingPoint apcer_at_bpcer(std::span<const ScoredSample> samples, double target_bpcer);

struct RocPoint {
  double threshold = 0.0;
  double apcer = 0.0;
  double bpcer = 0.0;
};

/// One point per candidate threshold, ascending.
std::vector<RocPoint> roc_points(std::span<const ScoredSample> samples);

}  // namespace recap
