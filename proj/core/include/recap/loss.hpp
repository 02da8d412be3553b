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
#include <string_view>
#include <vector>

namespace recap {

enum class Reduction { sum, mean };

std::string_view to_string(Reduction r) noexcept;
Reduction parse_reduction(std::string_view s);

struct LossConfig {
  double gamma = 0.2;
  double alpha = 0.3;
  Reduction reduction = Reduction::sum;

  bool operator==(const LossConfig&) const = default;
};

void validate(const LossConfig& config);

/// e^{-s_p} - e^{-s_n} + gamma/e, the operand of the triplet hinge.
double hinge_argument(double s_positive, double s_negative, double gamma) noexcept;

struct LossValue {
  double value = 0.0;
  std::vector<double> per_triplet;
};

/// Sum (or mean) of max(0, e^{-s_p} - e^{-s_n} + gamma/e).
LossValue triplet_similarity_loss(std::span<const double> s_positive,
                                  std::span<const double> s_negative, const LossConfig& config);

/// Sum (or mean) of log(1 + e^{s_n - s_p}).
LossValue normalized_softmax_loss(std::span<const double> s_positive,
                                  std::span<const double> s_negative,
                                  Reduction reduction = Reduction::sum);

struct TripletLossTerms {
  double ts = 0.0;
  double ns = 0.0;
};

struct LossBreakdown {
  double l_ts = 0.0;
  double l_ns = 0.0;
  double l_fl = 0.0;
  std::vector<TripletLossTerms> per_triplet;
};

LossBreakdown forensic_loss(std::span<const double> s_positive,
                            std::span<const double> s_negative, const LossConfig& config);

struct ScoreGradients {
  std::vector<double> d_positive;
  std::vector<double> d_negative;
};

/// Analytic dL_fl/ds. Inactive hinges (operand <= 0) contribute nothing.
ScoreGradients forensic_loss_gradient(std::span<const double> s_positive,
                                      std::span<const double> s_negative,
                                      const LossConfig& config);

}  // namespace recap
