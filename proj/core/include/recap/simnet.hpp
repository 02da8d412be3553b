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

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "recap/tensor.hpp"

namespace recap {

struct SimNetConfig {
  int hidden_dim = 2048;
  std::string activation = "relu";
  std::uint64_t init_seed = 0;

  bool operator==(const SimNetConfig&) const = default;
};

void validate(const SimNetConfig& config);

/// [a || b || a*b]; length 3d. Throws DataError on length mismatch.
std::vector<double> pair_features(std::span<const double> a, std::span<const double> b);

/// Two-layer similarity subnet over fused embedding pairs, sigmoid output.
/// Not symmetric: the first argument is always the reference.
class SimNet {
 public:
  SimNet(const SimNetConfig& config, int embed_dim);

  const SimNetConfig& config() const noexcept { return config_; }
  int embed_dim() const noexcept { return embed_dim_; }

  double similarity(std::span<const double> reference, std::span<const double> other) const;

  /// Similarity plus its gradient with respect to both inputs.
  double similarity_gradient(std::span<const double> reference, std::span<const double> other,
                             std::span<double> d_reference, std::span<double> d_other) const;

  struct BatchTrace {
    Eigen::MatrixXd fused;   // 3d x n
    Eigen::MatrixXd hidden;  // hidden x n, post-activation
    Eigen::VectorXd scores;
  };

  /// Column j of \p references / \p others forms pair j.
  Eigen::VectorXd forward(const Eigen::MatrixXd& references, const Eigen::MatrixXd& others,
                          BatchTrace* trace = nullptr) const;

  /// Accumulates parameter gradients; writes input gradients (d x n).
  void backward(const BatchTrace& trace, const Eigen::VectorXd& d_scores,
                GradientSet<double>& grads, Eigen::MatrixXd& d_references,
                Eigen::MatrixXd& d_others) const;

  std::vector<Parameter<double>>& parameters() noexcept { return params_; }
  const std::vector<Parameter<double>>& parameters() const noexcept { return params_; }

 private:
  SimNetConfig config_;
  int embed_dim_;
  std::vector<Parameter<double>> params_;  // w1 (hidden x 3d), b1, w2, b2
};

}  // namespace recap
