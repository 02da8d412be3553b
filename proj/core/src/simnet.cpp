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
#include "recap/simnet.hpp"

#include <cmath>
#include <random>
#include <string>

#include "recap/error.hpp"

namespace recap {

namespace {

using MatD = Eigen::MatrixXd;
using VecD = Eigen::VectorXd;

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

void check_lengths(std::size_t a, std::size_t b, int expected) {
  if (a != b) {
    throw DataError("embedding length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
  if (expected >= 0 && static_cast<int>(a) != expected) {
    throw DataError("embedding length " + std::to_string(a) + " does not match the similarity "
                    "network input " + std::to_string(expected));
  }
}

}  // namespace

void validate(const SimNetConfig& config) {
  if (config.hidden_dim < 1) throw ConfigError("simnet.hidden_dim must be >= 1");
  if (config.activation != "relu") {
    throw ConfigError("simnet.activation: only 'relu' is supported, got '" + config.activation + "'");
  }
}

std::vector<double> pair_features(std::span<const double> a, std::span<const double> b) {
  check_lengths(a.size(), b.size(), -1);
  const std::size_t d = a.size();
  std::vector<double> f(3 * d);
  for (std::size_t i = 0; i < d; ++i) {
    f[i] = a[i];
    f[d + i] = b[i];
    f[2 * d + i] = a[i] * b[i];
  }
  return f;
}

SimNet::SimNet(const SimNetConfig& config, int embed_dim) : config_(config), embed_dim_(embed_dim) {
  validate(config_);
  if (embed_dim < 1) throw ConfigError("simnet input dimension must be >= 1");
  std::mt19937_64 rng(config_.init_seed);
  const int in = 3 * embed_dim;
  const int hidden = config_.hidden_dim;
  Parameter<double> w1{"simnet.w1", Buffer<double>(static_cast<std::size_t>(hidden) * in), true};
  std::normal_distribution<double> d1(0.0, std::sqrt(1.0 / in));
  for (double& x : w1.value) x = d1(rng);
  Parameter<double> w2{"simnet.w2", Buffer<double>(hidden), true};
  std::normal_distribution<double> d2(0.0, std::sqrt(1.0 / hidden));
  for (double& x : w2.value) x = d2(rng);
  params_.push_back(std::move(w1));
  params_.push_back({"simnet.b1", Buffer<double>(hidden, 0.0), true});
  params_.push_back(std::move(w2));
  params_.push_back({"simnet.b2", Buffer<double>(1, 0.0), true});
}

double SimNet::similarity(std::span<const double> reference, std::span<const double> other) const {
  check_lengths(reference.size(), other.size(), embed_dim_);
  MatD a = Eigen::Map<const VecD>(reference.data(), embed_dim_);
  MatD b = Eigen::Map<const VecD>(other.data(), embed_dim_);
  return forward(a, b)[0];
}

double SimNet::similarity_gradient(std::span<const double> reference, std::span<const double> other,
                                   std::span<double> d_reference, std::span<double> d_other) const {
  check_lengths(reference.size(), other.size(), embed_dim_);
  check_lengths(d_reference.size(), d_other.size(), embed_dim_);
  MatD a = Eigen::Map<const VecD>(reference.data(), embed_dim_);
  MatD b = Eigen::Map<const VecD>(other.data(), embed_dim_);
  BatchTrace trace;
  const double s = forward(a, b, &trace)[0];
  GradientSet<double> scratch(params_);
  MatD da, db;
  backward(trace, VecD::Ones(1), scratch, da, db);
  for (int i = 0; i < embed_dim_; ++i) {
    d_reference[i] = da(i, 0);
    d_other[i] = db(i, 0);
  }
  return s;
}

VecD SimNet::forward(const MatD& references, const MatD& others, BatchTrace* trace) const {
  if (references.rows() != embed_dim_ || others.rows() != embed_dim_ ||
      references.cols() != others.cols()) {
    throw DataError("similarity batch shape mismatch");
  }
  const int d = embed_dim_;
  const Eigen::Index n = references.cols();
  MatD fused(3 * d, n);
  fused.topRows(d) = references;
  fused.middleRows(d, d) = others;
  fused.bottomRows(d) = references.cwiseProduct(others);
  Eigen::Map<const VecD> b1(params_[1].value.data(), config_.hidden_dim);
  Eigen::Map<const VecD> w2(params_[2].value.data(), config_.hidden_dim);
  // w1 is stored row-major; view it transposed through a column-major map.
  Eigen::Map<const MatD> w1t(params_[0].value.data(), 3 * d, config_.hidden_dim);
  MatD hidden = (w1t.transpose() * fused).colwise() + b1;
  hidden = hidden.cwiseMax(0.0);
  VecD z = (w2.transpose() * hidden).transpose();
  VecD s(n);
  for (Eigen::Index j = 0; j < n; ++j) s[j] = sigmoid(z[j] + params_[3].value[0]);
  if (trace) {
    trace->fused = std::move(fused);
    trace->hidden = std::move(hidden);
    trace->scores = s;
  }
  return s;
}

void SimNet::backward(const BatchTrace& trace, const VecD& d_scores, GradientSet<double>& grads,
                      MatD& d_references, MatD& d_others) const {
  const int d = embed_dim_;
  const int hidden_dim = config_.hidden_dim;
  VecD dz = d_scores.cwiseProduct(trace.scores.cwiseProduct((1.0 - trace.scores.array()).matrix()));
  Eigen::Map<const VecD> w2(params_[2].value.data(), hidden_dim);
  Eigen::Map<const MatD> w1t(params_[0].value.data(), 3 * d, hidden_dim);

  Eigen::Map<VecD>(grads.slots[2].data(), hidden_dim).noalias() += trace.hidden * dz;
  grads.slots[3][0] += dz.sum();
  MatD dh = w2 * dz.transpose();
  dh = dh.cwiseProduct((trace.hidden.array() > 0.0).cast<double>().matrix());
  // dW1 (hidden x 3d, row-major) == dW1^T in column-major (3d x hidden).
  Eigen::Map<MatD>(grads.slots[0].data(), 3 * d, hidden_dim).noalias() += trace.fused * dh.transpose();
  Eigen::Map<VecD>(grads.slots[1].data(), hidden_dim) += dh.rowwise().sum();
  MatD dfused = w1t * dh;
  const auto refs = trace.fused.topRows(d);
  const auto others = trace.fused.middleRows(d, d);
  d_references = dfused.topRows(d) + dfused.bottomRows(d).cwiseProduct(others);
  d_others = dfused.middleRows(d, d) + dfused.bottomRows(d).cwiseProduct(refs);
}

}  // namespace recap
