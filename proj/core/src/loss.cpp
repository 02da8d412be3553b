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
#include "recap/loss.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "recap/error.hpp"

namespace recap {

std::string_view to_string(Reduction r) noexcept { return r == Reduction::mean ? "mean" : "sum"; }

Reduction parse_reduction(std::string_view s) {
  if (s == "sum") return Reduction::sum;
  if (s == "mean") return Reduction::mean;
  throw ConfigError("unknown reduction '" + std::string(s) + "'");
}

void validate(const LossConfig& config) {
  if (!(config.gamma > 0.0) || !std::isfinite(config.gamma)) {
    throw ConfigError("loss.gamma must be > 0, got " + std::to_string(config.gamma));
  }
  if (!(config.alpha >= 0.0) || !std::isfinite(config.alpha)) {
    throw ConfigError("loss.alpha must be >= 0, got " + std::to_string(config.alpha));
  }
}

double hinge_argument(double s_positive, double s_negative, double gamma) noexcept {
  return std::exp(-s_positive) - std::exp(-s_negative) + gamma / std::numbers::e;
}

namespace {

void check_scores(std::span<const double> sp, std::span<const double> sn) {
  if (sp.size() != sn.size()) {
    throw DataError("score length mismatch: " + std::to_string(sp.size()) + " positives vs " +
                    std::to_string(sn.size()) + " negatives");
  }
  if (sp.empty()) throw DataError("loss needs at least one triplet");
  for (std::size_t i = 0; i < sp.size(); ++i) {
    if (!(sp[i] >= 0.0 && sp[i] <= 1.0) || !(sn[i] >= 0.0 && sn[i] <= 1.0)) {
      throw DataError("similarity score outside [0, 1] at triplet " + std::to_string(i));
    }
  }
}

double reduce(std::span<const double> values, Reduction r) {
  double acc = 0.0;
  for (double v : values) acc += v;
  return r == Reduction::mean ? acc / static_cast<double>(values.size()) : acc;
}

double ns_term(double sp, double sn) { return std::log1p(std::exp(sn - sp)); }

}  // namespace

LossValue triplet_similarity_loss(std::span<const double> s_positive,
                                  std::span<const double> s_negative, const LossConfig& config) {
  validate(config);
  check_scores(s_positive, s_negative);
  LossValue out;
  out.per_triplet.reserve(s_positive.size());
  for (std::size_t i = 0; i < s_positive.size(); ++i) {
    out.per_triplet.push_back(std::max(0.0, hinge_argument(s_positive[i], s_negative[i], config.gamma)));
  }
  out.value = reduce(out.per_triplet, config.reduction);
  return out;
}

LossValue normalized_softmax_loss(std::span<const double> s_positive,
                                  std::span<const double> s_negative, Reduction reduction) {
  check_scores(s_positive, s_negative);
  LossValue out;
  out.per_triplet.reserve(s_positive.size());
  for (std::size_t i = 0; i < s_positive.size(); ++i) {
    out.per_triplet.push_back(ns_term(s_positive[i], s_negative[i]));
  }
  out.value = reduce(out.per_triplet, reduction);
  return out;
}

LossBreakdown forensic_loss(std::span<const double> s_positive,
                            std::span<const double> s_negative, const LossConfig& config) {
  const auto ts = triplet_similarity_loss(s_positive, s_negative, config);
  const auto ns = normalized_softmax_loss(s_positive, s_negative, config.reduction);
  LossBreakdown out;
  out.l_ts = ts.value;
  out.l_ns = ns.value;
  out.l_fl = ts.value + config.alpha * ns.value;
  out.per_triplet.reserve(ts.per_triplet.size());
  for (std::size_t i = 0; i < ts.per_triplet.size(); ++i) {
    out.per_triplet.push_back({ts.per_triplet[i], ns.per_triplet[i]});
  }
  return out;
}

ScoreGradients forensic_loss_gradient(std::span<const double> s_positive,
                                      std::span<const double> s_negative,
                                      const LossConfig& config) {
  validate(config);
  check_scores(s_positive, s_negative);
  const std::size_t n = s_positive.size();
  const double scale = config.reduction == Reduction::mean ? 1.0 / static_cast<double>(n) : 1.0;
  ScoreGradients g;
  g.d_positive.resize(n);
  g.d_negative.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sp = s_positive[i];
    const double sn = s_negative[i];
    double dp = 0.0;
    double dn = 0.0;
    if (hinge_argument(sp, sn, config.gamma) > 0.0) {
      dp -= std::exp(-sp);
      dn += std::exp(-sn);
    }
    // d/dx log(1 + e^x) at x = sn - sp
    const double sig = 1.0 / (1.0 + std::exp(sp - sn));
    dp -= config.alpha * sig;
    dn += config.alpha * sig;
    g.d_positive[i] = dp * scale;
    g.d_negative[i] = dn * scale;
  }
  return g;
}

}  // namespace recap
