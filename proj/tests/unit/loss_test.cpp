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
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "recap/error.hpp"
#include "recap/loss.hpp"
#include "test_support.hpp"

namespace recap {
namespace {

// Straight transcription of the loss terms, evaluated with plain exp/log.
double oracle_ts(double sp, double sn, double gamma) {
  const double v = std::exp(-sp) - std::exp(-sn) + gamma / std::exp(1.0);
  return v > 0.0 ? v : 0.0;
}
double oracle_ns(double sp, double sn) { return std::log(1.0 + std::exp(sn) / std::exp(sp)); }

LossValue ts1(double sp, double sn, double gamma = 0.2) {
  LossConfig c;
  c.gamma = gamma;
  std::vector<double> p{sp}, n{sn};
  return triplet_similarity_loss(p, n, c);
}

TEST(TripletSimilarityLoss, EqualScoresGiveMargin) {
  for (double s : {0.0, 0.3, 0.77, 1.0}) {
    EXPECT_NEAR(ts1(s, s).value, 0.2 / std::exp(1.0), 1e-12);
  }
  EXPECT_NEAR(ts1(0.5, 0.5).value, 0.0735759, 1e-7);
}

TEST(TripletSimilarityLoss, SeparatedPairIsZero) {
  EXPECT_EQ(ts1(0.9, 0.1).value, 0.0);
}

TEST(TripletSimilarityLoss, InvertedPairMatchesOracle) {
  EXPECT_NEAR(ts1(0.2, 0.8).value, oracle_ts(0.2, 0.8, 0.2), 1e-12);
  EXPECT_NEAR(ts1(0.2, 0.8).value, 0.4429777, 1e-6);
}

TEST(TripletSimilarityLoss, SumAndMeanReductions) {
  LossConfig c;
  std::vector<double> p{0.2, 0.5, 0.9}, n{0.8, 0.5, 0.1};
  const double sum = oracle_ts(0.2, 0.8, 0.2) + oracle_ts(0.5, 0.5, 0.2);
  EXPECT_NEAR(triplet_similarity_loss(p, n, c).value, sum, 1e-12);
  c.reduction = Reduction::mean;
  auto mean = triplet_similarity_loss(p, n, c);
  EXPECT_NEAR(mean.value, sum / 3.0, 1e-12);
  ASSERT_EQ(mean.per_triplet.size(), 3u);
  EXPECT_EQ(mean.per_triplet[2], 0.0);
}

TEST(TripletSimilarityLoss, RejectsBadInput) {
  LossConfig c;
  std::vector<double> p{0.5, 0.5}, n{0.5};
  EXPECT_THROW(triplet_similarity_loss(p, n, c), DataError);
  std::vector<double> bad{1.2}, ok{0.1};
  EXPECT_THROW(triplet_similarity_loss(bad, ok, c), DataError);
  std::vector<double> neg{-0.01};
  EXPECT_THROW(triplet_similarity_loss(ok, neg, c), DataError);
  std::vector<double> empty;
  EXPECT_THROW(triplet_similarity_loss(empty, empty, c), DataError);
}

TEST(NormalizedSoftmaxLoss, LowerBoundAtPerfectPair) {
  std::vector<double> p{1.0}, n{0.0};
  EXPECT_NEAR(normalized_softmax_loss(p, n).value, 0.3132617, 1e-7);
  EXPECT_NEAR(normalized_softmax_loss(p, n).value, std::log(1.0 + std::exp(-1.0)), 1e-15);
}

TEST(NormalizedSoftmaxLoss, EqualScoresGiveLog2) {
  std::vector<double> p{0.4}, n{0.4};
  EXPECT_NEAR(normalized_softmax_loss(p, n).value, std::log(2.0), 1e-15);
}

TEST(NormalizedSoftmaxLoss, InvertedPairMatchesOracle) {
  std::vector<double> p{0.2}, n{0.8};
  const double v = normalized_softmax_loss(p, n).value;
  EXPECT_NEAR(v, oracle_ns(0.2, 0.8), 1e-12);
  // log(1 + e^0.6) evaluates to 1.0374880, not the 1.0376792 sometimes quoted.
  EXPECT_NEAR(v, 1.0374880, 1e-6);
}

TEST(ForensicLoss, CombinesTerms) {
  LossConfig c;
  std::vector<double> p{0.9}, n{0.1};
  auto b = forensic_loss(p, n, c);
  EXPECT_EQ(b.l_ts, 0.0);
  EXPECT_NEAR(b.l_ns, 0.3711007, 1e-7);
  EXPECT_NEAR(b.l_fl, 0.1113302, 1e-6);

  std::vector<double> p2{0.2}, n2{0.8};
  auto b2 = forensic_loss(p2, n2, c);
  EXPECT_NEAR(b2.l_fl, oracle_ts(0.2, 0.8, 0.2) + 0.3 * oracle_ns(0.2, 0.8), 1e-12);
  EXPECT_NEAR(b2.l_fl, 0.7542241, 1e-6);
}

TEST(ForensicLoss, ZeroAlphaIsTripletLossOnly) {
  LossConfig c;
  c.alpha = 0.0;
  testing::Gen g(3);
  auto p = g.vector(20, 0, 1), n = g.vector(20, 0, 1);
  auto b = forensic_loss(p, n, c);
  EXPECT_EQ(b.l_fl, b.l_ts);
}

TEST(ForensicLoss, BreakdownInvariants) {
  testing::Gen g(11);
  for (auto red : {Reduction::sum, Reduction::mean}) {
    LossConfig c;
    c.reduction = red;
    auto p = g.vector(37, 0, 1), n = g.vector(37, 0, 1);
    auto b = forensic_loss(p, n, c);
    EXPECT_NEAR(b.l_fl, b.l_ts + c.alpha * b.l_ns, 1e-9);
    double ts = 0, ns = 0;
    for (const auto& t : b.per_triplet) {
      EXPECT_GE(t.ts, 0.0);
      EXPECT_GE(t.ns, std::log1p(std::exp(-1.0)) - 1e-15);
      ts += t.ts;
      ns += t.ns;
    }
    const double k = red == Reduction::mean ? 37.0 : 1.0;
    EXPECT_NEAR(b.l_ts, ts / k, 1e-12);
    EXPECT_NEAR(b.l_ns, ns / k, 1e-12);
  }
}

TEST(ForensicLoss, BoundsAndMonotonicity) {
  const double gamma = 0.2;
  const double ts_max = 1.0 - std::exp(-1.0) + gamma / std::exp(1.0);
  const double ns_min = std::log1p(std::exp(-1.0)), ns_max = std::log1p(std::exp(1.0));
  LossConfig c;
  testing::Gen g(101);
  for (int i = 0; i < 2000; ++i) {
    const double sp = g.uniform(), sn = g.uniform(), d = g.uniform(0, 0.2);
    std::vector<double> p{sp}, n{sn};
    auto b = forensic_loss(p, n, c);
    ASSERT_GE(b.per_triplet[0].ts, 0.0);
    ASSERT_LE(b.per_triplet[0].ts, ts_max + 1e-12);
    ASSERT_GE(b.per_triplet[0].ns, ns_min - 1e-12);
    ASSERT_LE(b.per_triplet[0].ns, ns_max + 1e-12);

    std::vector<double> p_up{std::min(1.0, sp + d)}, n_up{std::min(1.0, sn + d)};
    auto up_p = forensic_loss(p_up, n, c), up_n = forensic_loss(p, n_up, c);
    ASSERT_LE(up_p.per_triplet[0].ts, b.per_triplet[0].ts + 1e-15);
    ASSERT_LE(up_p.per_triplet[0].ns, b.per_triplet[0].ns + 1e-15);
    ASSERT_GE(up_n.per_triplet[0].ts, b.per_triplet[0].ts - 1e-15);
    ASSERT_GE(up_n.per_triplet[0].ns, b.per_triplet[0].ns - 1e-15);
  }
  // extremes are attained
  std::vector<double> zero{0.0}, one{1.0};
  EXPECT_NEAR(forensic_loss(zero, one, c).per_triplet[0].ts, ts_max, 1e-12);
  EXPECT_NEAR(forensic_loss(zero, one, c).per_triplet[0].ns, ns_max, 1e-12);
}

TEST(ForensicLossGradient, MatchesFiniteDifferences) {
  testing::Gen g(7);
  int checked = 0;
  for (auto red : {Reduction::sum, Reduction::mean}) {
    LossConfig c;
    c.reduction = red;
    for (int trial = 0; trial < 60; ++trial) {
      auto p = g.vector(5, 0.02, 0.98), n = g.vector(5, 0.02, 0.98);
      auto grad = forensic_loss_gradient(p, n, c);
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (std::abs(hinge_argument(p[i], n[i], c.gamma)) < 1e-3) continue;
        const double h = 1e-5;
        auto fd = [&](std::vector<double>& v) {
          const double keep = v[i];
          v[i] = keep + h;
          const double up = forensic_loss(p, n, c).l_fl;
          v[i] = keep - h;
          const double down = forensic_loss(p, n, c).l_fl;
          v[i] = keep;
          return (up - down) / (2 * h);
        };
        EXPECT_NEAR(grad.d_positive[i], fd(p), 1e-5);
        EXPECT_NEAR(grad.d_negative[i], fd(n), 1e-5);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 400);
}

TEST(ForensicLossGradient, DirectionPushesScoresApart) {
  LossConfig c;
  std::vector<double> p{0.4}, n{0.6};
  auto grad = forensic_loss_gradient(p, n, c);
  EXPECT_LT(grad.d_positive[0], 0.0);  // descent raises S(r,p)
  EXPECT_GT(grad.d_negative[0], 0.0);  // and lowers S(r,n)
}

TEST(ForensicLossGradient, KinkUsesZeroSubgradient) {
  LossConfig c;
  c.alpha = 0.0;
  // choose s_n so the hinge argument is exactly zero
  const double sp = 0.5;
  double sn = -std::log(std::exp(-sp) + c.gamma / std::exp(1.0));
  while (hinge_argument(sp, sn, c.gamma) > 0.0) sn = std::nextafter(sn, 0.0);
  ASSERT_NEAR(hinge_argument(sp, sn, c.gamma), 0.0, 1e-15);
  std::vector<double> p{sp}, n{sn};
  auto grad = forensic_loss_gradient(p, n, c);
  EXPECT_EQ(grad.d_positive[0], 0.0);
  EXPECT_EQ(grad.d_negative[0], 0.0);
}

TEST(LossConfig, Validation) {
  LossConfig c;
  EXPECT_NO_THROW(validate(c));
  c.gamma = 0.0;
  EXPECT_THROW(validate(c), ConfigError);
  c.gamma = 0.2;
  c.alpha = -0.1;
  EXPECT_THROW(validate(c), ConfigError);
  EXPECT_EQ(parse_reduction("mean"), Reduction::mean);
  EXPECT_THROW(parse_reduction("avg"), ConfigError);
}

}  // namespace
}  // namespace recap
