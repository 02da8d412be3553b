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
#include "recap/simnet.hpp"
#include "test_support.hpp"

namespace recap {
namespace {

SimNet make_net(int d, std::uint64_t seed, int hidden = 64) {
  return SimNet({.hidden_dim = hidden, .activation = "relu", .init_seed = seed}, d);
}

// Forward pass written out from the definition, independent of Eigen.
double manual_similarity(const SimNet& net, const std::vector<double>& a, const std::vector<double>& b) {
  const auto& p = net.parameters();
  const auto& w1 = p[0].value;
  const auto& b1 = p[1].value;
  const auto& w2 = p[2].value;
  const auto& b2 = p[3].value;
  std::vector<double> x = a;
  x.insert(x.end(), b.begin(), b.end());
  for (std::size_t i = 0; i < a.size(); ++i) x.push_back(a[i] * b[i]);
  const std::size_t hidden = b1.size();
  double z = b2[0];
  for (std::size_t h = 0; h < hidden; ++h) {
    double acc = b1[h];
    for (std::size_t j = 0; j < x.size(); ++j) acc += w1[h * x.size() + j] * x[j];
    z += w2[h] * std::max(acc, 0.0);
  }
  return 1.0 / (1.0 + std::exp(-z));
}

std::vector<bool> relu_pattern(const SimNet& net, const std::vector<double>& a, const std::vector<double>& b) {
  const auto& p = net.parameters();
  const auto x = pair_features(a, b);
  std::vector<bool> on;
  for (std::size_t h = 0; h < p[1].value.size(); ++h) {
    double acc = p[1].value[h];
    for (std::size_t j = 0; j < x.size(); ++j) acc += p[0].value[h * x.size() + j] * x[j];
    on.push_back(acc > 0.0);
  }
  return on;
}

TEST(PairFeatures, Definition) {
  std::vector<double> a{1, 2}, b{3, 4};
  EXPECT_EQ(pair_features(a, b), (std::vector<double>{1, 2, 3, 4, 3, 8}));
  std::vector<double> z(5, 0.0);
  EXPECT_EQ(pair_features(z, z), std::vector<double>(15, 0.0));
  std::vector<double> e1{1, 0}, e2{0, 1};
  EXPECT_EQ(pair_features(e1, e2), (std::vector<double>{1, 0, 0, 1, 0, 0}));
  std::vector<double> short_v{1};
  EXPECT_THROW(pair_features(a, short_v), DataError);
}

TEST(SimNet, ParameterLayout) {
  auto net = make_net(6, 1, 10);
  const auto& p = net.parameters();
  ASSERT_EQ(p.size(), 4u);
  EXPECT_EQ(p[0].value.size(), 10u * 18u);
  EXPECT_EQ(p[1].value.size(), 10u);
  EXPECT_EQ(p[2].value.size(), 10u);
  EXPECT_EQ(p[3].value.size(), 1u);
}

TEST(SimNet, MatchesManualForward) {
  auto net = make_net(8, 4, 32);
  testing::Gen g(4);
  for (int i = 0; i < 20; ++i) {
    auto a = g.vector(8, -2, 2), b = g.vector(8, -2, 2);
    EXPECT_NEAR(net.similarity(a, b), manual_similarity(net, a, b), 1e-12);
  }
}

TEST(SimNet, BoundedAndDeterministic) {
  auto net = make_net(16, 9);
  auto twin = make_net(16, 9);
  testing::Gen g(12);
  for (int i = 0; i < 200; ++i) {
    auto a = g.vector(16, -3, 3), b = g.vector(16, -3, 3);
    const double s = net.similarity(a, b);
    ASSERT_GT(s, 0.0);
    ASSERT_LT(s, 1.0);
    ASSERT_EQ(s, twin.similarity(a, b));
  }
}

TEST(SimNet, NotSymmetricInGeneral) {
  auto net = make_net(8, 2);
  testing::Gen g(2);
  int asymmetric = 0;
  for (int i = 0; i < 20; ++i) {
    auto a = g.vector(8, -1, 1), b = g.vector(8, -1, 1);
    asymmetric += net.similarity(a, b) != net.similarity(b, a);
  }
  EXPECT_GT(asymmetric, 0);
}

TEST(SimNet, ZeroFinalLayerGivesHalf) {
  auto net = make_net(4, 3);
  std::fill(net.parameters()[2].value.begin(), net.parameters()[2].value.end(), 0.0);
  net.parameters()[3].value[0] = 0.0;
  testing::Gen g(1);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(net.similarity(g.vector(4, -5, 5), g.vector(4, -5, 5)), 0.5);
  }
}

TEST(SimNet, InputGradientMatchesFiniteDifferences) {
  testing::Gen g(31);
  int checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    auto net = make_net(12, 100 + trial);
    auto a = g.vector(12, -1, 1), b = g.vector(12, -1, 1);
    std::vector<double> da(12), db(12);
    net.similarity_gradient(a, b, da, db);
    const auto base = relu_pattern(net, a, b);
    const double h = 1e-4;
    for (int which = 0; which < 2; ++which) {
      auto& v = which == 0 ? a : b;
      const auto& grad = which == 0 ? da : db;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double keep = v[i];
        v[i] = keep + h;
        const double up = net.similarity(a, b);
        bool kink = relu_pattern(net, a, b) != base;
        v[i] = keep - h;
        const double down = net.similarity(a, b);
        kink |= relu_pattern(net, a, b) != base;
        v[i] = keep;
        const double fd = (up - down) / (2 * h);
        if (kink || std::abs(fd) < 1e-7) continue;  // relative error is meaningless near zero
        EXPECT_LT(testing::relative_error(grad[i], fd), 1e-4) << "trial " << trial << " i " << i;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 150);
}

TEST(SimNet, BatchForwardAndBackward) {
  auto net = make_net(6, 7, 16);
  testing::Gen g(6);
  const int n = 5;
  Eigen::MatrixXd refs(6, n), others(6, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < 6; ++i) {
      refs(i, j) = g.uniform(-1, 1);
      others(i, j) = g.uniform(-1, 1);
    }
  SimNet::BatchTrace trace;
  auto scores = net.forward(refs, others, &trace);
  for (int j = 0; j < n; ++j) {
    std::vector<double> a(refs.col(j).data(), refs.col(j).data() + 6);
    std::vector<double> b(others.col(j).data(), others.col(j).data() + 6);
    EXPECT_NEAR(scores(j), net.similarity(a, b), 1e-14);
  }

  // d(sum_j c_j * s_j)/d w1 checked against finite differences on a few weights
  Eigen::VectorXd coeff(n);
  for (int j = 0; j < n; ++j) coeff(j) = g.uniform(-1, 1);
  GradientSet<double> grads(net.parameters());
  Eigen::MatrixXd dr, dox;
  net.backward(trace, coeff, grads, dr, dox);
  auto objective = [&] { return coeff.dot(net.forward(refs, others)); };
  const double h = 1e-5;
  for (std::size_t slot = 0; slot < 4; ++slot) {
    auto& w = net.parameters()[slot].value;
    for (std::size_t k = 0; k < std::min<std::size_t>(w.size(), 7); ++k) {
      const std::size_t idx = (k * 37) % w.size();
      const double keep = w[idx];
      w[idx] = keep + h;
      const double up = objective();
      w[idx] = keep - h;
      const double down = objective();
      w[idx] = keep;
      EXPECT_NEAR(grads.slots[slot][idx], (up - down) / (2 * h), 1e-6);
    }
  }
}

TEST(SimNet, RejectsBadConfigAndInput) {
  EXPECT_THROW(validate(SimNetConfig{.hidden_dim = 0}), ConfigError);
  EXPECT_THROW(validate(SimNetConfig{.hidden_dim = 4, .activation = "tanh"}), ConfigError);
  auto net = make_net(4, 1);
  std::vector<double> a(4, 0.0), b(3, 0.0);
  EXPECT_THROW(net.similarity(a, b), DataError);
  EXPECT_THROW(net.similarity(b, b), DataError);
}

}  // namespace
}  // namespace recap
