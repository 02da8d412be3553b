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
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "recap/channelsim.hpp"
#include "recap/corpus.hpp"
#include "recap/embedder.hpp"
#include "recap/loss.hpp"
#include "recap/metrics.hpp"
#include "recap/simnet.hpp"

namespace {

using namespace recap;

Image random_patch(std::uint64_t seed) {
  Image img(224, 224);
  std::mt19937_64 rng(seed);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xFF);
  return img;
}

void BM_EmbedderForward(benchmark::State& state) {
  EmbedderConfig c;
  c.init_seed = 1;
  Embedder e(c);
  const auto patch = random_patch(2);
  for (auto _ : state) benchmark::DoNotOptimize(e.forward(patch));
}
BENCHMARK(BM_EmbedderForward)->Unit(benchmark::kMillisecond);

void BM_EmbedderForwardBackward(benchmark::State& state) {
  EmbedderConfig c;
  c.init_seed = 1;
  Embedder e(c);
  const auto patch = random_patch(3);
  const std::vector<double> d(static_cast<std::size_t>(c.embed_dim), 1e-3);
  for (auto _ : state) {
    Embedder::Trace trace;
    e.forward(patch, trace);
    GradientSet<float> grads(e.parameters());
    e.backward(trace, d, grads);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK(BM_EmbedderForwardBackward)->Unit(benchmark::kMillisecond);

void BM_SimNetBatch(benchmark::State& state) {
  SimNetConfig c;
  c.init_seed = 4;
  SimNet net(c, 256);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(256, n), b = Eigen::MatrixXd::Random(256, n);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(a, b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimNetBatch)->Arg(32)->Arg(128);

void BM_ForensicLossGradient(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> sp(4096), sn(4096);
  for (auto& v : sp) v = u(rng);
  for (auto& v : sn) v = u(rng);
  const LossConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(forensic_loss(sp, sn, cfg));
    benchmark::DoNotOptimize(forensic_loss_gradient(sp, sn, cfg));
  }
}
BENCHMARK(BM_ForensicLossGradient);

void BM_EerAuc(benchmark::State& state) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<ScoredSample> s;
  for (int i = 0; i < state.range(0); ++i) {
    s.push_back({u(rng) + (i % 2 ? 0.3 : 0.0), i % 2 ? SampleLabel::bona_fide : SampleLabel::attack});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(eer(s));
    benchmark::DoNotOptimize(auc(s));
  }
}
BENCHMARK(BM_EerAuc)->Arg(1000)->Arg(100000);

void BM_PrintScan(benchmark::State& state) {
  const auto t = make_template("B", 256, 384, 1);
  const auto p = default_print_scan_params();
  for (auto _ : state) benchmark::DoNotOptimize(simulate_print_scan_recapture(t, p));
}
BENCHMARK(BM_PrintScan)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
