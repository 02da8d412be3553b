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

#include <fstream>
#include <string>
#include <vector>

#include "recap/channelsim.hpp"
#include "recap/error.hpp"
#include "recap/model.hpp"
#include "recap/trainer.hpp"
#include "recap/triplets.hpp"
#include "test_support.hpp"

namespace recap {
namespace {

// One template, single-patch images: genuine captures versus print-scan
// recaptures. g genuine and r recaptured give g*(g-1)*r candidates.
struct Corpus {
  std::vector<DocumentImage> images;
  Manifest manifest;
  PatchStore store;
  std::vector<Triplet> candidates;

  Corpus(int g, int r, std::uint64_t seed, ResolutionGroup group = ResolutionGroup::high,
         const std::string& tmpl = "T") {
    add(g, r, seed, group, tmpl);
    finish();
  }
  Corpus() = default;

  void add(int g, int r, std::uint64_t seed, ResolutionGroup group, const std::string& tmpl) {
    for (int i = 0; i < g + r; ++i) {
      auto doc = make_template(tmpl, 224, 224, 7);  // same layout for every image
      auto cp = default_capture_params();
      cp.seed = mix_seed({seed, static_cast<std::uint64_t>(i), 1});
      doc = simulate_capture(doc, cp);
      if (i >= g) {
        auto pp = default_print_scan_params();
        pp.seed = mix_seed({seed, static_cast<std::uint64_t>(i), 2});
        doc = simulate_print_scan_recapture(doc, pp);
      }
      doc.id = tmpl + (i < g ? "_g" : "_r") + std::to_string(i) + (group == ResolutionGroup::low ? "_lo" : "");
      doc.provenance.resolution_group = group;
      images.push_back(doc);
      manifest.rows.push_back({"images/" + doc.id + ".png", doc.id, doc.provenance});
    }
  }
  void finish() {
    store = PatchStore(images, 224, {});
    candidates = build_candidate_triplets(manifest, store).triplets;
  }
};

TrainConfig quick_config(int epochs = 2) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 16;
  c.learning_rate = 1e-3;
  c.seed = 3;
  return c;
}

std::vector<double> flat_params(const ForensicModel& m) {
  std::vector<double> out;
  for (const auto& p : m.embedder.parameters()) out.insert(out.end(), p.value.begin(), p.value.end());
  for (const auto& p : m.simnet.parameters()) out.insert(out.end(), p.value.begin(), p.value.end());
  return out;
}

TEST(Train, HistoryLengthMatchesEpochs) {
  Corpus c(3, 5, 1);  // 3*2*5 = 30 candidates
  ASSERT_EQ(c.candidates.size(), 30u);
  auto r = train(ForensicModel(testing::tiny_model()), c.store, c.candidates, {}, quick_config(2));
  ASSERT_EQ(r.history.epochs.size(), 2u);
  for (const auto& e : r.history.epochs) {
    EXPECT_TRUE(std::isfinite(e.l_fl));
    EXPECT_LE(e.triplet_count, c.candidates.size());
  }
  EXPECT_EQ(r.history.best_epoch, 2);
}

TEST(Train, DeterministicGivenSeed) {
  Corpus c(3, 5, 2);
  auto cfg = quick_config(3);
  cfg.mining.mode = MiningMode::all;
  auto a = train(ForensicModel(testing::tiny_model()), c.store, c.candidates, {}, cfg);
  auto b = train(ForensicModel(testing::tiny_model()), c.store, c.candidates, {}, cfg);
  ASSERT_EQ(a.history.epochs.size(), b.history.epochs.size());
  for (std::size_t i = 0; i < a.history.epochs.size(); ++i) {
    EXPECT_NEAR(a.history.epochs[i].l_fl, b.history.epochs[i].l_fl, 1e-6);
  }
  EXPECT_EQ(flat_params(a.model), flat_params(b.model));
}

TEST(Train, LossFallsOnSeparableData) {
  // 5 genuine, 10 recaptured: 5*4*10 = 200 triplets; 10 epochs; 10 seeds
  int improved = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Corpus c(5, 10, 100 + seed);
    ASSERT_EQ(c.candidates.size(), 200u);
    auto cfg = quick_config(10);
    cfg.batch_size = 32;
    cfg.learning_rate = 1e-4;
    cfg.mining.mode = MiningMode::all;
    cfg.seed = seed;
    auto r = train(ForensicModel(testing::tiny_model(seed)), c.store, c.candidates, {}, cfg);
    improved += r.history.epochs.back().l_fl < r.history.epochs.front().l_fl;
  }
  EXPECT_GE(improved, 9);
}

TEST(Train, SelectsBestValidationEpoch) {
  Corpus c(3, 5, 4);
  Corpus v(2, 3, 5, ResolutionGroup::high, "V");
  // validation patches live in the same store
  std::vector<DocumentImage> all = c.images;
  all.insert(all.end(), v.images.begin(), v.images.end());
  Manifest m = c.manifest;
  m.rows.insert(m.rows.end(), v.manifest.rows.begin(), v.manifest.rows.end());
  PatchStore store(all, 224, {});
  auto train_cands = build_candidate_triplets(c.manifest, store).triplets;
  auto val_cands = build_candidate_triplets(v.manifest, store).triplets;
  ASSERT_FALSE(val_cands.empty());
  auto cfg = quick_config(4);
  cfg.mining.mode = MiningMode::all;
  auto r = train(ForensicModel(testing::tiny_model()), store, train_cands, val_cands, cfg);
  double best = 1e300;
  int best_epoch = 0;
  for (const auto& e : r.history.epochs) {
    if (e.val_l_fl < best) {
      best = e.val_l_fl;
      best_epoch = e.epoch;
    }
  }
  EXPECT_EQ(r.history.best_epoch, best_epoch);
  LossConfig mean_loss = cfg.loss;
  mean_loss.reduction = Reduction::mean;
  EXPECT_NEAR(evaluate_loss(r.model, store, val_cands, mean_loss).l_fl, best, 1e-9);
}

TEST(Train, LoggedLossMatchesEpochSnapshot) {
  Corpus c(3, 5, 6);
  auto dir = testing::scratch_dir("epochs");
  auto cfg = quick_config(3);
  cfg.epoch_checkpoint_dir = dir;
  cfg.keep_epoch_triplets = true;
  cfg.mining.gamma = 2.0;  // keep the mined set non-empty
  auto r = train(ForensicModel(testing::tiny_model()), c.store, c.candidates, {}, cfg);
  ASSERT_EQ(r.epoch_triplets.size(), 3u);
  LossConfig mean_loss = cfg.loss;
  mean_loss.reduction = Reduction::mean;
  for (int e = 1; e <= 3; ++e) {
    const auto& snap = r.epoch_triplets[e - 1];
    if (snap.empty()) continue;
    auto m = load_checkpoint(dir / ("epoch_" + std::to_string(e)));
    auto l = evaluate_loss(m, c.store, snap, mean_loss);
    EXPECT_NEAR(l.l_fl, r.history.epochs[e - 1].l_fl, 1e-5) << "epoch " << e;
  }
}

TEST(Train, FrozenBackboneStaysBitIdentical) {
  Corpus c(3, 5, 7);
  auto mc = testing::tiny_model();
  mc.embedder.freeze_backbone = true;
  ForensicModel before(mc);
  auto cfg = quick_config(1);
  cfg.mining.mode = MiningMode::all;
  auto r = train(before, c.store, c.candidates, {}, cfg);
  const auto& a = before.embedder.parameters();
  const auto& b = r.model.embedder.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i < before.embedder.head_begin()) {
      EXPECT_EQ(a[i].value, b[i].value) << a[i].name;
    }
  }
  bool head_moved = false;
  for (std::size_t i = before.embedder.head_begin(); i < a.size(); ++i) head_moved |= a[i].value != b[i].value;
  EXPECT_TRUE(head_moved);
}

TEST(Train, Errors) {
  Corpus c(3, 5, 8);
  ForensicModel m(testing::tiny_model());
  EXPECT_THROW(train(m, c.store, {}, {}, quick_config()), TrainingError);
  auto bad = quick_config();
  bad.learning_rate = 0;
  EXPECT_THROW(train(m, c.store, c.candidates, {}, bad), ConfigError);
  bad = quick_config();
  bad.epochs = 0;
  EXPECT_THROW(train(m, c.store, c.candidates, {}, bad), ConfigError);
  bad = quick_config();
  bad.batch_size = 0;
  EXPECT_THROW(validate(bad), ConfigError);
}

TEST(Finetune, SixBalancedTriplets) {
  Corpus c;
  c.add(2, 2, 9, ResolutionGroup::high, "T");
  c.add(3, 2, 10, ResolutionGroup::low, "T");
  c.finish();
  std::vector<Triplet> high, low;
  for (const auto& t : c.candidates) {
    auto& bucket = c.store[t.reference].provenance.resolution_group == ResolutionGroup::high ? high : low;
    bucket.push_back(t);
  }
  ASSERT_GE(high.size(), 2u);
  ASSERT_GE(low.size(), 4u);
  std::vector<Triplet> support{high[0], high[1], low[0], low[1], low[2], low[3]};
  ForensicModel m(testing::tiny_model());
  auto cfg = quick_config(2);
  auto tuned = finetune(m, c.store, support, cfg);
  EXPECT_NE(flat_params(tuned), flat_params(m));
  EXPECT_EQ(flat_params(m), flat_params(ForensicModel(testing::tiny_model())));  // input untouched
}

TEST(Finetune, EmptySupportRejected) {
  Corpus c(2, 2, 11);
  ForensicModel m(testing::tiny_model());
  EXPECT_THROW(finetune(m, c.store, {}, quick_config()), DataError);
}

TEST(Finetune, ZeroLearningRateIsANoOp) {
  Corpus c(2, 3, 12);
  ForensicModel m(testing::tiny_model());
  auto cfg = quick_config(2);
  cfg.learning_rate = 0.0;
  auto tuned = finetune(m, c.store, c.candidates, cfg);
  for (std::size_t i = 0; i < c.store.size(); ++i) {
    EXPECT_EQ(tuned.embedder.forward(c.store[i].pixels), m.embedder.forward(c.store[i].pixels));
  }
}

TEST(Checkpoint, RoundTrip) {
  Corpus c(2, 2, 13);
  ForensicModel m(testing::tiny_model(8));
  m.step = 17;
  m.extras["threshold"] = 0.625;
  auto dir = testing::scratch_dir("ckpt");
  save_checkpoint(m, dir / "model");
  auto back = load_checkpoint(dir / "model");
  EXPECT_EQ(back.step, 17u);
  EXPECT_EQ(back.extras.at("threshold"), 0.625);
  EXPECT_EQ(back.config(), m.config());
  for (std::size_t i = 0; i < c.store.size(); ++i) {
    auto a = m.embedder.forward(c.store[i].pixels);
    auto b = back.embedder.forward(c.store[i].pixels);
    for (std::size_t k = 0; k < a.size(); ++k) ASSERT_NEAR(a[k], b[k], 1e-6);
    EXPECT_NEAR(m.simnet.similarity(a, a), back.simnet.similarity(b, b), 1e-6);
  }
}

TEST(Checkpoint, MismatchAndMissing) {
  ForensicModel m(testing::tiny_model());
  auto dir = testing::scratch_dir("ckpt_bad");
  save_checkpoint(m, dir / "model");
  auto other = testing::tiny_model();
  other.embedder.embed_dim = 32;
  try {
    load_checkpoint(dir / "model", &other);
    FAIL() << "mismatch accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("embed_dim"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_checkpoint(dir / "nowhere"), IoError);

  // truncated weights
  std::filesystem::resize_file(dir / "model" / "weights.bin", 100);
  EXPECT_THROW(load_checkpoint(dir / "model"), IoError);
}

TEST(History, CsvLayout) {
  TrainHistory h;
  h.epochs.push_back({1, 0.5, 0.7, 0.71, 12, 0.1, 0.8});
  h.epochs.push_back({2, 0.25, 0.6, 0.43, 10, 0.1, 0.7});
  auto dir = testing::scratch_dir("history");
  write_history_csv(h, dir / "history.csv");
  std::ifstream in(dir / "history.csv");
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "epoch,l_ts,l_ns,l_fl,triplet_count,wall_time,val_l_fl");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2);
}

}  // namespace
}  // namespace recap
