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
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "recap/error.hpp"
#include "recap/model.hpp"
#include "recap/trainer.hpp"
#include "recap/triplets.hpp"
#include "test_support.hpp"

namespace recap {
namespace {

struct Toy {
  std::vector<DocumentImage> images;
  Manifest manifest;

  void add(const std::string& id, const std::string& tmpl, Label label,
           ResolutionGroup group = ResolutionGroup::high, int h = 224, int w = 224) {
    DocumentImage d;
    d.id = id;
    d.pixels = testing::noise_image(h, w, images.size() + 1);
    d.provenance.template_id = tmpl;
    d.provenance.label = label;
    d.provenance.channel = label == Label::genuine ? Channel::capture : Channel::print_scan;
    d.provenance.resolution_group = group;
    images.push_back(d);
    manifest.rows.push_back({"images/" + id + ".png", id, d.provenance});
  }
  PatchStore store(int stride = 224) const { return PatchStore(images, stride, {}); }
};

TEST(PatchStore, FiltersAndIndexes) {
  Toy toy;
  toy.add("g1", "A", Label::genuine, ResolutionGroup::high, 256, 384);
  DocumentImage flat;
  flat.id = "flat";
  flat.pixels = Image(224, 224, 128);
  flat.provenance.template_id = "A";
  toy.images.push_back(flat);
  auto store = toy.store(112);
  EXPECT_EQ(store.patches_of("g1").size(), 2u * 3u);
  EXPECT_TRUE(store.patches_of("flat").empty());
  EXPECT_EQ(store.empty_images(), std::vector<std::string>{"flat"});
  EXPECT_TRUE(store.find("g1", 32, 160).has_value());
  EXPECT_FALSE(store.find("g1", 1, 1).has_value());
}

TEST(CandidateTriplets, TwoByThreeGivesSix) {
  Toy toy;
  toy.add("g1", "A", Label::genuine);
  toy.add("g2", "A", Label::genuine);
  for (int i = 0; i < 3; ++i) toy.add("r" + std::to_string(i), "A", Label::recaptured);
  auto store = toy.store();
  auto c = build_candidate_triplets(toy.manifest, store);
  ASSERT_EQ(c.triplets.size(), 6u);
  EXPECT_TRUE(c.reason.empty());
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const auto& t : c.triplets) {
    EXPECT_NO_THROW(validate(t, store));
    EXPECT_NE(store[t.reference].source_id, store[t.positive].source_id);
    seen.insert({store[t.reference].source_id, store[t.positive].source_id, store[t.negative].source_id});
  }
  EXPECT_EQ(seen.size(), 6u);
}

TEST(CandidateTriplets, TemplateWithoutNegativesContributesNothing) {
  Toy toy;
  toy.add("a_g1", "A", Label::genuine);
  toy.add("a_g2", "A", Label::genuine);
  for (int i = 0; i < 3; ++i) toy.add("a_r" + std::to_string(i), "A", Label::recaptured);
  toy.add("b_g1", "B", Label::genuine);
  auto store = toy.store();
  auto c = build_candidate_triplets(toy.manifest, store);
  ASSERT_FALSE(c.triplets.empty());
  for (const auto& t : c.triplets) {
    EXPECT_EQ(store[t.reference].provenance.template_id, "A");
    EXPECT_EQ(store[t.positive].provenance.template_id, "A");
    EXPECT_EQ(store[t.negative].provenance.template_id, "A");
  }
}

TEST(CandidateTriplets, NeverMixResolutionGroups) {
  Toy toy;
  toy.add("h1", "A", Label::genuine, ResolutionGroup::high);
  toy.add("h2", "A", Label::genuine, ResolutionGroup::high);
  toy.add("l1", "A", Label::genuine, ResolutionGroup::low);
  toy.add("l2", "A", Label::genuine, ResolutionGroup::low);
  toy.add("hr", "A", Label::recaptured, ResolutionGroup::high);
  toy.add("lr", "A", Label::recaptured, ResolutionGroup::low);
  auto store = toy.store();
  auto c = build_candidate_triplets(toy.manifest, store);
  ASSERT_FALSE(c.triplets.empty());
  std::set<ResolutionGroup> ref_groups;
  for (const auto& t : c.triplets) {
    const auto g = store[t.reference].provenance.resolution_group;
    EXPECT_EQ(store[t.positive].provenance.resolution_group, g);
    EXPECT_EQ(store[t.negative].provenance.resolution_group, g);
    ref_groups.insert(g);
  }
  EXPECT_EQ(ref_groups.size(), 2u);
}

TEST(CandidateTriplets, PrefersHighQualityReferences) {
  // Only matters inside the low group: every high-group genuine qualifies.
  Toy toy;
  toy.add("plain", "A", Label::genuine, ResolutionGroup::low);
  toy.add("scan", "A", Label::genuine, ResolutionGroup::low);
  toy.images.back().provenance.device_class = DeviceClass::scanner;
  toy.manifest.rows.back().provenance.device_class = DeviceClass::scanner;
  toy.add("neg", "A", Label::recaptured, ResolutionGroup::low);
  auto store = toy.store();
  auto c = build_candidate_triplets(toy.manifest, store);
  ASSERT_FALSE(c.triplets.empty());
  for (const auto& t : c.triplets) EXPECT_EQ(store[t.reference].source_id, "scan");
}

TEST(CandidateTriplets, SingleGenuineMayServeAsBoth) {
  Toy toy;
  toy.add("only", "A", Label::genuine);
  toy.add("neg", "A", Label::recaptured);
  auto store = toy.store();
  auto c = build_candidate_triplets(toy.manifest, store);
  ASSERT_EQ(c.triplets.size(), 1u);
  EXPECT_EQ(c.triplets[0].reference, c.triplets[0].positive);
}

TEST(CandidateTriplets, AlignedPatchOrigins) {
  Toy toy;
  toy.add("g1", "A", Label::genuine, ResolutionGroup::high, 256, 384);
  toy.add("g2", "A", Label::genuine, ResolutionGroup::high, 256, 384);
  toy.add("r1", "A", Label::recaptured, ResolutionGroup::high, 256, 384);
  auto store = toy.store(112);
  auto c = build_candidate_triplets(toy.manifest, store);
  EXPECT_EQ(c.triplets.size(), 2u * 6u);  // two (ref,pos) orders, six shared origins
  for (const auto& t : c.triplets) {
    EXPECT_EQ(store[t.reference].row, store[t.positive].row);
    EXPECT_EQ(store[t.reference].col, store[t.negative].col);
  }
}

TEST(CandidateTriplets, EmptyWithReason) {
  Toy toy;
  toy.add("g1", "A", Label::genuine);
  toy.add("g2", "A", Label::genuine);
  auto c = build_candidate_triplets(toy.manifest, toy.store());
  EXPECT_TRUE(c.triplets.empty());
  EXPECT_FALSE(c.reason.empty());
}

TEST(TripletValidation, RejectsBrokenTriplets) {
  Toy toy;
  toy.add("g1", "A", Label::genuine);
  toy.add("g2", "A", Label::genuine);
  toy.add("r1", "A", Label::recaptured);
  toy.add("x", "B", Label::recaptured);
  auto store = toy.store();
  EXPECT_NO_THROW(validate(Triplet{0, 1, 2}, store));
  EXPECT_THROW(validate(Triplet{0, 2, 1}, store), DataError);  // recaptured positive
  EXPECT_THROW(validate(Triplet{0, 1, 3}, store), DataError);  // other template
  EXPECT_THROW(validate(Triplet{0, 0, 2}, store), DataError);  // same source
  EXPECT_NO_THROW(validate(Triplet{0, 0, 2}, store, true));
}

// mining ----------------------------------------------------------------------

TEST(MineSemiHard, WorkedExample) {
  std::vector<Triplet> cands{{0, 1, 2}, {0, 1, 3}, {0, 1, 4}};
  std::vector<TripletScores> scores{{0.8, 0.9}, {0.8, 0.7}, {0.8, 0.1}};
  MiningConfig cfg;
  cfg.gamma = 0.2;
  auto out = mine_semi_hard(cands, scores, cfg);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], cands[1]);
  EXPECT_LT(oracle::hinge(0.8, 0.1, 0.2), 0.0);
}

TEST(MineSemiHard, AllAndRandomModes) {
  std::vector<Triplet> cands;
  for (std::size_t i = 0; i < 30; ++i) cands.push_back({i % 3, 10 + i % 5, 100 + i});
  MiningConfig cfg;
  cfg.mode = MiningMode::all;
  EXPECT_EQ(mine_semi_hard(cands, {}, cfg), cands);

  cfg.mode = MiningMode::random;
  cfg.max_total = 12;
  auto a = mine_semi_hard(cands, {}, cfg, 5), b = mine_semi_hard(cands, {}, cfg, 5);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 12u);
  cfg.max_total = 100;
  EXPECT_EQ(mine_semi_hard(cands, {}, cfg, 5).size(), 30u);
}

TEST(MineSemiHard, MatchesBruteForce) {
  testing::Gen g(61);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = g.integer(0, 50);
    std::vector<Triplet> cands;
    std::vector<TripletScores> scores;
    for (int i = 0; i < n; ++i) {
      cands.push_back({static_cast<std::size_t>(g.integer(0, 3)), static_cast<std::size_t>(g.integer(4, 6)),
                       static_cast<std::size_t>(7 + i)});
      // coarse grid produces exact ties in the hinge ordering
      const bool coarse = trial % 3 == 0;
      double sp = g.uniform(), sn = g.uniform();
      if (coarse) {
        sp = std::round(sp * 8) / 8;
        sn = std::round(sn * 8) / 8;
      }
      scores.push_back({sp, sn});
    }
    MiningConfig cfg;
    cfg.gamma = g.uniform(0.05, 0.8);
    cfg.max_per_anchor = g.integer(1, 5);
    cfg.max_total = trial % 4 == 0 ? static_cast<std::size_t>(g.integer(1, 10)) : 0;
    auto got = mine_semi_hard(cands, scores, cfg);
    auto want = oracle::semi_hard(cands, scores, cfg.gamma, cfg.max_per_anchor, cfg.max_total);
    ASSERT_EQ(got, want) << "trial " << trial;
    for (const auto& t : got) {
      const auto i = static_cast<std::size_t>(&*std::find(cands.begin(), cands.end(), t) - &cands[0]);
      ASSERT_GT(oracle::ts(scores[i].positive, scores[i].negative, cfg.gamma), 0.0);
    }
  }
}

TEST(MineSemiHard, ModelOverloadAgreesWithScores) {
  Toy toy;
  toy.add("g1", "A", Label::genuine);
  toy.add("g2", "A", Label::genuine);
  for (int i = 0; i < 4; ++i) toy.add("r" + std::to_string(i), "A", Label::recaptured);
  auto store = toy.store();
  auto cands = build_candidate_triplets(toy.manifest, store).triplets;
  ForensicModel model(testing::tiny_model(4));
  MiningConfig cfg;
  cfg.gamma = 2.0;  // wide margin so something survives on an untrained model
  auto scores = score_triplets(model, store, cands);
  EXPECT_EQ(mine_semi_hard(cands, store, model, cfg), mine_semi_hard(cands, scores, cfg));
}

TEST(MiningConfig, Validation) {
  MiningConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  cfg.max_per_anchor = 0;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = {};
  cfg.scope = "batch";
  EXPECT_THROW(validate(cfg), ConfigError);
  EXPECT_EQ(parse_mining_mode("random"), MiningMode::random);
  EXPECT_THROW(parse_mining_mode("hard"), ConfigError);
}

TEST(ExportTriplets, JsonLines) {
  Toy toy;
  toy.add("g1", "A", Label::genuine);
  toy.add("g2", "A", Label::genuine);
  toy.add("r1", "A", Label::recaptured);
  auto store = toy.store();
  auto cands = build_candidate_triplets(toy.manifest, store).triplets;
  auto dir = testing::scratch_dir("triplets");
  export_triplets(cands, store, dir / "t.jsonl");
  std::ifstream in(dir / "t.jsonl");
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["negative"]["id"], "r1");
    EXPECT_EQ(j["reference"]["row"], 0);
    ++n;
  }
  EXPECT_EQ(n, cands.size());
}

}  // namespace
}  // namespace recap
