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

#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>

#include "recap/channelsim.hpp"
#include "recap/error.hpp"
#include "recap/spectral.hpp"
#include "test_support.hpp"

namespace recap {
namespace {

DocumentImage doc_of(Image img, const std::string& id = "d") {
  DocumentImage d;
  d.id = id;
  d.pixels = std::move(img);
  d.provenance.template_id = "T";
  return d;
}

ChannelParams identity_params() {
  ChannelParams p;
  p.blur_sigma = 0;
  p.noise_sigma = 0;
  return p;
}

std::array<double, 3> channel_means(const Image& img) {
  std::array<double, 3> m{};
  for (std::size_t i = 0; i < img.pixels.size(); ++i) m[i % 3] += img.pixels[i];
  for (auto& v : m) v /= img.pixels.size() / 3.0;
  return m;
}

double mean_shift(const Image& a, const Image& b) {
  auto ma = channel_means(a), mb = channel_means(b);
  double s = 0;
  for (int c = 0; c < 3; ++c) s += std::abs(ma[c] - mb[c]);
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(MakeTemplate, DeterministicAndDistinct) {
  auto a = make_template("UNI-A", 256, 320, 4);
  auto b = make_template("UNI-A", 256, 320, 4);
  EXPECT_EQ(a.pixels, b.pixels);
  EXPECT_EQ(a.provenance.label, Label::genuine);
  EXPECT_EQ(a.provenance.channel, Channel::capture);

  auto c = make_template("UNI-B", 256, 320, 4);
  std::size_t differ = 0;
  for (int r = 0; r < 256; ++r)
    for (int col = 0; col < 320; ++col) {
      bool d = false;
      for (int ch = 0; ch < 3; ++ch) d |= a.pixels.at(r, col, ch) != c.pixels.at(r, col, ch);
      differ += d;
    }
  EXPECT_GT(differ, 256u * 320u / 10u);
}

TEST(MakeTemplate, SmallestSize) {
  auto t = make_template("S", 224, 224, 1);
  EXPECT_EQ(t.pixels.height, 224);
  EXPECT_NO_THROW(validate(t));
  EXPECT_EQ(extract_patches(t, 224).size(), 1u);
  EXPECT_THROW(make_template("S", 200, 224, 1), ConfigError);
}

TEST(SimulateCapture, IdentityParameters) {
  auto t = make_template("T", 256, 256, 2);
  auto out = simulate_capture(t, identity_params());
  EXPECT_EQ(out.pixels, t.pixels);
}

TEST(SimulateCapture, NoiseIsSeeded) {
  auto t = make_template("T", 256, 256, 2);
  auto p = identity_params();
  p.noise_sigma = 5;
  p.seed = 99;
  EXPECT_EQ(simulate_capture(t, p).pixels, simulate_capture(t, p).pixels);
  EXPECT_NE(simulate_capture(t, p).pixels, t.pixels);
}

TEST(SimulateCapture, BlurRemovesHighFrequencies) {
  auto board = doc_of(testing::checkerboard(224, 224, 2));
  auto p = identity_params();
  p.blur_sigma = 1.5;
  auto out = simulate_capture(board, p);
  EXPECT_LT(high_frequency_energy_fraction(out.pixels), high_frequency_energy_fraction(board.pixels));
}

TEST(SimulateCapture, RejectsHalftone) {
  auto p = identity_params();
  p.halftone = Halftone::ordered_dither;
  EXPECT_THROW(simulate_capture(make_template("T", 224, 224, 1), p), ConfigError);
}

TEST(PrintScan, DitherAddsHighFrequencies) {
  auto t = simulate_capture(make_template("T", 256, 384, 3), default_capture_params());
  auto p = identity_params();
  p.halftone = Halftone::ordered_dither;
  p.cell_size = 4;
  auto out = simulate_print_scan_recapture(t, p);
  EXPECT_GT(high_frequency_energy_fraction(out.pixels), high_frequency_energy_fraction(t.pixels));
  EXPECT_EQ(out.provenance.label, Label::recaptured);
  EXPECT_EQ(out.provenance.channel, Channel::print_scan);
}

TEST(PrintScan, DeterministicAndClosed) {
  auto t = make_template("T", 256, 256, 3);
  auto p = default_print_scan_params();
  p.seed = 5;
  auto a = simulate_print_scan_recapture(t, p), b = simulate_print_scan_recapture(t, p);
  EXPECT_EQ(a.pixels, b.pixels);
  auto twice = simulate_print_scan_recapture(a, p);
  EXPECT_EQ(twice.provenance.label, Label::recaptured);
  EXPECT_NE(twice.id, a.id);
  EXPECT_NE(twice.id.find("rr"), std::string::npos);
  EXPECT_EQ(twice.pixels.height, t.pixels.height);

  p.halftone = Halftone::none;
  EXPECT_THROW(simulate_print_scan_recapture(t, p), ConfigError);
  p.halftone = Halftone::error_diffusion;
  EXPECT_NO_THROW(simulate_print_scan_recapture(t, p));
}

TEST(DisplayCapture, IdentityColorRejected) {
  auto p = default_display_capture_params();
  p.color_matrix = kIdentityColor;
  EXPECT_THROW(validate(p, Channel::display_capture), ConfigError);
  auto h = default_display_capture_params();
  h.halftone = Halftone::ordered_dither;
  EXPECT_THROW(validate(h, Channel::display_capture), ConfigError);
  auto ps = default_print_scan_params();
  ps.grid_period = 3;
  EXPECT_THROW(validate(ps, Channel::print_scan), ConfigError);
}

TEST(DisplayCapture, LargerColourShiftThanPrintScan) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto t = simulate_capture(make_template("T" + std::to_string(seed), 256, 384, seed), default_capture_params());
    auto dp = default_display_capture_params();
    dp.seed = seed;
    auto pp = default_print_scan_params();
    pp.seed = seed;
    auto d = simulate_display_capture_recapture(t, dp);
    auto ps = simulate_print_scan_recapture(t, pp);
    EXPECT_GT(mean_shift(d.pixels, t.pixels), mean_shift(ps.pixels, t.pixels)) << "seed " << seed;
  }
}

TEST(DisplayCapture, GridPeriodPeak) {
  auto flat = doc_of(Image(224, 240, 160));
  auto p = default_display_capture_params();
  p.grid_period = 3;
  p.blur_sigma = 0;
  p.noise_sigma = 0;
  auto out = simulate_display_capture_recapture(flat, p);
  EXPECT_NEAR(dominant_horizontal_period(out.pixels), 3.0, 1e-9);
  EXPECT_EQ(out.provenance.channel, Channel::display_capture);
}

TEST(Simulators, PreserveShapeAndRange) {
  testing::Gen g(3);
  for (int i = 0; i < 5; ++i) {
    auto d = doc_of(testing::noise_image(g.integer(224, 260), g.integer(224, 260), i));
    auto ps = default_print_scan_params();
    ps.noise_sigma = 40;  // pushes values against the clamp
    for (const auto& out : {simulate_capture(d, default_capture_params()), simulate_print_scan_recapture(d, ps),
                            simulate_display_capture_recapture(d, default_display_capture_params())}) {
      EXPECT_EQ(out.pixels.height, d.pixels.height);
      EXPECT_EQ(out.pixels.width, d.pixels.width);
      EXPECT_EQ(out.pixels.pixels.size(), d.pixels.pixels.size());
    }
  }
}

TEST(Simulators, PrintScanHasMoreHighFrequencyEnergyThanCapture) {
  // 50 fixed-seed documents, compared on average
  double ps = 0, cap = 0;
  for (int i = 0; i < 50; ++i) {
    auto base = make_template("H" + std::to_string(i % 5), 224, 224, 100 + i);
    auto cp = default_capture_params();
    cp.seed = mix_seed({7, static_cast<std::uint64_t>(i)});
    auto captured = simulate_capture(base, cp);
    auto pp = default_print_scan_params();
    pp.seed = mix_seed({8, static_cast<std::uint64_t>(i)});
    cap += high_frequency_energy_fraction(captured.pixels);
    ps += high_frequency_energy_fraction(simulate_print_scan_recapture(captured, pp).pixels);
  }
  EXPECT_GT(ps / 50, cap / 50);
}

TEST(GenerateCorpus, CountsMixAndDeterminism) {
  SynthSpec spec;
  spec.n_templates = 2;
  spec.n_genuine_per_template = 3;
  spec.n_recaptured_per_template = 6;
  spec.height = 224;
  spec.width = 256;
  spec.master_seed = 42;
  auto d1 = testing::scratch_dir("corpus_a"), d2 = testing::scratch_dir("corpus_b");
  auto m1 = generate_corpus(spec, d1);
  auto m2 = generate_corpus(spec, d2);
  ASSERT_EQ(m1.rows.size(), 18u);
  EXPECT_EQ(m1.rows, m2.rows);
  for (const auto& r : m1.rows) {
    EXPECT_EQ(slurp(m1.resolve(r)), slurp(m2.resolve(r))) << r.id;
  }
  std::map<std::string, std::array<int, 3>> per;
  for (const auto& r : m1.rows) per[r.provenance.template_id][static_cast<int>(r.provenance.channel)]++;
  ASSERT_EQ(per.size(), 2u);
  for (const auto& [t, c] : per) {
    EXPECT_EQ(c[0], 3) << t;
    EXPECT_EQ(c[1], 3) << t;
    EXPECT_EQ(c[2], 3) << t;
  }
  EXPECT_NO_THROW(load_manifest(d1 / "manifest.jsonl"));
}

TEST(GenerateCorpus, ImageSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (int t = 0; t < 20; ++t)
    for (int i = 0; i < 50; ++i) seen.insert(image_seed(9, t, i));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(SynthSpec, Validation) {
  SynthSpec s;
  EXPECT_NO_THROW(validate(s));
  s.channel_mix = {0.7, 0.7};
  EXPECT_THROW(validate(s), ConfigError);
  s = SynthSpec{};
  s.n_recaptured_per_template = 0;
  EXPECT_THROW(validate(s), ConfigError);
}

}  // namespace
}  // namespace recap
