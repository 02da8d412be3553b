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
#include "recap/channelsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "recap/error.hpp"
#include "recap/image_io.hpp"
#include "recap/rng.hpp"

namespace recap {

namespace fs = std::filesystem;

std::string_view to_string(Halftone v) noexcept {
  switch (v) {
    case Halftone::none: return "none";
    case Halftone::ordered_dither: return "ordered_dither";
    case Halftone::error_diffusion: return "error_diffusion";
  }
  return "none";
}

Halftone parse_halftone(std::string_view s) {
  if (s == "none") return Halftone::none;
  if (s == "ordered_dither") return Halftone::ordered_dither;
  if (s == "error_diffusion") return Halftone::error_diffusion;
  throw ConfigError("unknown halftone '" + std::string(s) + "'");
}

namespace {

double color_deviation(const ColorMatrix& m) {
  double acc = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const double d = m[r][c] - kIdentityColor[r][c];
      acc += d * d;
    }
  return std::sqrt(acc);
}

bool has_cross_terms(const ColorMatrix& m) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (r != c && m[r][c] != 0.0) return true;
  return false;
}

}  // namespace

void validate(const ChannelParams& p, Channel channel) {
  const std::string where = "channel " + std::string(to_string(channel)) + ": ";
  if (!(p.blur_sigma >= 0.0)) throw ConfigError(where + "blur_sigma must be >= 0");
  if (!(p.noise_sigma >= 0.0)) throw ConfigError(where + "noise_sigma must be >= 0");
  for (int r = 0; r < 3; ++r) {
    const double sum = p.color_matrix[r][0] + p.color_matrix[r][1] + p.color_matrix[r][2];
    if (sum < 0.5 || sum > 1.5) {
      throw ConfigError(where + "color_matrix row " + std::to_string(r) + " sums to " +
                        std::to_string(sum) + ", outside [0.5, 1.5]");
    }
  }
  for (double g : p.gamma)
    if (!(g > 0.0)) throw ConfigError(where + "gamma exponents must be > 0");
  if (p.grid_depth < 0.0 || p.grid_depth >= 1.0) {
    throw ConfigError(where + "grid_depth must lie in [0, 1)");
  }
  switch (channel) {
    case Channel::capture:
      if (p.halftone != Halftone::none) throw ConfigError(where + "halftone requested on a capture channel");
      if (p.grid_period) throw ConfigError(where + "grid_period only applies to display_capture");
      break;
    case Channel::print_scan:
      if (p.halftone == Halftone::none) throw ConfigError(where + "print_scan requires a halftone");
      if (p.grid_period) throw ConfigError(where + "print channels take no grid_period");
      if (p.halftone == Halftone::ordered_dither && p.cell_size != 2 && p.cell_size != 4 &&
          p.cell_size != 8) {
        throw ConfigError(where + "ordered_dither cell_size must be 2, 4 or 8");
      }
      break;
    case Channel::display_capture:
      if (p.halftone != Halftone::none) throw ConfigError(where + "halftone set on display_capture");
      if (!p.grid_period || *p.grid_period < 2) {
        throw ConfigError(where + "display_capture requires grid_period >= 2");
      }
      if (!has_cross_terms(p.color_matrix) ||
          color_deviation(p.color_matrix) < kMinDisplayColorDeviation) {
        throw ConfigError(where + "display_capture needs a color_matrix with cross-channel terms "
                                  "at least " + std::to_string(kMinDisplayColorDeviation) +
                          " from identity");
      }
      break;
  }
}

ChannelParams default_capture_params() {
  ChannelParams p;
  p.blur_sigma = 0.5;
  p.noise_sigma = 2.0;
  return p;
}

ChannelParams default_phone_capture_params() {
  ChannelParams p;
  p.blur_sigma = 1.2;
  p.noise_sigma = 4.0;
  p.gamma = {1.05, 1.0, 0.95};
  return p;
}

ChannelParams default_print_scan_params() {
  ChannelParams p;
  p.halftone = Halftone::ordered_dither;
  p.cell_size = 4;
  p.blur_sigma = 0.6;
  p.noise_sigma = 4.0;
  p.gamma = {1.1, 1.1, 1.1};
  p.color_matrix = {{{0.9, 0.05, 0.05}, {0.05, 0.9, 0.05}, {0.05, 0.05, 0.9}}};
  return p;
}

ChannelParams default_display_capture_params() {
  ChannelParams p;
  p.blur_sigma = 0.6;
  p.noise_sigma = 1.5;
  p.grid_period = 3;
  p.color_matrix = {{{0.9, 0.06, 0.04}, {0.05, 0.9, 0.05}, {0.04, 0.06, 1.1}}};
  return p;
}

namespace {

/// Planar working copy on the 0-255 scale.
struct Canvas {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // interleaved like Image

  explicit Canvas(const Image& img)
      : height(img.height), width(img.width), data(img.pixels.begin(), img.pixels.end()) {}
  Canvas(int h, int w, double fill) : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, fill) {}

  double& at(int r, int c, int ch) { return data[(static_cast<std::size_t>(r) * width + c) * 3 + ch]; }

  Image quantize() const {
    Image out(height, width);
    for (std::size_t i = 0; i < data.size(); ++i) {
      out.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(data[i], 0.0, 255.0)));
    }
    return out;
  }
};

int reflect(int i, int n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
  return i;
}

void gaussian_blur(Canvas& img, double sigma) {
  if (sigma <= 0.0) return;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double norm = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    norm += kernel[k + radius];
  }
  for (double& k : kernel) k /= norm;
  std::vector<double> tmp(img.data.size());
  const int h = img.height, w = img.width;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < 3; ++ch) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k)
          acc += kernel[k + radius] * img.data[(static_cast<std::size_t>(r) * w + reflect(c + k, w)) * 3 + ch];
        tmp[(static_cast<std::size_t>(r) * w + c) * 3 + ch] = acc;
      }
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < 3; ++ch) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k)
          acc += kernel[k + radius] * tmp[(static_cast<std::size_t>(reflect(r + k, h)) * w + c) * 3 + ch];
        img.data[(static_cast<std::size_t>(r) * w + c) * 3 + ch] = acc;
      }
}

void add_noise(Canvas& img, double sigma, std::uint64_t seed) {
  if (sigma <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : img.data) v += noise(rng);
}

void apply_gamma(Canvas& img, const std::array<double, 3>& gamma) {
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double g = gamma[i % 3];
    if (g == 1.0) continue;
    const double v = std::clamp(img.data[i], 0.0, 255.0) / 255.0;
    img.data[i] = 255.0 * std::pow(v, g);
  }
}

void apply_color(Canvas& img, const ColorMatrix& m) {
  if (m == kIdentityColor) return;
  for (std::size_t i = 0; i < img.data.size(); i += 3) {
    const double r = img.data[i], g = img.data[i + 1], b = img.data[i + 2];
    for (int ch = 0; ch < 3; ++ch) img.data[i + ch] = m[ch][0] * r + m[ch][1] * g + m[ch][2] * b;
  }
}

std::vector<int> bayer_matrix(int order) {
  std::vector<int> m{0};
  int n = 1;
  while (n < order) {
    std::vector<int> next(static_cast<std::size_t>(4) * n * n);
    const int n2 = 2 * n;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        const int v = 4 * m[r * n + c];
        next[r * n2 + c] = v;
        next[r * n2 + c + n] = v + 2;
        next[(r + n) * n2 + c] = v + 3;
        next[(r + n) * n2 + c + n] = v + 1;
      }
    m = std::move(next);
    n = n2;
  }
  return m;
}

void ordered_dither(Canvas& img, int order) {
  const auto bayer = bayer_matrix(order);
  const double levels = static_cast<double>(order * order);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      const double t = (bayer[(r % order) * order + (c % order)] + 0.5) * 255.0 / levels;
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = img.at(r, c, ch) > t ? 255.0 : 0.0;
    }
}

void error_diffusion(Canvas& img) {
  const int h = img.height, w = img.width;
  for (int ch = 0; ch < 3; ++ch)
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        const double old = img.at(r, c, ch);
        const double q = old >= 127.5 ? 255.0 : 0.0;
        const double e = old - q;
        img.at(r, c, ch) = q;
        if (c + 1 < w) img.at(r, c + 1, ch) += e * 7.0 / 16.0;
        if (r + 1 < h) {
          if (c > 0) img.at(r + 1, c - 1, ch) += e * 3.0 / 16.0;
          img.at(r + 1, c, ch) += e * 5.0 / 16.0;
          if (c + 1 < w) img.at(r + 1, c + 1, ch) += e * 1.0 / 16.0;
        }
      }
}

void grid_modulation(Canvas& img, int period, double depth) {
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      const double f = (r % period == 0 ? 1.0 - depth : 1.0) * (c % period == 0 ? 1.0 - depth : 1.0);
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) *= f;
    }
}

DocumentImage relabel(const DocumentImage& in, Image pixels, Label label, Channel channel,
                      std::string_view suffix) {
  DocumentImage out;
  out.id = in.id;
  if (in.provenance.label == Label::recaptured && label == Label::recaptured) {
    out.id += "+rr";  // double recapture
  }
  out.id += suffix;
  out.pixels = std::move(pixels);
  out.provenance = in.provenance;
  out.provenance.label = label;
  out.provenance.channel = channel;
  return out;
}

// --- template rendering -----------------------------------------------------

struct Rgb {
  double r, g, b;
};

void fill_rect(Canvas& img, int r0, int c0, int r1, int c1, const Rgb& color) {
  r0 = std::max(r0, 0);
  c0 = std::max(c0, 0);
  r1 = std::min(r1, img.height);
  c1 = std::min(c1, img.width);
  for (int r = r0; r < r1; ++r)
    for (int c = c0; c < c1; ++c) {
      img.at(r, c, 0) = color.r;
      img.at(r, c, 1) = color.g;
      img.at(r, c, 2) = color.b;
    }
}

/// Rows of 5x7 pseudo-glyphs scaled by \p scale, word-wrapped inside a box.
void draw_text_block(Canvas& img, std::mt19937_64& rng, int r0, int c0, int r1, int c1,
                     int scale, int line_gap, const Rgb& ink) {
  std::bernoulli_distribution bit(0.45);
  std::uniform_int_distribution<int> word_len(2, 7);
  std::uniform_int_distribution<int> line_fill(50, 100);
  const int gw = 5 * scale, gh = 7 * scale, advance = gw + scale;
  for (int r = r0; r + gh <= r1; r += gh + line_gap) {
    const int limit = c0 + (c1 - c0) * line_fill(rng) / 100;
    int c = c0;
    while (c + gw <= limit) {
      const int n = word_len(rng);
      for (int k = 0; k < n && c + gw <= limit; ++k, c += advance) {
        for (int gy = 0; gy < 7; ++gy)
          for (int gx = 0; gx < 5; ++gx)
            if (bit(rng)) fill_rect(img, r + gy * scale, c + gx * scale, r + (gy + 1) * scale,
                                    c + (gx + 1) * scale, ink);
      }
      c += 2 * advance;
    }
  }
}

void draw_photo(Canvas& img, std::mt19937_64& rng, int r0, int c0, int r1, int c1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Rgb backdrop{150 + 60 * u(rng), 160 + 60 * u(rng), 170 + 60 * u(rng)};
  const Rgb skin{170 + 50 * u(rng), 120 + 50 * u(rng), 90 + 50 * u(rng)};
  const Rgb hair{30 + 60 * u(rng), 20 + 40 * u(rng), 10 + 40 * u(rng)};
  const double cy = r0 + (r1 - r0) * (0.42 + 0.06 * u(rng));
  const double cx = c0 + (c1 - c0) * (0.45 + 0.1 * u(rng));
  const double ry = (r1 - r0) * (0.28 + 0.05 * u(rng));
  const double rx = (c1 - c0) * (0.26 + 0.05 * u(rng));
  std::array<double, 6> phase{};
  for (double& p : phase) p = 6.283185307179586 * u(rng);
  const double fa = 0.05 + 0.1 * u(rng), fb = 0.05 + 0.1 * u(rng);
  for (int r = std::max(r0, 0); r < std::min(r1, img.height); ++r)
    for (int c = std::max(c0, 0); c < std::min(c1, img.width); ++c) {
      const double dy = (r - cy) / ry, dx = (c - cx) / rx;
      const double d = dy * dy + dx * dx;
      const double shoulders = (r - cy) / ry > 1.2 ? 1.0 : 0.0;
      Rgb base = backdrop;
      if (d < 1.0) base = (dy < -0.55) ? hair : skin;
      else if (shoulders > 0.0 && std::abs(dx) < 2.2) base = hair;
      const double tex = 12.0 * std::sin(fa * r + phase[0]) * std::cos(fb * c + phase[1]) +
                         6.0 * std::sin(0.31 * (r + c) + phase[2]);
      img.at(r, c, 0) = base.r + tex;
      img.at(r, c, 1) = base.g + tex;
      img.at(r, c, 2) = base.b + tex;
    }
}

}  // namespace

DocumentImage make_template(const std::string& template_id, int height, int width,
                            std::uint64_t seed) {
  if (height < kPatchSize || width < kPatchSize) {
    throw ConfigError("template size " + std::to_string(height) + "x" + std::to_string(width) +
                      " is below 224x224");
  }
  std::mt19937_64 style(mix_seed({hash_string(template_id), 0x7E37ULL}));
  std::mt19937_64 content(mix_seed({hash_string(template_id), seed}));
  std::uniform_real_distribution<double> u(0.0, 1.0);

  const double hue = u(style);
  auto palette = [&](double base, double spread, double shift) {
    return Rgb{base + spread * std::cos(6.2832 * (hue + shift)),
               base + spread * std::cos(6.2832 * (hue + shift + 0.333)),
               base + spread * std::cos(6.2832 * (hue + shift + 0.667))};
  };
  const Rgb background = palette(225, 22, 0.0);
  const Rgb band = palette(95, 70, 0.5 * u(style));
  const Rgb ink = palette(45, 25, u(style));
  const bool photo_left = u(style) < 0.5;
  const double band_frac = 0.14 + 0.08 * u(style);
  const double wave_f = 0.05 + 0.08 * u(style);
  const double wave_a = 8.0 + 8.0 * u(style);
  const int text_scale = 2;
  const int line_gap = 6 + static_cast<int>(6 * u(style));

  Canvas img(height, width, 0.0);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const double wave = wave_a * std::sin(wave_f * c + 3.0 * std::sin(0.045 * r));
      img.at(r, c, 0) = background.r + wave;
      img.at(r, c, 1) = background.g + wave;
      img.at(r, c, 2) = background.b + 0.5 * wave;
    }

  const int band_h = std::max(24, static_cast<int>(height * band_frac));
  fill_rect(img, 0, 0, band_h, width, band);
  {
    // Header text is part of the template, so it draws from the style stream.
    draw_text_block(img, style, band_h / 4, width / 12, band_h - band_h / 5,
                    width - width / 12, text_scale, line_gap, Rgb{245, 245, 245});
  }
  fill_rect(img, height - 10, 0, height, width, band);

  const int margin = std::max(8, width / 30);
  const int photo_w = std::max(60, static_cast<int>(width * 0.3));
  const int photo_top = band_h + margin;
  const int photo_bottom = std::min(height - 16, photo_top + static_cast<int>(photo_w * 1.25));
  const int photo_c0 = photo_left ? margin : width - margin - photo_w;
  draw_photo(img, content, photo_top, photo_c0, photo_bottom, photo_c0 + photo_w);

  const int text_c0 = photo_left ? photo_c0 + photo_w + margin : margin;
  const int text_c1 = photo_left ? width - margin : photo_c0 - margin;
  draw_text_block(img, content, photo_top, text_c0, height - 16, text_c1, text_scale, line_gap,
                  ink);

  DocumentImage doc;
  doc.id = template_id + "-" + std::to_string(seed);
  doc.pixels = img.quantize();
  doc.provenance.template_id = template_id;
  doc.provenance.label = Label::genuine;
  doc.provenance.channel = Channel::capture;
  doc.provenance.device_class = DeviceClass::synthetic;
  doc.provenance.resolution_group = ResolutionGroup::high;
  doc.provenance.dataset_id = "synthetic";
  return doc;
}

DocumentImage simulate_capture(const DocumentImage& image, const ChannelParams& params) {
  validate(params, Channel::capture);
  Canvas img(image.pixels);
  add_noise(img, params.noise_sigma, mix_seed({params.seed, 1}));
  gaussian_blur(img, params.blur_sigma);
  apply_gamma(img, params.gamma);
  apply_color(img, params.color_matrix);
  auto out = relabel(image, img.quantize(), Label::genuine, Channel::capture, "");
  if (image.provenance.label == Label::recaptured) {
    // A recapture stays a recapture when it is photographed again.
    out.provenance.label = image.provenance.label;
    out.provenance.channel = image.provenance.channel;
  }
  return out;
}

DocumentImage simulate_print_scan_recapture(const DocumentImage& image,
                                            const ChannelParams& params) {
  validate(params, Channel::print_scan);
  Canvas img(image.pixels);
  if (params.halftone == Halftone::ordered_dither) ordered_dither(img, params.cell_size);
  else error_diffusion(img);
  gaussian_blur(img, params.blur_sigma);
  add_noise(img, params.noise_sigma, mix_seed({params.seed, 2}));
  apply_gamma(img, params.gamma);
  apply_color(img, params.color_matrix);
  return relabel(image, img.quantize(), Label::recaptured, Channel::print_scan, "");
}

DocumentImage simulate_display_capture_recapture(const DocumentImage& image,
                                                 const ChannelParams& params) {
  validate(params, Channel::display_capture);
  Canvas img(image.pixels);
  apply_color(img, params.color_matrix);
  apply_gamma(img, params.gamma);
  grid_modulation(img, *params.grid_period, params.grid_depth);
  gaussian_blur(img, params.blur_sigma);
  add_noise(img, params.noise_sigma, mix_seed({params.seed, 3}));
  return relabel(image, img.quantize(), Label::recaptured, Channel::display_capture, "");
}

void validate(const SynthSpec& spec) {
  if (spec.n_templates < 1 || spec.n_genuine_per_template < 1 || spec.n_recaptured_per_template < 1) {
    throw ConfigError("synth: template and image counts must be >= 1");
  }
  if (spec.channel_mix.print_scan < 0 || spec.channel_mix.display_capture < 0 ||
      std::abs(spec.channel_mix.print_scan + spec.channel_mix.display_capture - 1.0) > 1e-9) {
    throw ConfigError("synth.channel_mix proportions must be non-negative and sum to 1");
  }
  if (spec.height < kPatchSize || spec.width < kPatchSize) {
    throw ConfigError("synth.image_size must be at least 224x224");
  }
  if (spec.low_resolution_fraction < 0 || spec.low_resolution_fraction > 1) {
    throw ConfigError("synth.low_resolution_fraction must lie in [0, 1]");
  }
  validate(spec.capture, Channel::capture);
  validate(spec.phone_capture, Channel::capture);
  validate(spec.print_scan, Channel::print_scan);
  validate(spec.display_capture, Channel::display_capture);
}

std::uint64_t image_seed(std::uint64_t master_seed, int template_index, int image_index) {
  return mix_seed({master_seed, static_cast<std::uint64_t>(template_index),
                   static_cast<std::uint64_t>(image_index)});
}

namespace {

// Spreads round(n * f) selections evenly over indices 0..n-1.
bool evenly_selected(int index, double fraction) {
  return std::floor((index + 1) * fraction + 1e-9) > std::floor(index * fraction + 1e-9);
}

std::string two_digits(int v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

struct Job {
  int template_index;
  int image_index;  // genuine first, then recaptured
};

DocumentImage render(const SynthSpec& spec, const Job& job) {
  const int g = spec.n_genuine_per_template;
  const int r = spec.n_recaptured_per_template;
  const std::string template_id = spec.template_prefix + two_digits(job.template_index);
  const std::uint64_t seed = image_seed(spec.master_seed, job.template_index, job.image_index);
  const bool genuine = job.image_index < g;
  const int local = genuine ? job.image_index : job.image_index - g;
  const bool low = evenly_selected(local, spec.low_resolution_fraction);

  ChannelParams capture = low ? spec.phone_capture : spec.capture;
  capture.seed = mix_seed({seed, 1});
  DocumentImage doc = make_template(template_id, spec.height, spec.width, seed);
  doc.id = template_id + (genuine ? "_g" : "_r") + two_digits(local);
  doc.provenance.dataset_id = spec.dataset_id;
  doc.provenance.resolution_group = low ? ResolutionGroup::low : ResolutionGroup::high;
  doc = simulate_capture(doc, capture);

  if (!genuine) {
    const int n_print = static_cast<int>(std::llround(r * spec.channel_mix.print_scan));
    if (local < n_print) {
      ChannelParams p = spec.print_scan;
      p.seed = mix_seed({seed, 2});
      doc = simulate_print_scan_recapture(doc, p);
      doc.id += "_ps";
    } else {
      ChannelParams p = spec.display_capture;
      p.seed = mix_seed({seed, 3});
      doc = simulate_display_capture_recapture(doc, p);
      doc.id += "_dc";
    }
  }
  return doc;
}

}  // namespace

std::vector<DocumentImage> synthesize_corpus(const SynthSpec& spec) {
  validate(spec);
  std::vector<Job> jobs;
  const int per = spec.n_genuine_per_template + spec.n_recaptured_per_template;
  for (int t = 0; t < spec.n_templates; ++t)
    for (int i = 0; i < per; ++i) jobs.push_back({t, i});
  std::vector<DocumentImage> images(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < jobs.size(); ++k) images[k] = render(spec, jobs[k]);
  return images;
}

Manifest generate_corpus(const SynthSpec& spec, const fs::path& out_dir) {
  auto images = synthesize_corpus(spec);
  std::error_code ec;
  fs::create_directories(out_dir / "images", ec);
  if (ec) throw IoError("cannot create '" + (out_dir / "images").string() + "': " + ec.message());
  Manifest manifest;
  manifest.base_dir = out_dir;
  for (const auto& img : images) {
    const std::string rel = "images/" + img.id + ".png";
    write_png(out_dir / rel, img.pixels);
    manifest.rows.push_back({rel, img.id, img.provenance});
  }
  save_manifest(manifest, out_dir / "manifest.jsonl");
  return manifest;
}

}  // namespace recap
