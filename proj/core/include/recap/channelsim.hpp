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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "recap/corpus.hpp"
#include "recap/image.hpp"

namespace recap {

enum class Halftone { none, ordered_dither, error_diffusion };

std::string_view to_string(Halftone v) noexcept;
Halftone parse_halftone(std::string_view s);

using ColorMatrix = std::array<std::array<double, 3>, 3>;

inline constexpr ColorMatrix kIdentityColor{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

/// Minimum Frobenius distance from identity required of a display channel's
/// color matrix.
inline constexpr double kMinDisplayColorDeviation = 0.05;

struct ChannelParams {
  Halftone halftone = Halftone::none;
  int cell_size = 4;  // Bayer order for ordered dithering (2, 4 or 8)
  double blur_sigma = 0.0;
  double noise_sigma = 0.0;
  ColorMatrix color_matrix = kIdentityColor;
  std::array<double, 3> gamma{1.0, 1.0, 1.0};
  std::optional<int> grid_period;
  double grid_depth = 0.15;  // luminance loss on grid lines
  std::uint64_t seed = 0;
};

/// Throws ConfigError when the parameters are invalid for the channel.
void validate(const ChannelParams& params, Channel channel);

ChannelParams default_capture_params();        // scanner-like first capture
ChannelParams default_phone_capture_params();  // low-resolution first capture
ChannelParams default_print_scan_params();
ChannelParams default_display_capture_params();

/// ID-card-like raster. Layout and color scheme derive from template_id;
/// variable content (glyph rows, photo texture) from seed.
DocumentImage make_template(const std::string& template_id, int height, int width,
                            std::uint64_t seed);

DocumentImage simulate_capture(const DocumentImage& image, const ChannelParams& params);
DocumentImage simulate_print_scan_recapture(const DocumentImage& image,
                                            const ChannelParams& params);
DocumentImage simulate_display_capture_recapture(const DocumentImage& image,
                                                 const ChannelParams& params);

struct ChannelMix {
  double print_scan = 0.5;
  double display_capture = 0.5;
};

struct SynthSpec {
  int n_templates = 2;
  int n_genuine_per_template = 3;
  int n_recaptured_per_template = 6;
  ChannelMix channel_mix;
  int height = 256;
  int width = 384;
  std::uint64_t master_seed = 0;
  std::string template_prefix = "T";
  std::string dataset_id = "S1";
  /// Share of each template's genuine and recaptured images produced by the
  /// low-resolution (phone-like) capture path.
  double low_resolution_fraction = 0.0;
  ChannelParams capture = default_capture_params();
  ChannelParams phone_capture = default_phone_capture_params();
  ChannelParams print_scan = default_print_scan_params();
  ChannelParams display_capture = default_display_capture_params();
};

void validate(const SynthSpec& spec);

/// Seed of image \p image_index of template \p template_index.
std::uint64_t image_seed(std::uint64_t master_seed, int template_index, int image_index);

/// Renders every image of the spec in memory, in manifest order.
std::vector<DocumentImage> synthesize_corpus(const SynthSpec& spec);

/// Writes images/<id>.png and manifest.jsonl under out_dir.
Manifest generate_corpus(const SynthSpec& spec, const std::filesystem::path& out_dir);

}  // namespace recap
