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

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace recap {

inline constexpr int kPatchSize = 224;
inline constexpr int kChannels = 3;

/// 8-bit RGB raster, row-major, interleaved channels.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w),
        pixels(static_cast<std::size_t>(h) * w * kChannels, fill) {}

  std::size_t index(int row, int col, int ch) const noexcept {
    return (static_cast<std::size_t>(row) * width + col) * kChannels + ch;
  }
  std::uint8_t& at(int row, int col, int ch) noexcept { return pixels[index(row, col, ch)]; }
  std::uint8_t at(int row, int col, int ch) const noexcept { return pixels[index(row, col, ch)]; }

  bool operator==(const Image&) const = default;
};

/// Crops a window; the window must lie inside the image.
Image crop(const Image& image, int row, int col, int height, int width);

/// ITU-R BT.601 luma, one value per pixel on the 0-255 scale.
std::vector<double> grayscale(const Image& image);

enum class Label { genuine, recaptured };
enum class Channel { capture, print_scan, display_capture };
enum class DeviceClass { scanner, phone, synthetic };
enum class ResolutionGroup { low, high };

std::string_view to_string(Label v) noexcept;
std::string_view to_string(Channel v) noexcept;
std::string_view to_string(DeviceClass v) noexcept;
std::string_view to_string(ResolutionGroup v) noexcept;

// Parsers throw DataError on unknown values.
Label parse_label(std::string_view s);
Channel parse_channel(std::string_view s);
DeviceClass parse_device_class(std::string_view s);
ResolutionGroup parse_resolution_group(std::string_view s);

/// Provenance shared by a document image and every patch cut from it.
struct Provenance {
  std::string template_id;
  Label label = Label::genuine;
  Channel channel = Channel::capture;
  DeviceClass device_class = DeviceClass::synthetic;
  ResolutionGroup resolution_group = ResolutionGroup::high;
  std::string dataset_id;

  bool operator==(const Provenance&) const = default;
};

struct DocumentImage {
  std::string id;
  Image pixels;
  Provenance provenance;
};

/// Throws DataError when the image breaks a DocumentImage invariant
/// (minimum size, genuine implies capture, device/resolution grouping).
void validate(const DocumentImage& image);

struct Patch {
  std::string source_id;
  int row = 0;
  int col = 0;
  Image pixels;
  Provenance provenance;
};

}  // namespace recap
