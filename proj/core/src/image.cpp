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
#include "recap/image.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <string>

#include "recap/error.hpp"

namespace recap {

Image crop(const Image& image, int row, int col, int height, int width) {
  if (row < 0 || col < 0 || row + height > image.height || col + width > image.width) {
    throw DataError("crop window (" + std::to_string(row) + "," + std::to_string(col) + ") " +
                    std::to_string(height) + "x" + std::to_string(width) +
                    " outside image " + std::to_string(image.height) + "x" +
                    std::to_string(image.width));
  }
  Image out(height, width);
  const std::size_t line = static_cast<std::size_t>(width) * kChannels;
  for (int r = 0; r < height; ++r) {
    std::memcpy(&out.pixels[out.index(r, 0, 0)], &image.pixels[image.index(row + r, col, 0)],
                line);
  }
  return out;
}

std::vector<double> grayscale(const Image& image) {
  std::vector<double> gray(static_cast<std::size_t>(image.height) * image.width);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const auto* px = &image.pixels[i * kChannels];
    gray[i] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
  }
  return gray;
}

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::string_view, N>& names, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  throw DataError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

constexpr std::array<std::string_view, 2> kLabels{"genuine", "recaptured"};
constexpr std::array<std::string_view, 3> kChannelNames{"capture", "print_scan", "display_capture"};
constexpr std::array<std::string_view, 3> kDevices{"scanner", "phone", "synthetic"};
constexpr std::array<std::string_view, 2> kGroups{"low", "high"};

}  // namespace

std::string_view to_string(Label v) noexcept { return kLabels[static_cast<int>(v)]; }
std::string_view to_string(Channel v) noexcept { return kChannelNames[static_cast<int>(v)]; }
std::string_view to_string(DeviceClass v) noexcept { return kDevices[static_cast<int>(v)]; }
std::string_view to_string(ResolutionGroup v) noexcept { return kGroups[static_cast<int>(v)]; }

Label parse_label(std::string_view s) { return parse_enum<Label>(s, kLabels, "label"); }
Channel parse_channel(std::string_view s) { return parse_enum<Channel>(s, kChannelNames, "channel"); }
DeviceClass parse_device_class(std::string_view s) {
  return parse_enum<DeviceClass>(s, kDevices, "device_class");
}
ResolutionGroup parse_resolution_group(std::string_view s) {
  return parse_enum<ResolutionGroup>(s, kGroups, "resolution_group");
}

void validate(const DocumentImage& image) {
  const auto& p = image.provenance;
  if (image.pixels.height < kPatchSize || image.pixels.width < kPatchSize) {
    throw DataError("image '" + image.id + "' is " + std::to_string(image.pixels.height) + "x" +
                    std::to_string(image.pixels.width) + "; both sides must be >= 224");
  }
  if (image.pixels.pixels.size() !=
      static_cast<std::size_t>(image.pixels.height) * image.pixels.width * kChannels) {
    throw DataError("image '" + image.id + "' has an inconsistent pixel buffer");
  }
  if (p.label == Label::genuine && p.channel != Channel::capture) {
    throw DataError("image '" + image.id + "' is genuine but its channel is " +
                    std::string(to_string(p.channel)));
  }
  if (p.device_class == DeviceClass::scanner && p.resolution_group != ResolutionGroup::high) {
    throw DataError("image '" + image.id + "': scanner images belong to the high group");
  }
  if (p.device_class == DeviceClass::phone && p.resolution_group != ResolutionGroup::low) {
    throw DataError("image '" + image.id + "': phone images belong to the low group");
  }
}

}  // namespace recap
