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

#include <filesystem>

#include "recap/image.hpp"

namespace recap {

/// Reads PNG or JPEG (chosen by file signature). Grayscale and alpha inputs
/// are converted to RGB. Throws IoError.
Image read_image(const std::filesystem::path& path);

/// Writes a lossless PNG with fixed compression settings and no timestamp
/// chunk, so identical rasters produce identical files.
void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace recap
