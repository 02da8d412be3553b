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
#include <string>
#include <vector>

#include "recap/image.hpp"

namespace recap {

struct ManifestRow {
  std::string path;  // relative to Manifest::base_dir unless absolute
  std::string id;
  Provenance provenance;

  bool operator==(const ManifestRow&) const = default;
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestRow> rows;

  std::filesystem::path resolve(const ManifestRow& row) const;
};

/// Parses a JSON-lines manifest. Every record must carry exactly the fields
/// path, id, template_id, label, channel, device_class, resolution_group and
/// dataset_id. Errors name the 1-based line number.
Manifest load_manifest(const std::filesystem::path& path);

/// Writes rows back out in the same JSON-lines schema.
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Checks row-level invariants (ids unique, enums consistent, paths exist).
void validate(const Manifest& manifest);

DocumentImage load_image(const Manifest& manifest, const ManifestRow& row);

struct SplitSpec {
  std::array<double, 3> ratios{0.8, 0.1, 0.1};  // train, val, test
  std::uint64_t seed = 0;
  std::vector<std::string> stratify_by{"template_id", "label"};
};

struct CorpusSplit {
  Manifest train;
  Manifest val;
  Manifest test;
};

/// Stratified, seeded partition. Within each stratum the split sizes follow
/// largest-remainder rounding; equal remainders go to the split that is
/// furthest behind its running quota across the strata already processed
/// (strata visited in key order), then to the earlier split. Rows keep their
/// manifest order inside each output.
CorpusSplit split_corpus(const Manifest& manifest, const SplitSpec& spec);

struct PatchFilterConfig {
  double min_std = 8.0;         // grayscale standard deviation, 0-255 scale
  double min_edge_fraction = 0.02;
  double gradient_min = 16.0;   // forward-difference gradient magnitude
};

/// Number of clamped sliding-window positions along one axis.
int window_count(int extent, int stride);

/// Sliding 224x224 windows in row-major order; the last window on each axis
/// is clamped to the image boundary.
std::vector<Patch> extract_patches(const DocumentImage& image, int stride);

struct PatchStatistics {
  double gray_std = 0.0;
  double edge_fraction = 0.0;
};

PatchStatistics patch_statistics(const Image& pixels, double gradient_min);

bool is_discriminative(const Patch& patch, const PatchFilterConfig& filter);
bool is_discriminative(const Image& pixels, const PatchFilterConfig& filter);

}  // namespace recap
