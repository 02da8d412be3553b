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
#include "recap/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "recap/error.hpp"
#include "recap/image_io.hpp"
#include "recap/rng.hpp"

namespace recap {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 8> kManifestFields{
    "path", "id", "template_id", "label", "channel", "device_class", "resolution_group",
    "dataset_id"};

std::string row_context(std::size_t line) { return "manifest line " + std::to_string(line) + ": "; }

ManifestRow parse_row(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) throw DataError(row_context(line) + "record is not a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(kManifestFields.begin(), kManifestFields.end(), key) == kManifestFields.end()) {
      throw DataError(row_context(line) + "unknown field '" + key + "'");
    }
  }
  auto field = [&](std::string_view name) -> std::string {
    auto it = j.find(std::string(name));
    if (it == j.end()) throw DataError(row_context(line) + "missing field '" + std::string(name) + "'");
    if (!it->is_string()) {
      throw DataError(row_context(line) + "field '" + std::string(name) + "' must be a string");
    }
    return it->get<std::string>();
  };
  ManifestRow row;
  row.path = field("path");
  row.id = field("id");
  try {
    row.provenance.template_id = field("template_id");
    row.provenance.label = parse_label(field("label"));
    row.provenance.channel = parse_channel(field("channel"));
    row.provenance.device_class = parse_device_class(field("device_class"));
    row.provenance.resolution_group = parse_resolution_group(field("resolution_group"));
    row.provenance.dataset_id = field("dataset_id");
  } catch (const DataError& e) {
    std::string what = e.what();
    if (what.rfind("manifest line", 0) == 0) throw;
    throw DataError(row_context(line) + what);
  }
  return row;
}

void validate_row(const Manifest& manifest, const ManifestRow& row, std::size_t line) {
  const auto& p = row.provenance;
  if (row.id.empty()) throw DataError(row_context(line) + "empty id");
  if (p.template_id.empty()) throw DataError(row_context(line) + "empty template_id");
  if (p.label == Label::genuine && p.channel != Channel::capture) {
    throw DataError(row_context(line) + "genuine row '" + row.id + "' must use channel capture");
  }
  if (p.label == Label::recaptured && p.channel == Channel::capture) {
    throw DataError(row_context(line) + "recaptured row '" + row.id +
                    "' needs a recapture channel");
  }
  if (p.device_class == DeviceClass::scanner && p.resolution_group != ResolutionGroup::high) {
    throw DataError(row_context(line) + "scanner row '" + row.id + "' must be in group high");
  }
  if (p.device_class == DeviceClass::phone && p.resolution_group != ResolutionGroup::low) {
    throw DataError(row_context(line) + "phone row '" + row.id + "' must be in group low");
  }
  const auto resolved = manifest.resolve(row);
  if (!fs::is_regular_file(resolved)) {
    throw DataError(row_context(line) + "image path '" + row.path + "' of '" + row.id +
                    "' does not resolve (" + resolved.string() + ")");
  }
}

void validate_rows(const Manifest& manifest, const std::vector<std::size_t>& lines) {
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    const auto& row = manifest.rows[i];
    const std::size_t line = lines.empty() ? i + 1 : lines[i];
    auto [it, inserted] = seen.emplace(row.id, line);
    if (!inserted) {
      throw DataError("duplicate id '" + row.id + "' on manifest lines " +
                      std::to_string(it->second) + " and " + std::to_string(line));
    }
    validate_row(manifest, row, line);
  }
}

}  // namespace

fs::path Manifest::resolve(const ManifestRow& row) const {
  fs::path p(row.path);
  return p.is_absolute() ? p : base_dir / p;
}

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("manifest '" + path.string() + "' not found or unreadable");
  Manifest manifest;
  manifest.base_dir = path.parent_path();
  std::vector<std::size_t> lines;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(row_context(line) + "invalid JSON (" + e.what() + ")");
    }
    manifest.rows.push_back(parse_row(j, line));
    lines.push_back(line);
  }
  validate_rows(manifest, lines);
  return manifest;
}

void save_manifest(const Manifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  for (const auto& row : manifest.rows) {
    nlohmann::ordered_json j;
    j["path"] = row.path;
    j["id"] = row.id;
    j["template_id"] = row.provenance.template_id;
    j["label"] = to_string(row.provenance.label);
    j["channel"] = to_string(row.provenance.channel);
    j["device_class"] = to_string(row.provenance.device_class);
    j["resolution_group"] = to_string(row.provenance.resolution_group);
    j["dataset_id"] = row.provenance.dataset_id;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing manifest '" + path.string() + "'");
}

void validate(const Manifest& manifest) { validate_rows(manifest, {}); }

DocumentImage load_image(const Manifest& manifest, const ManifestRow& row) {
  DocumentImage image;
  image.id = row.id;
  image.pixels = read_image(manifest.resolve(row));
  image.provenance = row.provenance;
  validate(image);
  return image;
}

namespace {

std::string stratum_key(const ManifestRow& row, const std::vector<std::string>& fields) {
  std::string key;
  for (const auto& f : fields) {
    const auto& p = row.provenance;
    std::string_view v;
    if (f == "template_id") v = p.template_id;
    else if (f == "label") v = to_string(p.label);
    else if (f == "channel") v = to_string(p.channel);
    else if (f == "device_class") v = to_string(p.device_class);
    else if (f == "resolution_group") v = to_string(p.resolution_group);
    else if (f == "dataset_id") v = p.dataset_id;
    else throw ConfigError("split.stratify_by: unknown field '" + f + "'");
    key.append(v);
    key.push_back('\x1f');
  }
  return key;
}

}  // namespace

CorpusSplit split_corpus(const Manifest& manifest, const SplitSpec& spec) {
  if (manifest.rows.empty()) throw DataError("cannot split an empty manifest");
  double total = 0.0;
  for (double r : spec.ratios) {
    if (!(r >= 0.0)) throw ConfigError("split.ratios must be non-negative");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split.ratios must sum to 1");

  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    strata[stratum_key(manifest.rows[i], spec.stratify_by)].push_back(i);
  }

  std::array<double, 3> quota{};     // running exact share, strata seen so far
  std::array<std::size_t, 3> given{};
  std::vector<int> assignment(manifest.rows.size(), 0);
  constexpr double kTie = 1e-12;

  for (auto& [key, members] : strata) {
    const std::size_t n = members.size();
    std::array<std::size_t, 3> count{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (int s = 0; s < 3; ++s) {
      const double exact = static_cast<double>(n) * spec.ratios[s];
      count[s] = static_cast<std::size_t>(std::floor(exact + kTie));
      remainder[s] = exact - static_cast<double>(count[s]);
      assigned += count[s];
    }
    std::array<int, 3> order{0, 1, 2};
    std::array<double, 3> deficit{};
    for (int s = 0; s < 3; ++s) deficit[s] = quota[s] - static_cast<double>(given[s]);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      if (std::abs(remainder[a] - remainder[b]) > kTie) return remainder[a] > remainder[b];
      if (std::abs(deficit[a] - deficit[b]) > kTie) return deficit[a] > deficit[b];
      return a < b;
    });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++count[order[k % 3]];

    std::mt19937_64 rng(mix_seed({spec.seed, hash_string(key)}));
    std::vector<std::size_t> shuffled = members;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s) {
      for (std::size_t k = 0; k < count[s]; ++k) assignment[shuffled[pos++]] = s;
      quota[s] += static_cast<double>(n) * spec.ratios[s];
      given[s] += count[s];
    }
  }

  CorpusSplit out;
  std::array<Manifest*, 3> parts{&out.train, &out.val, &out.test};
  for (auto* m : parts) m->base_dir = manifest.base_dir;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    parts[assignment[i]]->rows.push_back(manifest.rows[i]);
  }
  return out;
}

int window_count(int extent, int stride) {
  if (stride <= 0) throw ConfigError("patch stride must be positive");
  if (extent < kPatchSize) return 0;
  const int span = extent - kPatchSize;
  return (span + stride - 1) / stride + 1;
}

std::vector<Patch> extract_patches(const DocumentImage& image, int stride) {
  const int rows = window_count(image.pixels.height, stride);
  const int cols = window_count(image.pixels.width, stride);
  std::vector<Patch> patches;
  patches.reserve(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {
    const int r = std::min(i * stride, image.pixels.height - kPatchSize);
    for (int j = 0; j < cols; ++j) {
      const int c = std::min(j * stride, image.pixels.width - kPatchSize);
      Patch p;
      p.source_id = image.id;
      p.row = r;
      p.col = c;
      p.pixels = crop(image.pixels, r, c, kPatchSize, kPatchSize);
      p.provenance = image.provenance;
      patches.push_back(std::move(p));
    }
  }
  return patches;
}

PatchStatistics patch_statistics(const Image& pixels, double gradient_min) {
  const auto gray = grayscale(pixels);
  const int h = pixels.height;
  const int w = pixels.width;
  PatchStatistics stats;
  if (gray.empty()) return stats;
  double mean = 0.0;
  for (double v : gray) mean += v;
  mean /= static_cast<double>(gray.size());
  double var = 0.0;
  for (double v : gray) var += (v - mean) * (v - mean);
  stats.gray_std = std::sqrt(var / static_cast<double>(gray.size()));
  if (h < 2 || w < 2) return stats;
  std::size_t edges = 0;
  const double threshold_sq = gradient_min * gradient_min;
  for (int r = 0; r + 1 < h; ++r) {
    for (int c = 0; c + 1 < w; ++c) {
      const double v = gray[static_cast<std::size_t>(r) * w + c];
      const double gx = gray[static_cast<std::size_t>(r) * w + c + 1] - v;
      const double gy = gray[static_cast<std::size_t>(r + 1) * w + c] - v;
      if (gx * gx + gy * gy > threshold_sq) ++edges;
    }
  }
  stats.edge_fraction = static_cast<double>(edges) / (static_cast<double>(h - 1) * (w - 1));
  return stats;
}

bool is_discriminative(const Image& pixels, const PatchFilterConfig& filter) {
  const auto stats = patch_statistics(pixels, filter.gradient_min);
  return stats.gray_std >= filter.min_std && stats.edge_fraction >= filter.min_edge_fraction;
}

bool is_discriminative(const Patch& patch, const PatchFilterConfig& filter) {
  return is_discriminative(patch.pixels, filter);
}

}  // namespace recap
