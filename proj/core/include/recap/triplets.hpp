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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "recap/corpus.hpp"
#include "recap/image.hpp"

namespace recap {

struct ForensicModel;

/// Discriminative patches of a set of images, addressable by index.
class PatchStore {
 public:
  PatchStore() = default;
  PatchStore(std::span<const DocumentImage> images, int stride, const PatchFilterConfig& filter);

  /// Adds more images, possibly at another stride. Ids must stay unique.
  void append(std::span<const DocumentImage> images, int stride, const PatchFilterConfig& filter);

  std::size_t size() const noexcept { return patches_.size(); }
  const Patch& operator[](std::size_t i) const { return patches_[i]; }
  std::span<const Patch> patches() const noexcept { return patches_; }

  /// Indices of the kept patches of one image, origin-sorted.
  std::span<const std::size_t> patches_of(const std::string& image_id) const;
  std::optional<std::size_t> find(const std::string& image_id, int row, int col) const;

  /// Images that had windows but no discriminative patch.
  const std::vector<std::string>& empty_images() const noexcept { return empty_images_; }

 private:
  std::vector<Patch> patches_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_image_;
  std::vector<std::string> empty_images_;
};

/// Indices into a PatchStore.
struct Triplet {
  std::size_t reference = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;

  bool operator==(const Triplet&) const = default;
};

/// Throws DataError if the triplet breaks a content/label/resolution rule.
void validate(const Triplet& triplet, const PatchStore& store, bool allow_same_source = false);

struct CandidateSet {
  std::vector<Triplet> triplets;
  std::string reason;  // non-empty exactly when triplets is empty
};

/// Same-template, same-resolution-group triplets whose three patches share an
/// origin. References come from high-quality genuine images of the group
/// (high resolution group or scanner) when any exist, else from any genuine
/// image. Positives are genuine images other than the reference; a template
/// with a single genuine image pairs it with itself. When \p reference_pool is
/// given, references are drawn from it instead of \p split.
CandidateSet build_candidate_triplets(const Manifest& split, const PatchStore& store,
                                      const Manifest* reference_pool = nullptr);

enum class MiningMode { semi_hard, random, all };

std::string_view to_string(MiningMode m) noexcept;
MiningMode parse_mining_mode(std::string_view s);

struct MiningConfig {
  double gamma = 0.2;
  MiningMode mode = MiningMode::semi_hard;
  int max_per_anchor = 4;
  std::size_t max_total = 0;  // 0 = no global cap
  std::string scope = "full_set";

  bool operator==(const MiningConfig&) const = default;
};

void validate(const MiningConfig& config);

struct TripletScores {
  double positive = 0.0;  // S(reference, positive)
  double negative = 0.0;  // S(reference, negative)
};

/// Candidate indices kept by the miner, ascending.
///  semi_hard: S_n < S_p and positive hinge operand; at most max_per_anchor
///             per (reference, positive) patch pair, largest operand first,
///             ties to the lower candidate index. max_total then keeps the
///             largest operands overall.
///  random:    uniform subsample of min(n, max_total) (all when max_total=0).
///  all:       every candidate.
std::vector<std::size_t> mine_indices(std::span<const Triplet> candidates,
                                      std::span<const TripletScores> scores,
                                      const MiningConfig& config, std::uint64_t seed);

std::vector<Triplet> mine_semi_hard(std::span<const Triplet> candidates,
                                    std::span<const TripletScores> scores,
                                    const MiningConfig& config, std::uint64_t seed = 0);

/// Scores every candidate with the model (snapshot; no gradients) and mines.
std::vector<Triplet> mine_semi_hard(std::span<const Triplet> candidates,
                                    const PatchStore& store, const ForensicModel& model,
                                    const MiningConfig& config, std::uint64_t seed = 0);

/// JSON-lines audit record per triplet: {"reference":{"id","row","col"},...}.
void export_triplets(std::span<const Triplet> triplets, const PatchStore& store,
                     const std::filesystem::path& path);

}  // namespace recap
