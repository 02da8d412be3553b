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
#include "recap/triplets.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include "recap/error.hpp"
#include "recap/loss.hpp"
#include "recap/model.hpp"
#include "recap/rng.hpp"
#include "recap/trainer.hpp"

namespace recap {

PatchStore::PatchStore(std::span<const DocumentImage> images, int stride, const PatchFilterConfig& filter) {
  append(images, stride, filter);
}

void PatchStore::append(std::span<const DocumentImage> images, int stride, const PatchFilterConfig& filter) {
  for (const auto& image : images) {
    if (by_image_.count(image.id) != 0) throw DataError("duplicate image id '" + image.id + "' in patch store");
    auto& owned = by_image_[image.id];
    auto windows = extract_patches(image, stride);
    const bool had_windows = !windows.empty();
    for (auto& p : windows) {
      if (!is_discriminative(p, filter)) continue;
      owned.push_back(patches_.size());
      patches_.push_back(std::move(p));
    }
    if (had_windows && owned.empty()) empty_images_.push_back(image.id);
  }
}

std::span<const std::size_t> PatchStore::patches_of(const std::string& image_id) const {
  auto it = by_image_.find(image_id);
  if (it == by_image_.end()) return {};
  return it->second;
}

std::optional<std::size_t> PatchStore::find(const std::string& image_id, int row, int col) const {
  for (std::size_t i : patches_of(image_id)) {
    if (patches_[i].row == row && patches_[i].col == col) return i;
  }
  return std::nullopt;
}

void validate(const Triplet& t, const PatchStore& store, bool allow_same_source) {
  if (t.reference >= store.size() || t.positive >= store.size() || t.negative >= store.size()) {
    throw DataError("triplet refers to a patch outside the store");
  }
  const auto& r = store[t.reference];
  const auto& p = store[t.positive];
  const auto& n = store[t.negative];
  const auto describe = [&] { return " in triplet (" + r.source_id + ", " + p.source_id + ", " + n.source_id + ")"; };
  if (r.provenance.template_id != p.provenance.template_id ||
      r.provenance.template_id != n.provenance.template_id) {
    throw DataError("template mismatch" + describe());
  }
  if (r.provenance.resolution_group != p.provenance.resolution_group ||
      r.provenance.resolution_group != n.provenance.resolution_group) {
    throw DataError("resolution group mismatch" + describe());
  }
  if (r.provenance.label != Label::genuine || p.provenance.label != Label::genuine) {
    throw DataError("reference and positive must be genuine" + describe());
  }
  if (n.provenance.label != Label::recaptured) throw DataError("negative must be recaptured" + describe());
  if (!allow_same_source && r.source_id == p.source_id) {
    throw DataError("reference and positive share a source image" + describe());
  }
}

namespace {

bool high_quality(const Provenance& p) {
  return p.resolution_group == ResolutionGroup::high || p.device_class == DeviceClass::scanner;
}

using GroupKey = std::pair<std::string, ResolutionGroup>;

struct GroupRows {
  std::vector<const ManifestRow*> references;
  std::vector<const ManifestRow*> positives;
  std::vector<const ManifestRow*> negatives;
};

bool by_id(const ManifestRow* a, const ManifestRow* b) { return a->id < b->id; }

}  // namespace

CandidateSet build_candidate_triplets(const Manifest& split, const PatchStore& store,
                                      const Manifest* reference_pool) {
  std::map<GroupKey, GroupRows> groups;
  std::map<std::string, std::set<std::string>> genuine_per_template;
  for (const auto& row : split.rows) {
    const GroupKey key{row.provenance.template_id, row.provenance.resolution_group};
    if (row.provenance.label == Label::genuine) {
      groups[key].positives.push_back(&row);
      genuine_per_template[key.first].insert(row.id);
    } else {
      groups[key].negatives.push_back(&row);
    }
  }
  const Manifest& pool = reference_pool ? *reference_pool : split;
  std::map<GroupKey, std::vector<const ManifestRow*>> pool_genuine;
  for (const auto& row : pool.rows) {
    if (row.provenance.label != Label::genuine) continue;
    pool_genuine[{row.provenance.template_id, row.provenance.resolution_group}].push_back(&row);
    genuine_per_template[row.provenance.template_id].insert(row.id);
  }

  CandidateSet out;
  bool any_negatives = false;
  bool any_positives = false;
  for (auto& [key, rows] : groups) {
    auto it = pool_genuine.find(key);
    if (it == pool_genuine.end()) continue;
    for (const auto* row : it->second) {
      if (high_quality(row->provenance)) rows.references.push_back(row);
    }
    if (rows.references.empty()) rows.references = it->second;
    std::sort(rows.references.begin(), rows.references.end(), by_id);
    std::sort(rows.positives.begin(), rows.positives.end(), by_id);
    std::sort(rows.negatives.begin(), rows.negatives.end(), by_id);
    any_negatives = any_negatives || !rows.negatives.empty();
    any_positives = any_positives || !rows.positives.empty();
    if (rows.negatives.empty() || rows.positives.empty()) continue;

    const bool single_genuine = genuine_per_template[key.first].size() == 1;
    std::set<std::pair<int, int>> origins;
    for (const auto* row : rows.references) {
      for (std::size_t i : store.patches_of(row->id)) origins.insert({store[i].row, store[i].col});
    }
    for (const auto& [r0, c0] : origins) {
      for (const auto* ref : rows.references) {
        const auto ri = store.find(ref->id, r0, c0);
        if (!ri) continue;
        for (const auto* pos : rows.positives) {
          if (pos->id == ref->id && !single_genuine) continue;
          const auto pi = store.find(pos->id, r0, c0);
          if (!pi) continue;
          for (const auto* neg : rows.negatives) {
            const auto ni = store.find(neg->id, r0, c0);
            if (!ni) continue;
            out.triplets.push_back({*ri, *pi, *ni});
          }
        }
      }
    }
  }
  if (out.triplets.empty()) {
    if (groups.empty()) out.reason = "split is empty";
    else if (!any_negatives) out.reason = "no template has a recaptured image";
    else if (!any_positives) out.reason = "no template has a genuine image";
    else out.reason = "no template and resolution group has a reference, a positive and a negative "
                      "sharing a discriminative patch position";
  }
  return out;
}

std::string_view to_string(MiningMode m) noexcept {
  switch (m) {
    case MiningMode::semi_hard: return "semi_hard";
    case MiningMode::random: return "random";
    case MiningMode::all: return "all";
  }
  return "semi_hard";
}

MiningMode parse_mining_mode(std::string_view s) {
  if (s == "semi_hard") return MiningMode::semi_hard;
  if (s == "random") return MiningMode::random;
  if (s == "all") return MiningMode::all;
  throw ConfigError("unknown mining mode '" + std::string(s) + "'");
}

void validate(const MiningConfig& config) {
  if (!(config.gamma > 0.0)) throw ConfigError("mining.gamma must be > 0");
  if (config.max_per_anchor < 1) throw ConfigError("mining.max_per_anchor must be >= 1");
  if (config.scope != "full_set") {
    throw ConfigError("mining.scope: only 'full_set' is supported, got '" + config.scope + "'");
  }
}

std::vector<std::size_t> mine_indices(std::span<const Triplet> candidates,
                                      std::span<const TripletScores> scores, const MiningConfig& config,
                                      std::uint64_t seed) {
  validate(config);
  std::vector<std::size_t> all(candidates.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (config.mode == MiningMode::all) return all;
  if (config.mode == MiningMode::random) {
    const std::size_t cap = config.max_total == 0 ? all.size() : std::min(all.size(), config.max_total);
    std::mt19937_64 rng(seed);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(cap);
    std::sort(all.begin(), all.end());
    return all;
  }

  if (scores.size() != candidates.size()) {
    throw DataError("mining needs one score pair per candidate (" + std::to_string(candidates.size()) +
                    " candidates, " + std::to_string(scores.size()) + " scores)");
  }
  std::vector<double> hinge(candidates.size());
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> by_anchor;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& s = scores[i];
    hinge[i] = hinge_argument(s.positive, s.negative, config.gamma);
    if (s.negative < s.positive && hinge[i] > 0.0) {
      by_anchor[{candidates[i].reference, candidates[i].positive}].push_back(i);
    }
  }
  const auto harder = [&](std::size_t a, std::size_t b) {
    return hinge[a] != hinge[b] ? hinge[a] > hinge[b] : a < b;
  };
  std::vector<std::size_t> kept;
  for (auto& [anchor, idx] : by_anchor) {
    std::sort(idx.begin(), idx.end(), harder);
    if (idx.size() > static_cast<std::size_t>(config.max_per_anchor)) idx.resize(config.max_per_anchor);
    kept.insert(kept.end(), idx.begin(), idx.end());
  }
  if (config.max_total != 0 && kept.size() > config.max_total) {
    std::sort(kept.begin(), kept.end(), harder);
    kept.resize(config.max_total);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<Triplet> mine_semi_hard(std::span<const Triplet> candidates, std::span<const TripletScores> scores,
                                    const MiningConfig& config, std::uint64_t seed) {
  std::vector<Triplet> out;
  for (std::size_t i : mine_indices(candidates, scores, config, seed)) out.push_back(candidates[i]);
  return out;
}

std::vector<Triplet> mine_semi_hard(std::span<const Triplet> candidates, const PatchStore& store,
                                    const ForensicModel& model, const MiningConfig& config,
                                    std::uint64_t seed) {
  if (config.mode != MiningMode::semi_hard) return mine_semi_hard(candidates, {}, config, seed);
  const auto scores = score_triplets(model, store, candidates);
  return mine_semi_hard(candidates, scores, config, seed);
}

void export_triplets(std::span<const Triplet> triplets, const PatchStore& store,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write triplet list '" + path.string() + "'");
  const auto ref = [&](std::size_t i) {
    const auto& p = store[i];
    return nlohmann::json{{"id", p.source_id}, {"row", p.row}, {"col", p.col}};
  };
  for (const auto& t : triplets) {
    out << nlohmann::json{{"reference", ref(t.reference)}, {"positive", ref(t.positive)},
                          {"negative", ref(t.negative)}}
               .dump()
        << '\n';
  }
  if (!out) throw IoError("failed writing triplet list '" + path.string() + "'");
}

}  // namespace recap
