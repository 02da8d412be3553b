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
#include "recap/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "recap/error.hpp"
#include "recap/rng.hpp"
#include "recap/serialization.hpp"
#include "recap/triplets.hpp"

namespace recap {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Protocol p) noexcept {
  switch (p) {
    case Protocol::intra: return "intra";
    case Protocol::cross: return "cross";
    case Protocol::fine_tune_transfer: return "fine_tune_transfer";
  }
  return "intra";
}

Protocol parse_protocol(std::string_view s) {
  if (s == "intra") return Protocol::intra;
  if (s == "cross") return Protocol::cross;
  if (s == "fine_tune_transfer") return Protocol::fine_tune_transfer;
  throw ConfigError("protocol: unknown protocol '" + std::string(s) + "'");
}

TransferConfig default_transfer_config() {
  TransferConfig t;
  t.target.n_templates = 2;
  t.target.n_genuine_per_template = 14;
  t.target.n_recaptured_per_template = 10;
  t.target.low_resolution_fraction = 0.5;
  t.target.template_prefix = "U";
  t.target.dataset_id = "S3";
  // Shifted acquisition: a different scanner and phone.
  t.target.capture.blur_sigma = 0.8;
  t.target.capture.noise_sigma = 14.0;
  t.target.capture.gamma = {0.9, 0.9, 0.9};
  t.target.phone_capture.blur_sigma = 1.5;
  t.target.phone_capture.noise_sigma = 16.0;
  t.target.phone_capture.gamma = {1.1, 1.0, 0.9};
  t.finetune.epochs = 10;
  t.finetune.batch_size = 32;
  t.finetune.learning_rate = 1e-4;
  return t;
}

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

template <typename T>
void read_number(const json& j, std::string_view key, T& out, const std::string& path) {
  auto it = j.find(std::string(key));
  if (it == j.end()) return;
  const bool ok = std::is_integral_v<T> ? it->is_number_integer() : it->is_number();
  if (!ok || (std::is_unsigned_v<T> && it->is_number_integer() && !it->is_number_unsigned() &&
              it->template get<long long>() < 0)) {
    throw ConfigError(join(path, key) + ": invalid value " + it->dump());
  }
  out = it->template get<T>();
}

void read_patches(const json& j, PatchConfig& v, const std::string& path) {
  require_known_keys(j, {"train_stride", "eval_stride", "filter"}, path);
  read_number(j, "train_stride", v.train_stride, path);
  read_number(j, "eval_stride", v.eval_stride, path);
  if (auto it = j.find("filter"); it != j.end()) read_json(*it, v.filter, join(path, "filter"));
}

void read_verification(const json& j, VerificationConfig& v, const std::string& path) {
  require_known_keys(j, {"policy", "target", "support_size", "bpcer_targets"}, path);
  if (auto it = j.find("policy"); it != j.end()) {
    if (!it->is_string()) throw ConfigError(join(path, "policy") + ": expected a string");
    const auto s = it->get<std::string>();
    if (s == "max_accuracy") v.policy.kind = ThresholdPolicyKind::max_accuracy;
    else if (s == "bpcer_target") v.policy.kind = ThresholdPolicyKind::bpcer_target;
    else throw ConfigError(join(path, "policy") + ": unknown policy '" + s + "'");
  }
  read_number(j, "target", v.policy.target, path);
  read_number(j, "support_size", v.support_size, path);
  if (auto it = j.find("bpcer_targets"); it != j.end()) {
    try {
      v.bpcer_targets = it->get<std::vector<double>>();
    } catch (const std::exception&) {
      throw ConfigError(join(path, "bpcer_targets") + ": expected a list of numbers");
    }
  }
}

void read_transfer(const json& j, TransferConfig& v, const std::string& path) {
  require_known_keys(j, {"target", "finetune", "high_triplets", "low_triplets", "bpcer_target"}, path);
  if (auto it = j.find("target"); it != j.end()) read_json(*it, v.target, join(path, "target"));
  if (auto it = j.find("finetune"); it != j.end()) read_json(*it, v.finetune, join(path, "finetune"));
  read_number(j, "high_triplets", v.high_triplets, path);
  read_number(j, "low_triplets", v.low_triplets, path);
  read_number(j, "bpcer_target", v.bpcer_target, path);
}

std::string format_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t derived(std::uint64_t master, std::string_view what) {
  return mix_seed({master, hash_string(what)});
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
  require_known_keys(j, {"protocol", "seed", "output_dir", "synth", "split", "patches", "model", "train",
                         "verification", "cross", "transfer"},
                     "");
  ExperimentConfig c;
  if (auto it = j.find("protocol"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("protocol: expected a string");
    c.protocol = parse_protocol(it->get<std::string>());
  }
  read_number(j, "seed", c.seed, "");
  if (auto it = j.find("output_dir"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("output_dir: expected a string");
    c.output_dir = it->get<std::string>();
  }
  if (auto it = j.find("synth"); it != j.end()) read_json(*it, c.synth, "synth");
  if (auto it = j.find("split"); it != j.end()) read_json(*it, c.split, "split");
  if (auto it = j.find("patches"); it != j.end()) read_patches(*it, c.patches, "patches");
  if (auto it = j.find("model"); it != j.end()) read_json(*it, c.model, "model");
  if (auto it = j.find("train"); it != j.end()) read_json(*it, c.train, "train");
  if (auto it = j.find("verification"); it != j.end()) read_verification(*it, c.verification, "verification");
  if (auto it = j.find("cross"); it != j.end()) {
    require_known_keys(*it, {"label_shuffle_control"}, "cross");
    if (auto b = it->find("label_shuffle_control"); b != it->end()) {
      if (!b->is_boolean()) throw ConfigError("cross.label_shuffle_control: expected true or false");
      c.cross.label_shuffle_control = b->get<bool>();
    }
  }
  if (auto it = j.find("transfer"); it != j.end()) read_transfer(*it, c.transfer, "transfer");
  derive_seeds(c);
  validate(c);
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (j.is_object() && j.contains("summary_version")) {
    if (!j.contains("config")) throw ConfigError("run summary '" + path.string() + "' has no config echo");
    return parse_experiment_config(j["config"]);
  }
  return parse_experiment_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["protocol"] = to_string(c.protocol);
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.string();
  j["synth"] = to_json(c.synth);
  j["split"] = to_json(c.split);
  j["patches"] = {{"train_stride", c.patches.train_stride},
                  {"eval_stride", c.patches.eval_stride},
                  {"filter", to_json(c.patches.filter)}};
  j["model"] = to_json(c.model);
  j["train"] = to_json(c.train);
  j["verification"] = {
      {"policy", c.verification.policy.kind == ThresholdPolicyKind::max_accuracy ? "max_accuracy" : "bpcer_target"},
      {"target", c.verification.policy.target},
      {"support_size", c.verification.support_size},
      {"bpcer_targets", c.verification.bpcer_targets}};
  j["cross"] = {{"label_shuffle_control", c.cross.label_shuffle_control}};
  j["transfer"] = {{"target", to_json(c.transfer.target)},
                   {"finetune", to_json(c.transfer.finetune)},
                   {"high_triplets", c.transfer.high_triplets},
                   {"low_triplets", c.transfer.low_triplets},
                   {"bpcer_target", c.transfer.bpcer_target}};
  return j;
}

void derive_seeds(ExperimentConfig& c) {
  c.synth.master_seed = derived(c.seed, "synth");
  c.split.seed = derived(c.seed, "split");
  c.model.embedder.init_seed = derived(c.seed, "embedder");
  c.model.simnet.init_seed = derived(c.seed, "simnet");
  c.train.seed = derived(c.seed, "train");
  c.transfer.target.master_seed = derived(c.seed, "transfer_target");
  c.transfer.finetune.seed = derived(c.seed, "finetune");
}

void validate(const ExperimentConfig& c) {
  validate(c.synth);
  validate(c.model.embedder);
  validate(c.model.simnet);
  validate(c.train);
  if (c.patches.train_stride < 1 || c.patches.eval_stride < 1) {
    throw ConfigError("patches: strides must be >= 1");
  }
  if (c.verification.support_size < 1) throw ConfigError("verification.support_size must be >= 1");
  for (double t : c.verification.bpcer_targets) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("verification.bpcer_targets entries must lie in [0, 1]");
  }
  if (!(c.verification.policy.target >= 0.0 && c.verification.policy.target <= 1.0)) {
    throw ConfigError("verification.target must lie in [0, 1]");
  }
  if (c.protocol == Protocol::fine_tune_transfer) {
    validate(c.transfer.target);
    if (c.transfer.high_triplets < 0 || c.transfer.low_triplets < 0 ||
        c.transfer.high_triplets + c.transfer.low_triplets < 1) {
      throw ConfigError("transfer: need at least one support triplet");
    }
    if (!(c.transfer.bpcer_target >= 0.0 && c.transfer.bpcer_target <= 1.0)) {
      throw ConfigError("transfer.bpcer_target must lie in [0, 1]");
    }
    if (c.transfer.finetune.epochs < 1 || c.transfer.finetune.batch_size < 1 ||
        !(c.transfer.finetune.learning_rate >= 0.0)) {
      throw ConfigError("transfer.finetune: epochs and batch_size must be >= 1, learning_rate >= 0");
    }
  }
}

void write_metrics_csv(const std::vector<MetricRow>& rows, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "protocol,train_set,test_set,metric,operating_point,value\n";
  for (const auto& r : rows) {
    out << r.protocol << ',' << r.train_set << ',' << r.test_set << ',' << r.metric << ','
        << r.operating_point << ',' << format_value(r.value) << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_roc_csv(const std::vector<RocPoint>& roc, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "threshold,apcer,bpcer\n";
  for (const auto& p : roc) {
    out << format_value(p.threshold) << ',' << format_value(p.apcer) << ',' << format_value(p.bpcer) << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::optional<double> find_metric(const std::vector<MetricRow>& rows, std::string_view metric,
                                  std::string_view operating_point) {
  for (const auto& r : rows) {
    if (r.metric == metric && r.operating_point == operating_point) return r.value;
  }
  return std::nullopt;
}

std::vector<DocumentImage> load_images(const Manifest& manifest) {
  std::vector<DocumentImage> out(manifest.rows.size());
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) out[i] = load_image(manifest, manifest.rows[i]);
  return out;
}

Manifest manifest_of(std::span<const DocumentImage> images) {
  Manifest m;
  for (const auto& img : images) m.rows.push_back({"images/" + img.id + ".png", img.id, img.provenance});
  return m;
}

std::vector<DocumentImage> select(std::span<const DocumentImage> images, const Manifest& subset) {
  std::map<std::string, const DocumentImage*> by_id;
  for (const auto& img : images) by_id[img.id] = &img;
  std::vector<DocumentImage> out;
  for (const auto& row : subset.rows) {
    auto it = by_id.find(row.id);
    if (it == by_id.end()) throw DataError("image '" + row.id + "' not found");
    out.push_back(*it->second);
  }
  return out;
}

namespace {

std::vector<Patch> kept_patches(const DocumentImage& image, int stride, const PatchFilterConfig& filter) {
  std::vector<Patch> out;
  for (auto& p : extract_patches(image, stride)) {
    if (is_discriminative(p, filter)) out.push_back(std::move(p));
  }
  return out;
}

bool high_quality(const Provenance& p) {
  return p.resolution_group == ResolutionGroup::high || p.device_class == DeviceClass::scanner;
}

using SupportKey = std::pair<std::string, ResolutionGroup>;

}  // namespace

SupportSet build_support(std::span<const DocumentImage> pool, const std::string& template_id,
                         ResolutionGroup group, int size, int stride, const PatchFilterConfig& filter) {
  std::vector<const DocumentImage*> genuine, recaptured;
  for (const auto& img : pool) {
    if (img.provenance.template_id != template_id || img.provenance.resolution_group != group) continue;
    (img.provenance.label == Label::genuine ? genuine : recaptured).push_back(&img);
  }
  const auto order = [](const DocumentImage* a, const DocumentImage* b) {
    const bool ha = high_quality(a->provenance);
    const bool hb = high_quality(b->provenance);
    return ha != hb ? ha : a->id < b->id;
  };
  std::sort(genuine.begin(), genuine.end(), order);
  std::sort(recaptured.begin(), recaptured.end(), order);

  SupportSet support;
  for (std::size_t k = 0; k < genuine.size() && support.triplets.size() < static_cast<std::size_t>(size); ++k) {
    SupportTriplet t;
    t.reference = kept_patches(*genuine[k], stride, filter);
    if (t.reference.empty()) continue;
    t.positive = kept_patches(*genuine[(k + 1) % genuine.size()], stride, filter);
    if (!recaptured.empty()) {
      t.negative = kept_patches(*recaptured[support.triplets.size() % recaptured.size()], stride, filter);
    }
    support.triplets.push_back(std::move(t));
  }
  return support;
}

namespace {

template <typename SupportFor>
EvaluationScores score_with(const ForensicModel& model, std::span<const DocumentImage> questioned,
                            const ExperimentConfig& config, SupportFor support_for) {
  EvaluationScores out;
  for (const auto& img : questioned) {
    const auto patches = kept_patches(img, config.patches.eval_stride, config.patches.filter);
    const SupportSet* support = support_for(img.provenance);
    if (patches.empty() || support == nullptr || support->triplets.empty()) {
      out.skipped.push_back(img.id);
      continue;
    }
    out.scored.push_back({img.id, img.provenance, score_questioned(model, patches, *support).score});
  }
  return out;
}

}  // namespace

EvaluationScores score_images(const ForensicModel& model, std::span<const DocumentImage> questioned,
                              std::span<const DocumentImage> support_pool, const ExperimentConfig& config) {
  std::map<SupportKey, SupportSet> cache;
  return score_with(model, questioned, config, [&](const Provenance& p) -> const SupportSet* {
    const SupportKey key{p.template_id, p.resolution_group};
    auto it = cache.find(key);
    if (it == cache.end()) {
      it = cache.emplace(key, build_support(support_pool, p.template_id, p.resolution_group,
                                            config.verification.support_size, config.patches.eval_stride,
                                            config.patches.filter))
               .first;
    }
    return &it->second;
  });
}

std::vector<ScoredSample> to_samples(std::span<const ScoredImage> scored) {
  std::vector<ScoredSample> out;
  for (const auto& s : scored) {
    out.push_back({s.score, s.provenance.label == Label::genuine ? SampleLabel::bona_fide : SampleLabel::attack});
  }
  return out;
}

TrainedRun train_on(std::span<const DocumentImage> train_images, std::span<const DocumentImage> val_images,
                    const ExperimentConfig& config) {
  PatchStore store(train_images, config.patches.train_stride, config.patches.filter);
  store.append(val_images, config.patches.eval_stride, config.patches.filter);
  const Manifest train_manifest = manifest_of(train_images);
  const auto candidates = build_candidate_triplets(train_manifest, store);
  if (candidates.triplets.empty()) throw TrainingError("no training triplets: " + candidates.reason);
  std::vector<Triplet> validation;
  if (!val_images.empty()) {
    validation = build_candidate_triplets(manifest_of(val_images), store, &train_manifest).triplets;
  }
  auto result = train(ForensicModel(config.model), store, candidates.triplets, validation, config.train);
  return {std::move(result.model), std::move(result.history)};
}

EmbeddingExport export_embeddings(const ForensicModel& model, std::span<const DocumentImage> images, int stride,
                                  const PatchFilterConfig& filter, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const int d = model.embedder.embed_dim();
  out << "id,template_id,label,channel";
  for (int k = 0; k < d; ++k) out << ",e" << k;
  out << '\n';
  EmbeddingExport result;
  char buf[32];
  for (const auto& img : images) {
    const auto patches = kept_patches(img, stride, filter);
    if (patches.empty()) {
      result.skipped.push_back(img.id);
      continue;
    }
    std::vector<double> mean(d, 0.0);
    for (const auto& e : model.embedder.embed(patches)) {
      for (int k = 0; k < d; ++k) mean[k] += e.values[k];
    }
    out << img.id << ',' << img.provenance.template_id << ',' << to_string(img.provenance.label) << ','
        << to_string(img.provenance.channel);
    for (int k = 0; k < d; ++k) {
      std::snprintf(buf, sizeof(buf), "%.9g", mean[k] / static_cast<double>(patches.size()));
      out << ',' << buf;
    }
    out << '\n';
    ++result.rows;
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
  if (!result.skipped.empty()) {
    fs::path log = path;
    log.replace_extension(".skipped.txt");
    std::ofstream skip(log);
    for (const auto& id : result.skipped) skip << id << '\n';
  }
  return result;
}

namespace {

struct Split {
  std::vector<DocumentImage> train, val, test;
};

Split split_images(const std::vector<DocumentImage>& images, const SplitSpec& spec) {
  const auto parts = split_corpus(manifest_of(images), spec);
  return {select(images, parts.train), select(images, parts.val), select(images, parts.test)};
}

std::vector<double> scores_of(const EvaluationScores& e, Label label) {
  std::vector<double> out;
  for (const auto& s : e.scored) {
    if (s.provenance.label == label) out.push_back(s.score);
  }
  return out;
}

void require_both_classes(const EvaluationScores& e, const std::string& what) {
  if (scores_of(e, Label::genuine).empty() || scores_of(e, Label::recaptured).empty()) {
    throw DataError(what + " needs scored genuine and recaptured images");
  }
}

std::string target_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "bpcer_target=%g", t);
  return buf;
}

struct Reporter {
  std::string protocol;
  std::string train_set;
  std::string test_set;
  std::vector<MetricRow>* rows;

  void add(const std::string& metric, const std::string& op, double value) const {
    rows->push_back({protocol, train_set, test_set, metric, op, value});
  }

  // Rank metrics on the test scores plus operating points fixed on validation.
  void standard(const EvaluationScores& val, const EvaluationScores& test, const ExperimentConfig& config,
                const std::string& suffix = "") const {
    const auto samples = to_samples(test.scored);
    const auto e = eer(samples);
    add("auc", "all_thresholds" + suffix, auc(samples));
    add("eer", "eer" + suffix, e.eer);
    add("threshold", "eer" + suffix, e.threshold);
    const auto calib = calibrate_threshold(scores_of(val, Label::genuine), scores_of(val, Label::recaptured),
                                           config.verification.policy);
    const auto at = apcer_bpcer(samples, calib.threshold);
    const std::string op = (config.verification.policy.kind == ThresholdPolicyKind::max_accuracy
                                ? std::string("val_max_accuracy")
                                : target_tag(config.verification.policy.target)) + suffix;
    add("threshold", op, calib.threshold);
    add("apcer", op, at.apcer);
    add("bpcer", op, at.bpcer);
    for (double t : config.verification.bpcer_targets) {
      const double theta = bpcer_target_threshold(scores_of(val, Label::genuine), t);
      const auto r = apcer_bpcer(samples, theta);
      add("threshold", target_tag(t) + suffix, theta);
      add("apcer", target_tag(t) + suffix, r.apcer);
      add("bpcer", target_tag(t) + suffix, r.bpcer);
    }
  }
};

json history_json(const TrainHistory& h) {
  json out = json::array();
  for (const auto& r : h.epochs) {
    out.push_back({{"epoch", r.epoch},
                   {"l_ts", r.l_ts},
                   {"l_ns", r.l_ns},
                   {"l_fl", r.l_fl},
                   {"triplet_count", r.triplet_count},
                   {"val_l_fl", r.val_l_fl}});
  }
  return out;
}

json scores_json(const EvaluationScores& e) {
  json out = json::array();
  for (const auto& s : e.scored) out.push_back({{"id", s.id}, {"score", s.score}});
  return out;
}

// Labels permuted within each template; counts per template are kept.
std::vector<DocumentImage> shuffle_labels(std::vector<DocumentImage> images, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> by_template;
  for (std::size_t i = 0; i < images.size(); ++i) by_template[images[i].provenance.template_id].push_back(i);
  std::mt19937_64 rng(seed);
  for (auto& [tid, idx] : by_template) {
    std::vector<Label> labels;
    for (std::size_t i : idx) labels.push_back(images[i].provenance.label);
    std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t k = 0; k < idx.size(); ++k) images[idx[k]].provenance.label = labels[k];
  }
  return images;
}

struct TransferSupport {
  std::vector<std::array<const DocumentImage*, 3>> triplets;  // reference, positive, negative
  std::set<std::string> used;
};

TransferSupport pick_transfer_support(const std::vector<DocumentImage>& target, const TransferConfig& tc) {
  std::vector<std::string> templates;
  for (const auto& img : target) {
    if (std::find(templates.begin(), templates.end(), img.provenance.template_id) == templates.end()) {
      templates.push_back(img.provenance.template_id);
    }
  }
  std::sort(templates.begin(), templates.end());
  TransferSupport out;
  const auto take = [&](const std::string& tid, ResolutionGroup g, Label l) -> const DocumentImage* {
    for (const auto& img : target) {
      if (img.provenance.template_id == tid && img.provenance.resolution_group == g &&
          img.provenance.label == l && !out.used.count(img.id)) {
        out.used.insert(img.id);
        return &img;
      }
    }
    throw DataError("transfer corpus has too few " + std::string(to_string(g)) + "-resolution " +
                    std::string(to_string(l)) + " images in template '" + tid + "' for the support set");
  };
  const auto add = [&](int count, ResolutionGroup g) {
    for (int k = 0; k < count; ++k) {
      const auto& tid = templates[static_cast<std::size_t>(k) % templates.size()];
      const auto* r = take(tid, g, Label::genuine);
      const auto* p = take(tid, g, Label::genuine);
      const auto* n = take(tid, g, Label::recaptured);
      out.triplets.push_back({r, p, n});
    }
  };
  add(tc.high_triplets, ResolutionGroup::high);
  add(tc.low_triplets, ResolutionGroup::low);
  return out;
}

}  // namespace

ExperimentResult run_experiment(ExperimentConfig config) {
  derive_seeds(config);
  validate(config);
  ExperimentResult result;
  json extra = json::object();
  std::vector<std::string> skipped;
  std::optional<ForensicModel> saved;
  std::vector<DocumentImage> embed_set;

  if (config.protocol == Protocol::intra) {
    const auto corpus = synthesize_corpus(config.synth);
    const auto parts = split_images(corpus, config.split);
    auto run = train_on(parts.train, parts.val, config);
    const auto val = score_images(run.model, parts.val, parts.train, config);
    const auto test = score_images(run.model, parts.test, parts.train, config);
    require_both_classes(val, "validation split");
    require_both_classes(test, "test split");
    const std::string ds = config.synth.dataset_id;
    Reporter rep{"intra", ds + "/train", ds + "/test", &result.metrics};
    rep.standard(val, test, config);
    result.roc = roc_points(to_samples(test.scored));
    result.test_scores = test.scored;
    result.history = run.history;
    run.model.extras["threshold"] = *find_metric(result.metrics, "threshold",
        config.verification.policy.kind == ThresholdPolicyKind::max_accuracy ? "val_max_accuracy"
                                                                              : target_tag(config.verification.policy.target));
    skipped = val.skipped;
    skipped.insert(skipped.end(), test.skipped.begin(), test.skipped.end());
    extra["test_scores"] = scores_json(test);
    saved = std::move(run.model);
    embed_set = parts.test;
  } else if (config.protocol == Protocol::cross) {
    SynthSpec train_spec = config.synth;
    train_spec.channel_mix = {1.0, 0.0};
    SynthSpec test_spec = config.synth;
    test_spec.channel_mix = {0.0, 1.0};
    test_spec.master_seed = derived(config.seed, "cross_test");
    test_spec.dataset_id = config.synth.dataset_id + "x";
    const auto source = synthesize_corpus(train_spec);
    const auto target = synthesize_corpus(test_spec);
    const auto parts = split_images(source, config.split);
    auto run = train_on(parts.train, parts.val, config);
    const auto val = score_images(run.model, parts.val, parts.train, config);
    const auto test = score_images(run.model, target, parts.train, config);
    require_both_classes(val, "validation split");
    require_both_classes(test, "cross-channel test corpus");
    Reporter rep{"cross", train_spec.dataset_id + ":print_scan", test_spec.dataset_id + ":display_capture",
                 &result.metrics};
    rep.standard(val, test, config);
    result.roc = roc_points(to_samples(test.scored));
    result.test_scores = test.scored;
    result.history = run.history;
    extra["test_scores"] = scores_json(test);
    skipped = test.skipped;

    if (config.cross.label_shuffle_control) {
      const std::uint64_t shuffle_seed = derived(config.seed, "label_shuffle");
      const auto sh_train = shuffle_labels(parts.train, shuffle_seed);
      const auto sh_val = shuffle_labels(parts.val, mix_seed({shuffle_seed, 1}));
      auto control = train_on(sh_train, sh_val, config);
      const auto ctest = score_images(control.model, target, sh_train, config);
      require_both_classes(ctest, "label-shuffle control");
      rep.add("auc", "label_shuffle_control", auc(to_samples(ctest.scored)));
      extra["control_scores"] = scores_json(ctest);
    }
    run.model.extras["threshold"] = *find_metric(result.metrics, "threshold",
        config.verification.policy.kind == ThresholdPolicyKind::max_accuracy ? "val_max_accuracy"
                                                                              : target_tag(config.verification.policy.target));
    saved = std::move(run.model);
    embed_set = target;
  } else {
    const auto source = synthesize_corpus(config.synth);
    const auto target = synthesize_corpus(config.transfer.target);
    const auto parts = split_images(source, config.split);
    auto run = train_on(parts.train, parts.val, config);

    const auto support = pick_transfer_support(target, config.transfer);
    std::vector<DocumentImage> support_images;
    for (const auto& t : support.triplets) {
      for (const auto* img : t) support_images.push_back(*img);
    }
    PatchStore store(support_images, config.patches.train_stride, config.patches.filter);
    std::vector<Triplet> ft_triplets;
    for (const auto& t : support.triplets) {
      for (std::size_t ri : store.patches_of(t[0]->id)) {
        const auto pi = store.find(t[1]->id, store[ri].row, store[ri].col);
        const auto ni = store.find(t[2]->id, store[ri].row, store[ri].col);
        if (pi && ni) ft_triplets.push_back({ri, *pi, *ni});
      }
    }
    if (ft_triplets.empty()) throw TrainingError("support images share no discriminative patch position");
    const auto tuned = finetune(run.model, store, ft_triplets, config.transfer.finetune);

    std::vector<DocumentImage> questioned;
    for (const auto& img : target) {
      if (!support.used.count(img.id)) questioned.push_back(img);
    }
    std::map<SupportKey, SupportSet> target_support;
    for (const auto& t : support.triplets) {
      const SupportKey key{t[0]->provenance.template_id, t[0]->provenance.resolution_group};
      SupportTriplet st;
      st.reference = kept_patches(*t[0], config.patches.eval_stride, config.patches.filter);
      st.positive = kept_patches(*t[1], config.patches.eval_stride, config.patches.filter);
      st.negative = kept_patches(*t[2], config.patches.eval_stride, config.patches.filter);
      if (!st.reference.empty()) target_support[key].triplets.push_back(std::move(st));
    }
    const auto lookup = [&](const Provenance& p) -> const SupportSet* {
      auto it = target_support.find({p.template_id, p.resolution_group});
      return it == target_support.end() ? nullptr : &it->second;
    };

    Reporter rep{"fine_tune_transfer", config.synth.dataset_id + "/train",
                 config.transfer.target.dataset_id + "/questioned", &result.metrics};
    const std::string op = target_tag(config.transfer.bpcer_target);
    const auto evaluate = [&](const ForensicModel& m, const std::string& stage) {
      const auto val = score_images(m, parts.val, parts.train, config);
      require_both_classes(val, "source validation split");
      const double theta = bpcer_target_threshold(scores_of(val, Label::genuine), config.transfer.bpcer_target);
      const auto test = score_with(m, questioned, config, lookup);
      require_both_classes(test, "transfer questioned set");
      const auto samples = to_samples(test.scored);
      const auto r = apcer_bpcer(samples, theta);
      rep.add("threshold", op + ";" + stage, theta);
      rep.add("bpcer", op + ";" + stage, r.bpcer);
      rep.add("apcer", op + ";" + stage, r.apcer);
      rep.add("auc", "all_thresholds;" + stage, auc(samples));
      rep.add("eer", "eer;" + stage, eer(samples).eer);
      return test;
    };
    const auto before = evaluate(run.model, "before_finetune");
    const auto after = evaluate(tuned, "after_finetune");
    rep.add("support_triplets", "images", static_cast<double>(support.triplets.size()));
    rep.add("support_images", "distinct", static_cast<double>(support.used.size()));
    result.roc = roc_points(to_samples(after.scored));
    result.test_scores = after.scored;
    result.history = run.history;
    extra["test_scores_before"] = scores_json(before);
    extra["test_scores"] = scores_json(after);
    json ids = json::array();
    for (const auto& t : support.triplets) ids.push_back({t[0]->id, t[1]->id, t[2]->id});
    extra["support_triplets"] = ids;
    skipped = after.skipped;
    saved = tuned;
    embed_set = questioned;
  }

  json metrics = json::array();
  for (const auto& r : result.metrics) {
    metrics.push_back({{"protocol", r.protocol},
                       {"train_set", r.train_set},
                       {"test_set", r.test_set},
                       {"metric", r.metric},
                       {"operating_point", r.operating_point},
                       {"value", format_value(r.value)}});
  }
  result.summary = {{"summary_version", 1},
                    {"config", to_json(config)},
                    {"seeds",
                     {{"master", config.seed},
                      {"synth", config.synth.master_seed},
                      {"split", config.split.seed},
                      {"embedder_init", config.model.embedder.init_seed},
                      {"simnet_init", config.model.simnet.init_seed},
                      {"train", config.train.seed}}},
                    {"metrics", metrics},
                    {"best_epoch", result.history.best_epoch},
                    {"history", history_json(result.history)},
                    {"skipped", skipped}};
  for (auto& [k, v] : extra.items()) result.summary[k] = v;

  if (!config.output_dir.empty()) {
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + config.output_dir.string() + "': " + ec.message());
    save_checkpoint(*saved, config.output_dir / "checkpoint");
    write_history_csv(result.history, config.output_dir / "history.csv");
    write_metrics_csv(result.metrics, config.output_dir / "metrics.csv");
    write_roc_csv(result.roc, config.output_dir / "roc.csv");
    export_embeddings(*saved, embed_set, config.patches.eval_stride, config.patches.filter,
                      config.output_dir / "embeddings.csv");
    std::ofstream out(config.output_dir / "summary.json");
    if (!out) throw IoError("cannot write summary.json under '" + config.output_dir.string() + "'");
    out << result.summary.dump(2) << '\n';
  }
  return result;
}

}  // namespace recap
