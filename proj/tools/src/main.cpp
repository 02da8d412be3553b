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
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>

#include "recap/error.hpp"
#include "recap/experiment.hpp"
#include "recap/serialization.hpp"

namespace fs = std::filesystem;

namespace {

using namespace recap;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string manifest;
  std::string checkpoint;
  std::string image;
  std::string mode = "seen_template";
  std::optional<double> threshold;
};

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig c;
  if (!o.config.empty()) c = load_experiment_config(o.config);
  if (o.seed) {
    c.seed = *o.seed;
    derive_seeds(c);
  }
  if (!o.out.empty()) c.output_dir = o.out;
  return c;
}

fs::path require_out(const ExperimentConfig& c) {
  if (c.output_dir.empty()) throw ConfigError("--out (or output_dir in the config) is required");
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (ec) throw IoError("cannot create '" + c.output_dir.string() + "': " + ec.message());
  return c.output_dir;
}

std::vector<DocumentImage> corpus_for(const Options& o, const ExperimentConfig& c) {
  if (!o.manifest.empty()) {
    const auto m = load_manifest(o.manifest);
    validate(m);
    return load_images(m);
  }
  return synthesize_corpus(c.synth);
}

struct Parts {
  std::vector<DocumentImage> train, val, test;
};

Parts split_of(const std::vector<DocumentImage>& images, const ExperimentConfig& c) {
  const auto s = split_corpus(manifest_of(images), c.split);
  return {select(images, s.train), select(images, s.val), select(images, s.test)};
}

int cmd_synth(const Options& o) {
  const auto c = resolve(o);
  const auto out = require_out(c);
  const auto m = generate_corpus(c.synth, out);
  std::cout << "wrote " << m.rows.size() << " images and " << (out / "manifest.jsonl").string() << '\n';
  return 0;
}

int cmd_train(const Options& o) {
  const auto c = resolve(o);
  const auto out = require_out(c);
  const auto parts = split_of(corpus_for(o, c), c);
  auto run = train_on(parts.train, parts.val, c);
  const auto val = score_images(run.model, parts.val, parts.train, c);
  std::vector<double> genuine, attack;
  for (const auto& s : val.scored) (s.provenance.label == Label::genuine ? genuine : attack).push_back(s.score);
  if (!genuine.empty() && (!attack.empty() || c.verification.policy.kind == ThresholdPolicyKind::bpcer_target)) {
    run.model.extras["threshold"] = calibrate_threshold(genuine, attack, c.verification.policy).threshold;
  }
  save_checkpoint(run.model, out / "checkpoint");
  write_history_csv(run.history, out / "history.csv");
  std::cout << "trained " << run.history.epochs.size() << " epochs, best epoch " << run.history.best_epoch << '\n';
  return 0;
}

int cmd_evaluate(const Options& o) {
  const auto c = resolve(o);
  const auto out = require_out(c);
  const auto model = load_checkpoint(o.checkpoint, &c.model);
  const auto parts = split_of(corpus_for(o, c), c);
  const auto val = score_images(model, parts.val, parts.train, c);
  const auto test = score_images(model, parts.test, parts.train, c);
  const auto samples = to_samples(test.scored);
  std::vector<double> genuine;
  for (const auto& s : val.scored) {
    if (s.provenance.label == Label::genuine) genuine.push_back(s.score);
  }
  std::vector<MetricRow> rows;
  const std::string p = std::string(to_string(c.protocol));
  const std::string ds = c.synth.dataset_id;
  rows.push_back({p, ds + "/train", ds + "/test", "auc", "all_thresholds", auc(samples)});
  const auto e = eer(samples);
  rows.push_back({p, ds + "/train", ds + "/test", "eer", "eer", e.eer});
  for (double t : c.verification.bpcer_targets) {
    const double theta = bpcer_target_threshold(genuine, t);
    const auto r = apcer_bpcer(samples, theta);
    char op[32];
    std::snprintf(op, sizeof(op), "bpcer_target=%g", t);
    rows.push_back({p, ds + "/train", ds + "/test", "apcer", op, r.apcer});
    rows.push_back({p, ds + "/train", ds + "/test", "bpcer", op, r.bpcer});
  }
  write_metrics_csv(rows, out / "metrics.csv");
  write_roc_csv(roc_points(samples), out / "roc.csv");
  std::cout << "auc " << rows[0].value << ", eer " << e.eer << '\n';
  return 0;
}

int cmd_verify(const Options& o) {
  const auto c = resolve(o);
  if (o.manifest.empty() || o.image.empty()) throw ConfigError("verify needs --manifest and --image");
  const auto model = load_checkpoint(o.checkpoint);
  const auto manifest = load_manifest(o.manifest);
  validate(manifest);
  const auto images = load_images(manifest);
  const DocumentImage* questioned = nullptr;
  std::vector<DocumentImage> pool;
  for (const auto& img : images) {
    if (img.id == o.image) questioned = &img;
    else pool.push_back(img);
  }
  if (!questioned) throw DataError("image '" + o.image + "' is not in the manifest");
  const auto support = build_support(pool, questioned->provenance.template_id,
                                     questioned->provenance.resolution_group, c.verification.support_size,
                                     c.patches.eval_stride, c.patches.filter);
  std::vector<Patch> patches;
  for (auto& p : extract_patches(*questioned, c.patches.eval_stride)) {
    if (is_discriminative(p, c.patches.filter)) patches.push_back(std::move(p));
  }
  const auto decision = verify(model, patches, support, o.threshold, parse_verify_mode(o.mode));
  std::cout << verification_report(questioned->id, decision) << '\n';
  return 0;
}

int cmd_export(const Options& o) {
  const auto c = resolve(o);
  if (o.out.empty()) throw ConfigError("export-embeddings needs --out <file.csv>");
  if (o.manifest.empty()) throw ConfigError("export-embeddings needs --manifest");
  const auto model = load_checkpoint(o.checkpoint);
  const auto manifest = load_manifest(o.manifest);
  validate(manifest);
  const auto r = export_embeddings(model, load_images(manifest), c.patches.eval_stride, c.patches.filter, o.out);
  std::cout << "wrote " << r.rows << " rows";
  if (!r.skipped.empty()) std::cout << ", skipped " << r.skipped.size() << " images";
  std::cout << '\n';
  return 0;
}

int cmd_run(const Options& o) {
  auto c = resolve(o);
  require_out(c);
  const auto r = run_experiment(c);
  for (const auto& m : r.metrics) {
    std::cout << m.metric << " [" << m.operating_point << "] " << m.value << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recapture detection experiments: synthesis, training, evaluation, verification"};
  app.require_subcommand(1);
  Options o;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment config (JSON) or a run summary.json");
    sub->add_option("--seed", o.seed, "override the master seed");
    sub->add_option("--out", o.out, "output directory (file for export-embeddings)");
  };
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with a manifest");
  common(synth);
  auto* train = app.add_subcommand("train", "train a model and save a checkpoint");
  common(train);
  train->add_option("--manifest", o.manifest, "train on this manifest instead of a synthetic corpus");
  auto* evaluate = app.add_subcommand("evaluate", "score the test split with a checkpoint");
  common(evaluate);
  evaluate->add_option("--checkpoint", o.checkpoint, "checkpoint directory")->required();
  evaluate->add_option("--manifest", o.manifest, "evaluate this manifest instead of a synthetic corpus");
  auto* verify_cmd = app.add_subcommand("verify", "verify one questioned image against its template");
  common(verify_cmd);
  verify_cmd->add_option("--checkpoint", o.checkpoint, "checkpoint directory")->required();
  verify_cmd->add_option("--manifest", o.manifest, "manifest holding the questioned and support images")->required();
  verify_cmd->add_option("--image", o.image, "questioned image id")->required();
  verify_cmd->add_option("--mode", o.mode, "seen_template or few_shot");
  verify_cmd->add_option("--threshold", o.threshold, "decision threshold (seen_template)");
  auto* export_cmd = app.add_subcommand("export-embeddings", "write per-image mean embeddings as CSV");
  common(export_cmd);
  export_cmd->add_option("--checkpoint", o.checkpoint, "checkpoint directory")->required();
  export_cmd->add_option("--manifest", o.manifest, "images to embed")->required();
  auto* run = app.add_subcommand("run", "run a full protocol and write all artifacts");
  common(run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : exit_code(ErrorCategory::config);
  }

  try {
    if (synth->parsed()) return cmd_synth(o);
    if (train->parsed()) return cmd_train(o);
    if (evaluate->parsed()) return cmd_evaluate(o);
    if (verify_cmd->parsed()) return cmd_verify(o);
    if (export_cmd->parsed()) return cmd_export(o);
    if (run->parsed()) return cmd_run(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
