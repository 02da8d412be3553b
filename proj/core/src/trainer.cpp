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
#include "recap/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>

#include "recap/error.hpp"
#include "recap/rng.hpp"

namespace recap {

std::string_view to_string(OptimizerKind) noexcept { return "adam"; }

OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer '" + std::string(s) + "'");
}

namespace {

void validate_config(const TrainConfig& config, bool allow_zero_lr) {
  if (config.epochs < 1) throw ConfigError("train.epochs must be >= 1");
  const bool lr_ok = allow_zero_lr ? config.learning_rate >= 0.0 : config.learning_rate > 0.0;
  if (!lr_ok || !std::isfinite(config.learning_rate)) {
    throw ConfigError(std::string("train.learning_rate must be ") + (allow_zero_lr ? ">= 0" : "> 0"));
  }
  if (config.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0) || !(config.beta2 >= 0.0 && config.beta2 < 1.0)) {
    throw ConfigError("train.beta1 and train.beta2 must lie in [0, 1)");
  }
  if (!(config.epsilon > 0.0)) throw ConfigError("train.epsilon must be > 0");
  validate(config.loss);
  validate(config.mining);
}

template <typename T>
class Adam {
 public:
  Adam(const std::vector<Parameter<T>>& params, const TrainConfig& config) : config_(config) {
    for (const auto& p : params) {
      m_.emplace_back(p.value.size(), 0.0);
      v_.emplace_back(p.value.size(), 0.0);
    }
  }

  void step(std::vector<Parameter<T>>& params, const GradientSet<T>& grads, std::uint64_t t) {
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    const double lr = config_.learning_rate;
    for (std::size_t k = 0; k < params.size(); ++k) {
      if (!params[k].trainable) continue;
      auto& w = params[k].value;
      const auto& g = grads.slots[k];
      auto& m = m_[k];
      auto& v = v_[k];
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double gi = g[i];
        m[i] = b1 * m[i] + (1.0 - b1) * gi;
        v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
        const double update = lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
        w[i] = static_cast<T>(static_cast<double>(w[i]) - update);
      }
    }
  }

 private:
  const TrainConfig& config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

// Unique patch indices of a triplet list, in first-use order.
std::vector<std::size_t> unique_patches(std::span<const Triplet> triplets) {
  std::vector<std::size_t> out;
  std::map<std::size_t, bool> seen;
  for (const auto& t : triplets) {
    for (std::size_t i : {t.reference, t.positive, t.negative}) {
      if (seen.emplace(i, true).second) out.push_back(i);
    }
  }
  return out;
}

std::string batch_context(int epoch, std::size_t batch) {
  return "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch);
}

struct Trainer {
  ForensicModel& model;
  const PatchStore& store;
  const TrainConfig& config;
  GradientSet<float> embed_grads;
  GradientSet<double> sim_grads;
  Adam<float> embed_adam;
  Adam<double> sim_adam;
  std::uint64_t t = 0;

  Trainer(ForensicModel& m, const PatchStore& s, const TrainConfig& c)
      : model(m),
        store(s),
        config(c),
        embed_grads(m.embedder.parameters()),
        sim_grads(m.simnet.parameters()),
        embed_adam(m.embedder.parameters(), c),
        sim_adam(m.simnet.parameters(), c) {}

  void step(std::span<const Triplet> batch, int epoch, std::size_t batch_index) {
    const auto unique = unique_patches(batch);
    std::map<std::size_t, std::size_t> slot;
    for (std::size_t k = 0; k < unique.size(); ++k) slot[unique[k]] = k;

    const int d = model.embedder.embed_dim();
    std::vector<Embedder::Trace> traces(unique.size());
    Eigen::MatrixXd emb(d, static_cast<Eigen::Index>(unique.size()));
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(unique.size()); ++k) {
      const auto e = model.embedder.forward(store[unique[k]].pixels, traces[k]);
      for (int j = 0; j < d; ++j) emb(j, k) = e[j];
    }

    const auto b = static_cast<Eigen::Index>(batch.size());
    Eigen::MatrixXd refs(d, 2 * b), others(d, 2 * b);
    for (Eigen::Index i = 0; i < b; ++i) {
      const auto& tr = batch[i];
      refs.col(i) = emb.col(slot[tr.reference]);
      refs.col(b + i) = emb.col(slot[tr.reference]);
      others.col(i) = emb.col(slot[tr.positive]);
      others.col(b + i) = emb.col(slot[tr.negative]);
    }
    SimNet::BatchTrace trace;
    const Eigen::VectorXd scores = model.simnet.forward(refs, others, &trace);
    if (!scores.allFinite()) {
      throw TrainingError("non-finite similarity score at " + batch_context(epoch, batch_index));
    }
    std::vector<double> sp(scores.data(), scores.data() + b);
    std::vector<double> sn(scores.data() + b, scores.data() + 2 * b);
    const auto loss = forensic_loss(sp, sn, config.loss);
    if (!std::isfinite(loss.l_fl)) {
      throw TrainingError("non-finite loss at " + batch_context(epoch, batch_index) +
                          " (l_ts=" + std::to_string(loss.l_ts) + ", l_ns=" + std::to_string(loss.l_ns) + ")");
    }
    const auto g = forensic_loss_gradient(sp, sn, config.loss);
    Eigen::VectorXd d_scores(2 * b);
    for (Eigen::Index i = 0; i < b; ++i) {
      d_scores[i] = g.d_positive[i];
      d_scores[b + i] = g.d_negative[i];
    }

    embed_grads.zero();
    sim_grads.zero();
    Eigen::MatrixXd d_refs, d_others;
    model.simnet.backward(trace, d_scores, sim_grads, d_refs, d_others);

    Eigen::MatrixXd d_emb = Eigen::MatrixXd::Zero(d, static_cast<Eigen::Index>(unique.size()));
    for (Eigen::Index i = 0; i < b; ++i) {
      const auto& tr = batch[i];
      d_emb.col(slot[tr.reference]) += d_refs.col(i) + d_refs.col(b + i);
      d_emb.col(slot[tr.positive]) += d_others.col(i);
      d_emb.col(slot[tr.negative]) += d_others.col(b + i);
    }
    for (std::size_t k = 0; k < unique.size(); ++k) {
      model.embedder.backward(traces[k], std::span<const double>(d_emb.col(k).data(), d), embed_grads);
    }
    ++t;
    embed_adam.step(model.embedder.parameters(), embed_grads, t);
    sim_adam.step(model.simnet.parameters(), sim_grads, t);
    ++model.step;
  }
};

LossConfig mean_of(const LossConfig& loss) {
  LossConfig out = loss;
  out.reduction = Reduction::mean;
  return out;
}

TrainResult run_training(ForensicModel model, const PatchStore& store, std::span<const Triplet> candidates,
                         std::span<const Triplet> validation, const TrainConfig& config) {
  if (candidates.empty()) throw TrainingError("training needs at least one valid triplet");
  for (const auto& t : candidates) validate(t, store, true);
  for (const auto& t : validation) validate(t, store, true);

  TrainResult result{std::move(model), {}, {}};
  ForensicModel& live = result.model;
  std::optional<ForensicModel> best;
  double best_val = std::numeric_limits<double>::infinity();
  Trainer trainer(live, store, config);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    auto mined = mine_semi_hard(candidates, store, live, config.mining,
                                mix_seed({config.seed, static_cast<std::uint64_t>(epoch), 1}));
    std::mt19937_64 rng(mix_seed({config.seed, static_cast<std::uint64_t>(epoch), 2}));
    std::shuffle(mined.begin(), mined.end(), rng);

    const auto bs = static_cast<std::size_t>(config.batch_size);
    for (std::size_t begin = 0, k = 0; begin < mined.size(); begin += bs, ++k) {
      const std::size_t n = std::min(bs, mined.size() - begin);
      trainer.step(std::span<const Triplet>(mined).subspan(begin, n), epoch, k);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.triplet_count = mined.size();
    if (!mined.empty()) {
      const auto l = evaluate_loss(live, store, mined, mean_of(config.loss));
      if (!std::isfinite(l.l_fl)) throw TrainingError("non-finite epoch loss at epoch " + std::to_string(epoch));
      rec.l_ts = l.l_ts;
      rec.l_ns = l.l_ns;
      rec.l_fl = l.l_fl;
    }
    if (!validation.empty()) {
      rec.val_l_fl = evaluate_loss(live, store, validation, mean_of(config.loss)).l_fl;
      if (!std::isfinite(rec.val_l_fl)) {
        throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));
      }
      if (rec.val_l_fl < best_val) {
        best_val = rec.val_l_fl;
        best = live;
        result.history.best_epoch = epoch;
      }
    }
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.epochs.push_back(rec);
    if (!config.epoch_checkpoint_dir.empty()) {
      save_checkpoint(live, config.epoch_checkpoint_dir / ("epoch_" + std::to_string(epoch)));
    }
    if (config.keep_epoch_triplets) result.epoch_triplets.push_back(std::move(mined));
  }
  if (best) {
    result.model = std::move(*best);
  } else {
    result.history.best_epoch = config.epochs;
  }
  return result;
}

}  // namespace

void validate(const TrainConfig& config) { validate_config(config, false); }

TrainResult train(ForensicModel model, const PatchStore& store, std::span<const Triplet> candidates,
                  std::span<const Triplet> validation, const TrainConfig& config) {
  validate_config(config, false);
  return run_training(std::move(model), store, candidates, validation, config);
}

ForensicModel finetune(const ForensicModel& model, const PatchStore& store, std::span<const Triplet> support,
                       const TrainConfig& config) {
  if (support.empty()) throw DataError("fine-tuning needs at least one support triplet");
  validate_config(config, true);
  TrainConfig tuned = config;
  tuned.mining.mode = MiningMode::all;
  tuned.mining.max_total = 0;
  tuned.keep_epoch_triplets = false;
  return run_training(model, store, support, {}, tuned).model;
}

std::vector<TripletScores> score_triplets(const ForensicModel& model, const PatchStore& store,
                                          std::span<const Triplet> triplets) {
  const auto unique = unique_patches(triplets);
  std::map<std::size_t, std::size_t> slot;
  std::vector<const Image*> images;
  images.reserve(unique.size());
  for (std::size_t k = 0; k < unique.size(); ++k) {
    if (unique[k] >= store.size()) throw DataError("triplet refers to a patch outside the store");
    slot[unique[k]] = k;
    images.push_back(&store[unique[k]].pixels);
  }
  const auto emb = model.embedder.embed_images(images);
  const int d = model.embedder.embed_dim();
  const auto column = [&](std::size_t patch) {
    return Eigen::Map<const Eigen::VectorXd>(emb[slot[patch]].data(), d);
  };

  std::vector<TripletScores> out(triplets.size());
  constexpr std::size_t kChunk = 256;
  for (std::size_t begin = 0; begin < triplets.size(); begin += kChunk) {
    const auto n = static_cast<Eigen::Index>(std::min(kChunk, triplets.size() - begin));
    Eigen::MatrixXd refs(d, 2 * n), others(d, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& t = triplets[begin + i];
      refs.col(i) = column(t.reference);
      refs.col(n + i) = column(t.reference);
      others.col(i) = column(t.positive);
      others.col(n + i) = column(t.negative);
    }
    const Eigen::VectorXd s = model.simnet.forward(refs, others);
    for (Eigen::Index i = 0; i < n; ++i) out[begin + i] = {s[i], s[n + i]};
  }
  return out;
}

LossBreakdown evaluate_loss(const ForensicModel& model, const PatchStore& store,
                            std::span<const Triplet> triplets, const LossConfig& config) {
  const auto scores = score_triplets(model, store, triplets);
  std::vector<double> sp, sn;
  for (const auto& s : scores) {
    if (!std::isfinite(s.positive) || !std::isfinite(s.negative)) {
      throw TrainingError("non-finite similarity score while evaluating the loss");
    }
    sp.push_back(s.positive);
    sn.push_back(s.negative);
  }
  return forensic_loss(sp, sn, config);
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write history '" + path.string() + "'");
  out << "epoch,l_ts,l_ns,l_fl,triplet_count,wall_time,val_l_fl\n";
  out << std::setprecision(10);
  for (const auto& r : history.epochs) {
    out << r.epoch << ',' << r.l_ts << ',' << r.l_ns << ',' << r.l_fl << ',' << r.triplet_count << ','
        << r.wall_time << ',' << r.val_l_fl << '\n';
  }
  if (!out) throw IoError("failed writing history '" + path.string() + "'");
}

}  // namespace recap
