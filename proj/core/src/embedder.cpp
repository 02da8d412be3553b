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
#include "recap/embedder.hpp"

#include <Eigen/Core>
#include <cmath>
#include <random>
#include <string>

#include "recap/error.hpp"

namespace recap {

namespace {

using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapF = Eigen::Map<MatF>;
using CMapF = Eigen::Map<const MatF>;
using VecF = Eigen::VectorXf;

constexpr int kKernel = 3;

int conv_out(int size) { return (size + 2 - kKernel) / 2 + 1; }

// 3x3, stride 2, zero padding 1.
void im2col(const float* in, int channels, int size, int out_size, float* col) {
  const int p = out_size * out_size;
  for (int c = 0; c < channels; ++c)
    for (int ky = 0; ky < kKernel; ++ky)
      for (int kx = 0; kx < kKernel; ++kx) {
        float* dst = col + static_cast<std::size_t>((c * kKernel + ky) * kKernel + kx) * p;
        for (int oy = 0; oy < out_size; ++oy) {
          const int y = 2 * oy + ky - 1;
          float* row = dst + oy * out_size;
          if (y < 0 || y >= size) {
            std::fill(row, row + out_size, 0.0f);
            continue;
          }
          const float* src = in + (static_cast<std::size_t>(c) * size + y) * size;
          for (int ox = 0; ox < out_size; ++ox) {
            const int x = 2 * ox + kx - 1;
            row[ox] = (x < 0 || x >= size) ? 0.0f : src[x];
          }
        }
      }
}

void col2im(const float* col, int channels, int size, int out_size, float* in) {
  const int p = out_size * out_size;
  std::fill(in, in + static_cast<std::size_t>(channels) * size * size, 0.0f);
  for (int c = 0; c < channels; ++c)
    for (int ky = 0; ky < kKernel; ++ky)
      for (int kx = 0; kx < kKernel; ++kx) {
        const float* src = col + static_cast<std::size_t>((c * kKernel + ky) * kKernel + kx) * p;
        for (int oy = 0; oy < out_size; ++oy) {
          const int y = 2 * oy + ky - 1;
          if (y < 0 || y >= size) continue;
          float* dst = in + (static_cast<std::size_t>(c) * size + y) * size;
          for (int ox = 0; ox < out_size; ++ox) {
            const int x = 2 * ox + kx - 1;
            if (x >= 0 && x < size) dst[x] += src[oy * out_size + ox];
          }
        }
      }
}

Buffer<float> to_input(const Image& patch) {
  if (patch.height != kPatchSize || patch.width != kPatchSize) {
    throw DataError("embedder expects 224x224 patches, got " + std::to_string(patch.height) + "x" +
                    std::to_string(patch.width));
  }
  const std::size_t plane = static_cast<std::size_t>(kPatchSize) * kPatchSize;
  Buffer<float> x(plane * kChannels);
  for (std::size_t i = 0; i < plane; ++i)
    for (int c = 0; c < kChannels; ++c)
      x[c * plane + i] = static_cast<float>(patch.pixels[i * kChannels + c]) / 255.0f - 0.5f;
  return x;
}

void init_normal(Buffer<float>& v, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (float& x : v) x = static_cast<float>(dist(rng));
}

}  // namespace

void validate(const EmbedderConfig& config) {
  if (config.backbone != "tiny_conv") {
    throw ConfigError("embedder.backbone: unknown backbone '" + config.backbone + "'");
  }
  if (config.channels.empty()) throw ConfigError("embedder.channels must not be empty");
  for (int c : config.channels)
    if (c < 1) throw ConfigError("embedder.channels entries must be >= 1");
  if (config.hidden_dim < 1) throw ConfigError("embedder.hidden_dim must be >= 1");
  if (config.embed_dim < 8) throw ConfigError("embedder.embed_dim must be >= 8");
}

Embedder::Embedder(const EmbedderConfig& config) : config_(config) {
  validate(config_);
  std::mt19937_64 rng(config_.init_seed);
  int in_channels = kChannels;
  int size = kPatchSize;
  for (std::size_t l = 0; l < config_.channels.size(); ++l) {
    const int out_channels = config_.channels[l];
    const int fan_in = in_channels * kKernel * kKernel;
    Parameter<float> w{"conv" + std::to_string(l) + ".weight",
                       Buffer<float>(static_cast<std::size_t>(out_channels) * fan_in), true};
    init_normal(w.value, std::sqrt(2.0 / fan_in), rng);
    Parameter<float> b{"conv" + std::to_string(l) + ".bias",
                       Buffer<float>(out_channels, 0.0f), true};
    params_.push_back(std::move(w));
    params_.push_back(std::move(b));
    convs_.push_back({in_channels, out_channels, size, conv_out(size)});
    in_channels = out_channels;
    size = conv_out(size);
  }
  head_begin_ = params_.size();
  Parameter<float> w1{"fc1.weight",
                      Buffer<float>(static_cast<std::size_t>(config_.hidden_dim) * in_channels), true};
  init_normal(w1.value, std::sqrt(2.0 / in_channels), rng);
  Parameter<float> w2{"fc2.weight",
                      Buffer<float>(static_cast<std::size_t>(config_.embed_dim) * config_.hidden_dim),
                      true};
  init_normal(w2.value, std::sqrt(1.0 / config_.hidden_dim), rng);
  params_.push_back(std::move(w1));
  params_.push_back({"fc1.bias", Buffer<float>(config_.hidden_dim, 0.0f), true});
  params_.push_back(std::move(w2));
  params_.push_back({"fc2.bias", Buffer<float>(config_.embed_dim, 0.0f), true});
  if (config_.freeze_backbone) {
    for (std::size_t i = 0; i < head_begin_; ++i) params_[i].trainable = false;
  }
}

std::vector<double> Embedder::forward(const Image& patch) const {
  Trace trace;
  return forward(patch, trace);
}

std::vector<double> Embedder::forward(const Image& patch, Trace& trace) const {
  trace.activations.assign(1, to_input(patch));
  Buffer<float> col;
  for (std::size_t l = 0; l < convs_.size(); ++l) {
    const auto& s = convs_[l];
    const int p = s.out_size * s.out_size;
    const int k = s.in_channels * kKernel * kKernel;
    col.resize(static_cast<std::size_t>(k) * p);
    im2col(trace.activations.back().data(), s.in_channels, s.in_size, s.out_size, col.data());
    Buffer<float> out(static_cast<std::size_t>(s.out_channels) * p);
    CMapF w(params_[2 * l].value.data(), s.out_channels, k);
    CMapF x(col.data(), k, p);
    MapF y(out.data(), s.out_channels, p);
    y.noalias() = w * x;
    const auto& bias = params_[2 * l + 1].value;
    for (int c = 0; c < s.out_channels; ++c) {
      float* row = out.data() + static_cast<std::size_t>(c) * p;
      for (int i = 0; i < p; ++i) row[i] = std::max(row[i] + bias[c], 0.0f);
    }
    trace.activations.push_back(std::move(out));
  }
  const auto& last = convs_.back();
  const int p = last.out_size * last.out_size;
  trace.pooled.assign(last.out_channels, 0.0f);
  for (int c = 0; c < last.out_channels; ++c) {
    const float* row = trace.activations.back().data() + static_cast<std::size_t>(c) * p;
    double acc = 0.0;
    for (int i = 0; i < p; ++i) acc += row[i];
    trace.pooled[c] = static_cast<float>(acc / p);
  }
  const auto& w1 = params_[head_begin_];
  const auto& b1 = params_[head_begin_ + 1];
  const auto& w2 = params_[head_begin_ + 2];
  const auto& b2 = params_[head_begin_ + 3];
  Eigen::Map<const VecF> pooled(trace.pooled.data(), last.out_channels);
  VecF hidden = CMapF(w1.value.data(), config_.hidden_dim, last.out_channels) * pooled +
                Eigen::Map<const VecF>(b1.value.data(), config_.hidden_dim);
  hidden = hidden.cwiseMax(0.0f);
  trace.hidden.assign(hidden.data(), hidden.data() + hidden.size());
  VecF e = CMapF(w2.value.data(), config_.embed_dim, config_.hidden_dim) * hidden +
           Eigen::Map<const VecF>(b2.value.data(), config_.embed_dim);
  return std::vector<double>(e.data(), e.data() + e.size());
}

void Embedder::backward(const Trace& trace, std::span<const double> d_embedding,
                        GradientSet<float>& grads) const {
  if (static_cast<int>(d_embedding.size()) != config_.embed_dim) {
    throw DataError("embedding gradient has the wrong length");
  }
  const int hidden_dim = config_.hidden_dim;
  const int pooled_dim = static_cast<int>(trace.pooled.size());
  VecF de(config_.embed_dim);
  for (int i = 0; i < config_.embed_dim; ++i) de[i] = static_cast<float>(d_embedding[i]);
  Eigen::Map<const VecF> hidden(trace.hidden.data(), hidden_dim);
  Eigen::Map<const VecF> pooled(trace.pooled.data(), pooled_dim);

  const std::size_t iw1 = head_begin_, ib1 = head_begin_ + 1, iw2 = head_begin_ + 2,
                    ib2 = head_begin_ + 3;
  MapF(grads.slots[iw2].data(), config_.embed_dim, hidden_dim).noalias() += de * hidden.transpose();
  Eigen::Map<VecF>(grads.slots[ib2].data(), config_.embed_dim) += de;
  VecF dh = CMapF(params_[iw2].value.data(), config_.embed_dim, hidden_dim).transpose() * de;
  for (int i = 0; i < hidden_dim; ++i)
    if (hidden[i] <= 0.0f) dh[i] = 0.0f;
  MapF(grads.slots[iw1].data(), hidden_dim, pooled_dim).noalias() += dh * pooled.transpose();
  Eigen::Map<VecF>(grads.slots[ib1].data(), hidden_dim) += dh;
  if (config_.freeze_backbone) return;

  VecF dpooled = CMapF(params_[iw1].value.data(), hidden_dim, pooled_dim).transpose() * dh;
  const auto& last = convs_.back();
  const int p_last = last.out_size * last.out_size;
  Buffer<float> dout(static_cast<std::size_t>(last.out_channels) * p_last);
  for (int c = 0; c < last.out_channels; ++c)
    std::fill_n(dout.begin() + static_cast<std::ptrdiff_t>(c) * p_last, p_last,
                dpooled[c] / static_cast<float>(p_last));

  Buffer<float> col, dcol, din;
  for (std::size_t li = convs_.size(); li-- > 0;) {
    const auto& s = convs_[li];
    const int p = s.out_size * s.out_size;
    const int k = s.in_channels * kKernel * kKernel;
    const auto& out = trace.activations[li + 1];
    for (std::size_t i = 0; i < dout.size(); ++i)
      if (out[i] <= 0.0f) dout[i] = 0.0f;
    col.resize(static_cast<std::size_t>(k) * p);
    im2col(trace.activations[li].data(), s.in_channels, s.in_size, s.out_size, col.data());
    CMapF x(col.data(), k, p);
    CMapF dy(dout.data(), s.out_channels, p);
    MapF(grads.slots[2 * li].data(), s.out_channels, k).noalias() += dy * x.transpose();
    Eigen::Map<VecF>(grads.slots[2 * li + 1].data(), s.out_channels) += dy.rowwise().sum();
    if (li == 0) break;
    dcol.resize(col.size());
    MapF(dcol.data(), k, p).noalias() =
        CMapF(params_[2 * li].value.data(), s.out_channels, k).transpose() * dy;
    din.resize(static_cast<std::size_t>(s.in_channels) * s.in_size * s.in_size);
    col2im(dcol.data(), s.in_channels, s.in_size, s.out_size, din.data());
    dout.swap(din);
  }
}

std::vector<Embedding> Embedder::embed(std::span<const Patch> patches) const {
  std::vector<Embedding> out(patches.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < patches.size(); ++i) {
    out[i].source = patches[i].source_id + "@" + std::to_string(patches[i].row) + "," +
                    std::to_string(patches[i].col);
    out[i].values = forward(patches[i].pixels);
  }
  return out;
}

std::vector<std::vector<double>> Embedder::embed_images(std::span<const Image* const> images) const {
  std::vector<std::vector<double>> out(images.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < images.size(); ++i) out[i] = forward(*images[i]);
  return out;
}

}  // namespace recap
