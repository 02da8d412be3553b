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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "recap/image.hpp"
#include "recap/tensor.hpp"

namespace recap {

struct EmbedderConfig {
  std::string backbone = "tiny_conv";
  std::vector<int> channels{8, 16, 32, 64};  // one stride-2 3x3 block each
  int hidden_dim = 512;
  int embed_dim = 256;
  bool freeze_backbone = false;
  std::uint64_t init_seed = 0;

  bool operator==(const EmbedderConfig&) const = default;
};

/// Throws ConfigError (unknown backbone, embed_dim < 8, ...).
void validate(const EmbedderConfig& config);

struct Embedding {
  std::string source;
  std::vector<double> values;
};

/// Patch-to-vector network: stride-2 conv blocks, global average pool, then
/// two fully connected layers. The same instance serves every triplet branch.
class Embedder {
 public:
  explicit Embedder(const EmbedderConfig& config);

  const EmbedderConfig& config() const noexcept { return config_; }
  int embed_dim() const noexcept { return config_.embed_dim; }

  /// Activations retained by a training forward pass.
  struct Trace {
    std::vector<Buffer<float>> activations;  // input, then each conv output
    Buffer<float> pooled;
    Buffer<float> hidden;
  };

  std::vector<double> forward(const Image& patch) const;
  std::vector<double> forward(const Image& patch, Trace& trace) const;

  /// Accumulates parameter gradients for dLoss/dEmbedding into \p grads.
  /// Frozen backbone parameters receive no gradient.
  void backward(const Trace& trace, std::span<const double> d_embedding,
                GradientSet<float>& grads) const;

  /// Order-preserving batch inference (parallel over patches when OpenMP is on).
  std::vector<Embedding> embed(std::span<const Patch> patches) const;
  std::vector<std::vector<double>> embed_images(std::span<const Image* const> images) const;

  std::vector<Parameter<float>>& parameters() noexcept { return params_; }
  const std::vector<Parameter<float>>& parameters() const noexcept { return params_; }

  /// Index of the first head parameter; everything before it is backbone.
  std::size_t head_begin() const noexcept { return head_begin_; }

 private:
  struct ConvShape {
    int in_channels, out_channels, in_size, out_size;
  };

  EmbedderConfig config_;
  std::vector<Parameter<float>> params_;
  std::vector<ConvShape> convs_;
  std::size_t head_begin_ = 0;
};

}  // namespace recap
