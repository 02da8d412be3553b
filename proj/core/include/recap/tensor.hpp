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

#include <algorithm>
#include <cstddef>
#include <new>
#include <string>
#include <vector>

namespace recap {

/// Cache-line aligned allocation. Vectorized reductions peel by address, so a
/// buffer whose alignment varies from run to run changes the summation order.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t n) noexcept { ::operator delete(p, n * sizeof(T), kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

template <typename T>
using Buffer = std::vector<T, AlignedAllocator<T>>;

/// Named flat parameter buffer. Shapes are tracked by the owning layer.
template <typename T>
struct Parameter {
  std::string name;
  Buffer<T> value;
  bool trainable = true;
};

/// Gradient buffers mirroring a parameter list.
template <typename T>
struct GradientSet {
  std::vector<Buffer<T>> slots;

  GradientSet() = default;
  explicit GradientSet(const std::vector<Parameter<T>>& params) {
    slots.reserve(params.size());
    for (const auto& p : params) slots.emplace_back(p.value.size(), T{0});
  }
  void zero() {
    for (auto& s : slots) std::fill(s.begin(), s.end(), T{0});
  }
};

}  // namespace recap
