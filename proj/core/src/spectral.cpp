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
#include "recap/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>

#include "recap/error.hpp"

namespace recap {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanGuard {
  fftw_plan plan = nullptr;
  ~PlanGuard() {
    if (plan) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

}  // namespace

double high_frequency_energy_fraction(const Image& image, double cutoff) {
  const int h = image.height, w = image.width;
  if (h < 2 || w < 2) throw DataError("image too small for spectral analysis");
  std::vector<double> gray = grayscale(image);
  const int wc = w / 2 + 1;
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(h) * wc);
  PlanGuard guard;
  {
    std::lock_guard lock(planner_mutex());
    guard.plan = fftw_plan_dft_r2c_2d(h, w, gray.data(),
                                      reinterpret_cast<fftw_complex*>(spec.data()), FFTW_ESTIMATE);
  }
  fftw_execute(guard.plan);
  double total = 0.0, high = 0.0;
  for (int ky = 0; ky < h; ++ky) {
    const double fy = static_cast<double>(ky <= h / 2 ? ky : ky - h) / h;
    for (int kx = 0; kx < wc; ++kx) {
      if (ky == 0 && kx == 0) continue;
      const double fx = static_cast<double>(kx) / w;
      const bool mirrored = kx > 0 && !(w % 2 == 0 && kx == w / 2);
      const double e = std::norm(spec[static_cast<std::size_t>(ky) * wc + kx]) * (mirrored ? 2.0 : 1.0);
      total += e;
      if (std::sqrt(fx * fx + fy * fy) > cutoff) high += e;
    }
  }
  return total > 0.0 ? high / total : 0.0;
}

std::vector<double> horizontal_power_spectrum(const Image& image) {
  const int h = image.height, w = image.width;
  const auto gray = grayscale(image);
  std::vector<double> profile(w, 0.0);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) profile[c] += gray[static_cast<std::size_t>(r) * w + c] / h;
  std::vector<std::complex<double>> spec(w / 2 + 1);
  PlanGuard guard;
  {
    std::lock_guard lock(planner_mutex());
    guard.plan = fftw_plan_dft_r2c_1d(w, profile.data(), reinterpret_cast<fftw_complex*>(spec.data()),
                                      FFTW_ESTIMATE);
  }
  fftw_execute(guard.plan);
  std::vector<double> power(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) power[k] = std::norm(spec[k]);
  return power;
}

double dominant_horizontal_period(const Image& image) {
  const auto power = horizontal_power_spectrum(image);
  std::size_t best = 1;
  for (std::size_t k = 1; k < power.size(); ++k)
    if (power[k] > power[best]) best = k;
  return static_cast<double>(image.width) / static_cast<double>(best);
}

}  // namespace recap
