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

#include <vector>

#include "recap/image.hpp"

namespace recap {

/// Fraction of non-DC grayscale spectral energy at radial frequencies above
/// \p cutoff cycles per pixel (0.5 is Nyquist).
double high_frequency_energy_fraction(const Image& image, double cutoff = 0.25);

/// Power spectrum (bins 0..n/2) of the column-averaged grayscale profile,
/// i.e. of the horizontal luminance signal.
std::vector<double> horizontal_power_spectrum(const Image& image);

/// Period in pixels of the strongest non-DC bin of horizontal_power_spectrum.
double dominant_horizontal_period(const Image& image);

}  // namespace recap
