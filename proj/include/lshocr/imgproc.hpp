// Copyright 2026 The lshocr Authors.
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
#include <utility>

#include "lshocr/raster.hpp"

namespace lshocr::imgproc {

// Binarizers operate at 8-bit intensity resolution: inputs are snapped to
// the nearest k/255 level, so windowed sums are exact integers.
struct BinarizationParams {
  int window = 31;  // odd, >= 3
  double k = 0.34;
  double R = 0.5;  // Sauvola dynamic range, intensity units

  void validate() const;
};

inline BinarizationParams sauvola_defaults() { return {31, 0.34, 0.5}; }
inline BinarizationParams wolf_defaults() { return {31, 0.5, 0.5}; }

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct AugmentParams {
  Range blur_sigma{0.0, 1.2};
  Range speckle_density{0.0, 2e-3};
  Range rotation_deg{0.0, 1.5};  // magnitude; sign drawn separately
  Range translate_px{0.0, 2.0};  // magnitude; sign drawn separately
  Range threshold_noise{0.0, 0.1};

  static AugmentParams identity() { return {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}}; }
  void validate() const;
};

struct NlbinParams {
  double low_percentile = 5.0;
  double high_percentile = 90.0;
  int bg_window = 31;
  double bg_percentile = 80.0;
  double threshold = 0.5;

  void validate() const;
};

Raster to_grayscale(const ColorRaster& img);

// T = m * (1 + k * (s / R - 1)); pixel > T -> white.
Raster sauvola(const Raster& img, const BinarizationParams& params);

// T = (1-k) m + k M + k (s/S)(m - M); pixel > T -> white. s/S := 0 when S == 0.
Raster wolf(const Raster& img, const BinarizationParams& params);

struct NlbinResult {
  Raster nrm;
  Raster bin;
};
NlbinResult nlbin(const Raster& img, const NlbinParams& params);

// Per-pixel percentile over a clamp-to-edge window of side `window`.
Raster percentile_filter(const Raster& img, int window, double percentile);

// Element of rank floor(p/100 * (n-1)) in sorted order.
std::size_t percentile_rank(std::size_t n, double percentile);

Raster normalize_height(const Raster& img, int target_height);

// Rotation+translation, Gaussian blur, speckle, threshold noise; every draw
// comes from KeyedRng(seed, stream_id).
Raster augment(const Raster& img, const AugmentParams& params, std::uint64_t seed, std::uint64_t stream_id);

}  // namespace lshocr::imgproc
