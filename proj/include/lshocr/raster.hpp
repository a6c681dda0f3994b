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

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "lshocr/error.hpp"

namespace lshocr {

// Grayscale image, row-major, intensities in [0,1] (0 = ink, 1 = paper).
struct Raster {
  int rows = 0;
  int cols = 0;
  std::vector<float> px;

  Raster() = default;
  Raster(int r, int c, float fill = 1.0f) : rows(r), cols(c), px(static_cast<std::size_t>(r) * c, fill) {
    if (r < 0 || c < 0) throw Error("raster dimensions must be non-negative");
  }

  float& at(int r, int c) { return px[static_cast<std::size_t>(r) * cols + c]; }
  float at(int r, int c) const { return px[static_cast<std::size_t>(r) * cols + c]; }
  std::span<const float> row(int r) const {
    return {px.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
  bool empty() const { return rows == 0 || cols == 0; }

  bool operator==(const Raster&) const = default;
};

// Three-channel image, interleaved RGB, channels in [0,1].
struct ColorRaster {
  int rows = 0;
  int cols = 0;
  std::vector<float> rgb;

  ColorRaster() = default;
  ColorRaster(int r, int c) : rows(r), cols(c), rgb(static_cast<std::size_t>(r) * c * 3, 1.0f) {}

  float* pixel(int r, int c) { return rgb.data() + (static_cast<std::size_t>(r) * cols + c) * 3; }
  const float* pixel(int r, int c) const { return rgb.data() + (static_cast<std::size_t>(r) * cols + c) * 3; }
};

// Snap an intensity to the nearest 8-bit level. Rasters that pass through
// PNG storage hold exactly these values.
inline float quantize8(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<float>(static_cast<int>(c * 255.0f + 0.5f)) / 255.0f;
}

inline int level8(float v) { return static_cast<int>(std::clamp(v, 0.0f, 1.0f) * 255.0f + 0.5f); }

}  // namespace lshocr
