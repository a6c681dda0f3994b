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

#include "lshocr/imgproc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "lshocr/rng.hpp"

namespace lshocr::imgproc {

void BinarizationParams::validate() const {
  if (window < 3 || window % 2 == 0) throw Error("binarization window must be odd and >= 3");
  if (!(k > 0.0 && k < 1.0)) throw Error("binarization k must lie in (0,1)");
  if (!(R > 0.0)) throw Error("binarization R must be positive");
}

void AugmentParams::validate() const {
  for (const Range* r : {&blur_sigma, &speckle_density, &rotation_deg, &translate_px, &threshold_noise}) {
    if (!(r->lo >= 0.0 && r->lo <= r->hi)) throw Error("augmentation ranges must satisfy 0 <= lo <= hi");
  }
}

void NlbinParams::validate() const {
  if (!(low_percentile >= 0.0 && low_percentile < high_percentile && high_percentile <= 100.0)) {
    throw Error("nlbin percentiles must satisfy 0 <= low < high <= 100");
  }
  if (bg_window < 1) throw Error("nlbin background window must be positive");
  if (!(bg_percentile >= 0.0 && bg_percentile <= 100.0)) throw Error("nlbin background percentile out of range");
}

Raster to_grayscale(const ColorRaster& img) {
  Raster out(img.rows, img.cols);
  for (int r = 0; r < img.rows; ++r) {
    for (int c = 0; c < img.cols; ++c) {
      const float* p = img.pixel(r, c);
      out.at(r, c) = 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
    }
  }
  return out;
}

namespace {

// Integral images of k and k^2 over a clamp-padded copy of the image, so
// every window is a full w x w rectangle.
struct WindowSums {
  int rows, cols, window;
  std::vector<std::int64_t> s1, s2;  // (rows+w) x (cols+w)

  WindowSums(const Raster& img, int w) : rows(img.rows), cols(img.cols), window(w) {
    const int r = w / 2;
    const int pr = rows + 2 * r, pc = cols + 2 * r;
    const std::size_t stride = pc + 1;
    s1.assign(stride * (pr + 1), 0);
    s2.assign(stride * (pr + 1), 0);
    for (int y = 0; y < pr; ++y) {
      const int sy = std::clamp(y - r, 0, rows - 1);
      std::int64_t row1 = 0, row2 = 0;
      for (int x = 0; x < pc; ++x) {
        const int sx = std::clamp(x - r, 0, cols - 1);
        const std::int64_t v = level8(img.at(sy, sx));
        row1 += v;
        row2 += v * v;
        s1[(y + 1) * stride + x + 1] = s1[y * stride + x + 1] + row1;
        s2[(y + 1) * stride + x + 1] = s2[y * stride + x + 1] + row2;
      }
    }
  }

  // Sums over the window centered on (y, x) in original coordinates.
  std::pair<std::int64_t, std::int64_t> at(int y, int x) const {
    const std::size_t stride = cols + 2 * (window / 2) + 1;
    const std::size_t y0 = y, x0 = x, y1 = y + window, x1 = x + window;
    auto rect = [&](const std::vector<std::int64_t>& s) {
      return s[y1 * stride + x1] - s[y0 * stride + x1] - s[y1 * stride + x0] + s[y0 * stride + x0];
    };
    return {rect(s1), rect(s2)};
  }
};

}  // namespace

// Mean and deviation in [0,1] intensity units from exact integer window
// sums.
static inline std::pair<double, double> window_stats(std::int64_t s1, std::int64_t s2, std::int64_t n) {
  const double mean = static_cast<double>(s1) / static_cast<double>(n) / 255.0;
  const std::int64_t num = s2 * n - s1 * s1;  // n^2 * var * 255^2, exact
  const double var = static_cast<double>(num) / (static_cast<double>(n) * static_cast<double>(n)) / (255.0 * 255.0);
  return {mean, std::sqrt(std::max(var, 0.0))};
}

Raster sauvola(const Raster& img, const BinarizationParams& p) {
  p.validate();
  Raster out(img.rows, img.cols, 1.0f);
  if (img.empty()) return out;
  const WindowSums sums(img, p.window);
  const std::int64_t n = static_cast<std::int64_t>(p.window) * p.window;
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      const auto [s1, s2] = sums.at(y, x);
      const auto [m, s] = window_stats(s1, s2, n);
      const double t = m * (1.0 + p.k * (s / p.R - 1.0));
      const double v = level8(img.at(y, x)) / 255.0;
      out.at(y, x) = v > t ? 1.0f : 0.0f;
    }
  }
  return out;
}

Raster wolf(const Raster& img, const BinarizationParams& p) {
  p.validate();
  Raster out(img.rows, img.cols, 1.0f);
  if (img.empty()) return out;
  const WindowSums sums(img, p.window);
  const std::int64_t n = static_cast<std::int64_t>(p.window) * p.window;
  std::vector<double> mean(img.px.size()), dev(img.px.size());
  double max_dev = 0.0;
  int min_level = 255;
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      const auto [s1, s2] = sums.at(y, x);
      const auto [m, s] = window_stats(s1, s2, n);
      const std::size_t i = static_cast<std::size_t>(y) * img.cols + x;
      mean[i] = m;
      dev[i] = s;
      max_dev = std::max(max_dev, s);
      min_level = std::min(min_level, level8(img.px[i]));
    }
  }
  const double global_min = min_level / 255.0;
  for (std::size_t i = 0; i < img.px.size(); ++i) {
    const double ratio = max_dev > 0.0 ? dev[i] / max_dev : 0.0;
    // (1-k) m + k M written so that M == m gives T == m exactly.
    const double t = mean[i] + p.k * (global_min - mean[i]) + p.k * ratio * (mean[i] - global_min);
    out.px[i] = level8(img.px[i]) / 255.0 > t ? 1.0f : 0.0f;
  }
  return out;
}

std::size_t percentile_rank(std::size_t n, double percentile) {
  if (n == 0) return 0;
  const auto rank = static_cast<std::size_t>(std::floor(percentile / 100.0 * static_cast<double>(n - 1)));
  return std::min(rank, n - 1);
}

Raster percentile_filter(const Raster& img, int window, double percentile) {
  // Sliding 256-bin histogram along each row; exact on the 8-bit grid.
  Raster out(img.rows, img.cols);
  if (img.empty()) return out;
  const int r = window / 2;
  const int span = 2 * r + 1;
  const std::size_t n = static_cast<std::size_t>(span) * span;
  const std::size_t rank = percentile_rank(n, percentile);
  std::vector<int> levels(img.px.size());
  for (std::size_t i = 0; i < levels.size(); ++i) levels[i] = level8(img.px[i]);
  auto level = [&](int y, int x) {
    return levels[static_cast<std::size_t>(std::clamp(y, 0, img.rows - 1)) * img.cols + std::clamp(x, 0, img.cols - 1)];
  };
  for (int y = 0; y < img.rows; ++y) {
    std::array<int, 256> hist{};
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) ++hist[level(y + dy, dx)];
    }
    for (int x = 0; x < img.cols; ++x) {
      if (x > 0) {
        for (int dy = -r; dy <= r; ++dy) {
          --hist[level(y + dy, x - 1 - r)];
          ++hist[level(y + dy, x + r)];
        }
      }
      std::size_t seen = 0;
      int b = 0;
      for (; b < 256; ++b) {
        seen += hist[b];
        if (seen > rank) break;
      }
      out.at(y, x) = static_cast<float>(b) / 255.0f;
    }
  }
  return out;
}

NlbinResult nlbin(const Raster& img, const NlbinParams& p) {
  p.validate();
  NlbinResult out{Raster(img.rows, img.cols, 1.0f), Raster(img.rows, img.cols, 1.0f)};
  if (img.empty()) return out;
  const Raster bg = percentile_filter(img, p.bg_window, p.bg_percentile);
  constexpr float kEps = 1e-6f;
  std::vector<float> flat(img.px.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const float v = static_cast<float>(level8(img.px[i])) / 255.0f;
    flat[i] = std::clamp(v / std::max(bg.px[i], kEps), 0.0f, 1.0f);
  }
  std::vector<float> sorted = flat;
  const auto nth = [&](double pct) {
    const auto k = percentile_rank(sorted.size(), pct);
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
    return sorted[k];
  };
  const float lo = nth(p.low_percentile);
  const float hi = nth(p.high_percentile);
  if (!(hi > lo)) return out;  // constant image: all white
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const float v = std::clamp((flat[i] - lo) / (hi - lo), 0.0f, 1.0f);
    out.nrm.px[i] = v;
    out.bin.px[i] = v > p.threshold ? 1.0f : 0.0f;
  }
  return out;
}

namespace {

float sample_bilinear(const Raster& img, double y, double x, float fill) {
  const double fy = std::floor(y), fx = std::floor(x);
  const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
  const double ay = y - fy, ax = x - fx;
  auto px = [&](int yy, int xx) -> double {
    if (yy < 0 || xx < 0 || yy >= img.rows || xx >= img.cols) return fill;
    return img.at(yy, xx);
  };
  const double top = px(y0, x0) * (1 - ax) + px(y0, x0 + 1) * ax;
  const double bot = px(y0 + 1, x0) * (1 - ax) + px(y0 + 1, x0 + 1) * ax;
  return static_cast<float>(top * (1 - ay) + bot * ay);
}

}  // namespace

Raster normalize_height(const Raster& img, int target_height) {
  if (target_height < 8) throw Error("target height must be at least 8");
  if (img.empty()) throw Error("cannot rescale an empty raster");
  if (img.rows == target_height) return img;
  const double scale = static_cast<double>(target_height) / img.rows;
  const int width = std::max(1, static_cast<int>(std::lround(img.cols * scale)));
  Raster out(target_height, width);
  const double sy = static_cast<double>(img.rows) / target_height;
  const double sx = static_cast<double>(img.cols) / width;
  for (int y = 0; y < target_height; ++y) {
    const double src_y = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.rows - 1.0);
    for (int x = 0; x < width; ++x) {
      const double src_x = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.cols - 1.0);
      out.at(y, x) = std::clamp(sample_bilinear(img, src_y, src_x, 1.0f), 0.0f, 1.0f);
    }
  }
  return out;
}

namespace {

Raster rotate_translate(const Raster& img, double degrees, double tx, double ty) {
  Raster out(img.rows, img.cols);
  const double th = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(th), s = std::sin(th);
  const double cy = (img.rows - 1) / 2.0, cx = (img.cols - 1) / 2.0;
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      // Inverse map: destination -> source.
      const double dx = x - cx - tx, dy = y - cy - ty;
      const double src_x = c * dx + s * dy + cx;
      const double src_y = -s * dx + c * dy + cy;
      out.at(y, x) = sample_bilinear(img, src_y, src_x, 1.0f);
    }
  }
  return out;
}

Raster gaussian_blur(const Raster& img, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) total += kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& k : kernel) k /= total;
  Raster tmp(img.rows, img.cols), out(img.rows, img.cols);
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * img.at(y, std::clamp(x + i, 0, img.cols - 1));
      tmp.at(y, x) = static_cast<float>(acc);
    }
  }
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp.at(std::clamp(y + i, 0, img.rows - 1), x);
      out.at(y, x) = static_cast<float>(acc);
    }
  }
  return out;
}

}  // namespace

Raster augment(const Raster& img, const AugmentParams& p, std::uint64_t seed, std::uint64_t stream_id) {
  p.validate();
  KeyedRng rng(seed, stream_id);
  // Fixed draw order keeps outputs stable when a stage is a no-op.
  const double rot = rng.uniform(p.rotation_deg.lo, p.rotation_deg.hi) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
  const double tx = rng.uniform(p.translate_px.lo, p.translate_px.hi) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
  const double ty = rng.uniform(p.translate_px.lo, p.translate_px.hi) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
  const double sigma = rng.uniform(p.blur_sigma.lo, p.blur_sigma.hi);
  const double density = rng.uniform(p.speckle_density.lo, p.speckle_density.hi);
  const double noise = rng.uniform(p.threshold_noise.lo, p.threshold_noise.hi);

  Raster out = img;
  if (rot != 0.0 || tx != 0.0 || ty != 0.0) out = rotate_translate(out, rot, tx, ty);
  if (sigma > 0.0) out = gaussian_blur(out, sigma);
  if (density > 0.0) {
    // At least one blob whenever speckle is enabled.
    const auto blobs = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(density * out.px.size())));
    for (std::uint64_t b = 0; b < blobs; ++b) {
      const int cy = static_cast<int>(rng.below(out.rows));
      const int cx = static_cast<int>(rng.below(out.cols));
      const int radius = static_cast<int>(rng.below(2));
      const float ink = rng.uniform() < 0.5 ? 0.0f : 1.0f;
      for (int y = std::max(0, cy - radius); y <= std::min(out.rows - 1, cy + radius); ++y) {
        for (int x = std::max(0, cx - radius); x <= std::min(out.cols - 1, cx + radius); ++x) {
          if ((y - cy) * (y - cy) + (x - cx) * (x - cx) <= radius * radius) out.at(y, x) = ink;
        }
      }
    }
  }
  if (noise > 0.0) {
    for (float& v : out.px) v += static_cast<float>(rng.uniform(-noise, noise));
  }
  for (float& v : out.px) v = std::clamp(v, 0.0f, 1.0f);
  return out;
}

}  // namespace lshocr::imgproc
