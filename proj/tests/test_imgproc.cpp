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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lshocr/error.hpp"
#include "lshocr/imgproc.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace lshocr;
using namespace lshocr::imgproc;
using namespace lshocr::oracles;

namespace {

bool two_valued(const Raster& r) {
  return std::all_of(r.px.begin(), r.px.end(), [](float v) { return v == 0.0f || v == 1.0f; });
}

Raster step_edge(int rows, int cols) {
  Raster img(rows, cols);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) img.at(y, x) = quantize8(x < cols / 2 ? 0.2f : 0.9f);
  }
  return img;
}

}  // namespace

TEST_CASE("grayscale conversion") {
  ColorRaster c(1, 3);
  const float px[][3] = {{1, 1, 1}, {1, 0, 0}, {0.2f, 0.4f, 0.6f}};
  for (int i = 0; i < 3; ++i) std::copy(px[i], px[i] + 3, c.pixel(0, i));
  const Raster g = to_grayscale(c);
  CHECK(g.at(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(g.at(0, 1) == doctest::Approx(0.299).epsilon(1e-6));
  CHECK(g.at(0, 2) == doctest::Approx(0.299 * 0.2 + 0.587 * 0.4 + 0.114 * 0.6).epsilon(1e-6));
}

TEST_CASE("Sauvola closed forms") {
  const BinarizationParams p{31, 0.5, 0.5};
  const Raster gray(10, 10, 0.5f);
  const Raster b = sauvola(gray, p);
  CHECK(std::all_of(b.px.begin(), b.px.end(), [](float v) { return v == 1.0f; }));
  const Raster black(10, 10, 0.0f);
  const Raster bb = sauvola(black, p);
  CHECK(std::all_of(bb.px.begin(), bb.px.end(), [](float v) { return v == 0.0f; }));

  // Every 31-px window straddles the edge; a window over flat paper or
  // flat ink alone has s = 0 and thresholds below its mean.
  const Raster edge = step_edge(16, 24);
  const Raster e = sauvola(edge, sauvola_defaults());
  CHECK(e == naive_sauvola(edge, sauvola_defaults()));
  for (int y = 0; y < 16; ++y) {
    CHECK(e.at(y, 0) == 0.0f);
    CHECK(e.at(y, 23) == 1.0f);
  }
  const Raster wide = step_edge(16, 64);
  CHECK(sauvola(wide, sauvola_defaults()) == naive_sauvola(wide, sauvola_defaults()));
}

TEST_CASE("Wolf degenerate and edge images") {
  const Raster gray(8, 8, 0.5f);
  const Raster w = wolf(gray, wolf_defaults());
  CHECK(std::all_of(w.px.begin(), w.px.end(), [](float v) { return v == 0.0f; }));
  const Raster edge = step_edge(16, 64);
  CHECK(wolf(edge, wolf_defaults()) == naive_wolf(edge, wolf_defaults()));
  CHECK(two_valued(wolf(edge, wolf_defaults())));
}

TEST_CASE("integral-image binarization equals the naive route") {
  KeyedRng rng(21, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const int rows = 1 + static_cast<int>(rng.below(40)), cols = 1 + static_cast<int>(rng.below(90));
    const Raster img = testing::random_raster(rng, rows, cols, trial % 2 == 0);
    const BinarizationParams p{3 + 2 * static_cast<int>(rng.below(8)), 0.05 + 0.9 * rng.uniform(), 0.5};
    const Raster s = sauvola(img, p);
    REQUIRE(s == naive_sauvola(img, p));
    REQUIRE(two_valued(s));
    REQUIRE(wolf(img, p) == naive_wolf(img, p));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(sauvola(Raster(4, 4), {4, 0.3, 0.5}), Error);
  CHECK_THROWS_AS(sauvola(Raster(4, 4), {5, 1.0, 0.5}), Error);
  CHECK_THROWS_AS(wolf(Raster(4, 4), {5, 0.3, 0.0}), Error);
  AugmentParams bad;
  bad.blur_sigma = {1.0, 0.5};
  CHECK_THROWS_AS(augment(Raster(4, 4), bad, 1, 1), Error);
}

TEST_CASE("percentile filter and nlbin") {
  CHECK(percentile_rank(9, 50) == 4);
  CHECK(percentile_rank(10, 80) == 7);
  CHECK(percentile_rank(1, 99) == 0);
  KeyedRng rng(22, 0);
  const Raster img = testing::random_raster(rng, 13, 29);
  CHECK(percentile_filter(img, 5, 80) == naive_percentile(img, 5, 80));
  CHECK(percentile_filter(img, 1, 30) == img);

  const auto flat = nlbin(Raster(12, 30, 0.6f), {});
  CHECK(flat.nrm == Raster(12, 30, 1.0f));
  CHECK(flat.bin == Raster(12, 30, 1.0f));

  // Dark strokes on a horizontal brightness gradient.
  Raster page(20, 80);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 80; ++x) {
      const float bg = 0.55f + 0.4f * x / 79.0f;
      const bool ink = (x % 9 < 2) && y > 4 && y < 15;
      page.at(y, x) = quantize8(ink ? 0.1f : bg);
    }
  }
  const NlbinParams np;
  const auto res = nlbin(page, np);
  CHECK(std::all_of(res.nrm.px.begin(), res.nrm.px.end(), [](float v) { return v >= 0.0f && v <= 1.0f; }));
  CHECK(two_valued(res.bin));
  // Oracle: same pipeline over a naive percentile background.
  const Raster bg = naive_percentile(page, np.bg_window, np.bg_percentile);
  std::vector<float> flatv(page.px.size());
  for (std::size_t i = 0; i < flatv.size(); ++i) {
    flatv[i] = std::clamp(static_cast<float>(level8(page.px[i])) / 255.0f / std::max(bg.px[i], 1e-6f), 0.0f, 1.0f);
  }
  std::vector<float> sorted = flatv;
  std::sort(sorted.begin(), sorted.end());
  const float lo = sorted[percentile_rank(sorted.size(), np.low_percentile)];
  const float hi = sorted[percentile_rank(sorted.size(), np.high_percentile)];
  for (std::size_t i = 0; i < flatv.size(); ++i) {
    const float v = std::clamp((flatv[i] - lo) / (hi - lo), 0.0f, 1.0f);
    REQUIRE(res.bin.px[i] == (v > np.threshold ? 1.0f : 0.0f));
  }
  // Ink columns come out black, background white.
  CHECK(res.bin.at(10, 0) == 0.0f);
  CHECK(res.bin.at(10, 5) == 1.0f);
  CHECK(res.bin.at(10, 76) == 1.0f);
}

TEST_CASE("height normalization") {
  CHECK(normalize_height(Raster(96, 200), 48).cols == 100);
  KeyedRng rng(23, 0);
  const Raster same = testing::random_raster(rng, 48, 100);
  CHECK(normalize_height(same, 48) == same);
  const Raster odd = normalize_height(Raster(47, 99), 48);
  CHECK(odd.rows == 48);
  CHECK(odd.cols == 101);
  CHECK(normalize_height(Raster(40, 1), 8).cols == 1);
  const Raster twice = normalize_height(normalize_height(testing::random_raster(rng, 30, 70), 20), 20);
  CHECK(twice.rows == 20);
  CHECK_THROWS_AS(normalize_height(same, 7), Error);
  // Exact halving of a constant image keeps its value.
  const Raster halved = normalize_height(Raster(96, 200, 0.25f), 48);
  CHECK(std::all_of(halved.px.begin(), halved.px.end(), [](float v) { return std::abs(v - 0.25f) < 1e-6f; }));
}

TEST_CASE("augmentation") {
  KeyedRng rng(24, 0);
  const Raster img = testing::random_raster(rng, 20, 60);
  CHECK(augment(img, AugmentParams::identity(), 42, 7) == img);
  const AugmentParams def;
  const Raster a = augment(img, def, 42, 7);
  CHECK(a == augment(img, def, 42, 7));
  CHECK(a.rows == img.rows);
  CHECK(augment(img, def, 42, 8) != a);
  CHECK(std::all_of(a.px.begin(), a.px.end(), [](float v) { return v >= 0.0f && v <= 1.0f; }));

  AugmentParams speckle = AugmentParams::identity();
  speckle.speckle_density = {1e-3, 2e-3};
  const Raster white(20, 60, 1.0f);
  int changed = 0;
  for (std::uint64_t s = 0; s < 8; ++s) changed += augment(white, speckle, 42, s) != white ? 1 : 0;
  CHECK(changed >= 1);
}
