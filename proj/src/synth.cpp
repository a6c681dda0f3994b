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

#include "lshocr/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string_view>

#include "lshocr/rng.hpp"
#include "lshocr/utf8.hpp"

namespace lshocr::synth {
namespace {

constexpr int kBaseRows = 9;
constexpr int kBaseCols = 5;

// 5x9 lowercase master font. Rows 0-1 ascenders, 2-6 x-height, 7-8 descenders.
constexpr std::array<std::string_view, 26> kFont = {
    // a
    "....."
    "....."
    ".###."
    "....#"
    ".####"
    "#...#"
    ".####"
    "....."
    ".....",
    // b
    "#...."
    "#...."
    "####."
    "#...#"
    "#...#"
    "#...#"
    "####."
    "....."
    ".....",
    // c
    "....."
    "....."
    ".###."
    "#...."
    "#...."
    "#...."
    ".###."
    "....."
    ".....",
    // d
    "....#"
    "....#"
    ".####"
    "#...#"
    "#...#"
    "#...#"
    ".####"
    "....."
    ".....",
    // e
    "....."
    "....."
    ".###."
    "#...#"
    "#####"
    "#...."
    ".###."
    "....."
    ".....",
    // f
    "..##."
    ".#..."
    "####."
    ".#..."
    ".#..."
    ".#..."
    ".#..."
    "....."
    ".....",
    // g
    "....."
    "....."
    ".####"
    "#...#"
    "#...#"
    ".####"
    "....#"
    "....#"
    ".###.",
    // h
    "#...."
    "#...."
    "####."
    "#...#"
    "#...#"
    "#...#"
    "#...#"
    "....."
    ".....",
    // i
    "..#.."
    "....."
    ".##.."
    "..#.."
    "..#.."
    "..#.."
    ".###."
    "....."
    ".....",
    // j
    "...#."
    "....."
    "..##."
    "...#."
    "...#."
    "...#."
    "...#."
    "#..#."
    ".##..",
    // k
    "#...."
    "#...."
    "#..#."
    "#.#.."
    "##..."
    "#.#.."
    "#..#."
    "....."
    ".....",
    // l
    ".##.."
    "..#.."
    "..#.."
    "..#.."
    "..#.."
    "..#.."
    ".###."
    "....."
    ".....",
    // m
    "....."
    "....."
    "##.#."
    "#.#.#"
    "#.#.#"
    "#.#.#"
    "#.#.#"
    "....."
    ".....",
    // n
    "....."
    "....."
    "####."
    "#...#"
    "#...#"
    "#...#"
    "#...#"
    "....."
    ".....",
    // o
    "....."
    "....."
    ".###."
    "#...#"
    "#...#"
    "#...#"
    ".###."
    "....."
    ".....",
    // p
    "....."
    "....."
    "####."
    "#...#"
    "#...#"
    "####."
    "#...."
    "#...."
    "#....",
    // q
    "....."
    "....."
    ".####"
    "#...#"
    "#...#"
    ".####"
    "....#"
    "....#"
    "....#",
    // r
    "....."
    "....."
    "#.##."
    "##..."
    "#...."
    "#...."
    "#...."
    "....."
    ".....",
    // s
    "....."
    "....."
    ".####"
    "#...."
    ".###."
    "....#"
    "####."
    "....."
    ".....",
    // t
    ".#..."
    ".#..."
    "####."
    ".#..."
    ".#..."
    ".#..#"
    "..##."
    "....."
    ".....",
    // u
    "....."
    "....."
    "#...#"
    "#...#"
    "#...#"
    "#..##"
    ".##.#"
    "....."
    ".....",
    // v
    "....."
    "....."
    "#...#"
    "#...#"
    "#...#"
    ".#.#."
    "..#.."
    "....."
    ".....",
    // w
    "....."
    "....."
    "#...#"
    "#...#"
    "#.#.#"
    "#.#.#"
    ".#.#."
    "....."
    ".....",
    // x
    "....."
    "....."
    "#...#"
    ".#.#."
    "..#.."
    ".#.#."
    "#...#"
    "....."
    ".....",
    // y
    "....."
    "....."
    "#...#"
    "#...#"
    "#...#"
    ".####"
    "....#"
    "....#"
    ".###.",
    // z
    "....."
    "....."
    "#####"
    "...#."
    "..#.."
    ".#..."
    "#####"
    "....."
    ".....",
};

using Bitmap = std::array<std::array<bool, kBaseCols>, kBaseRows>;

Bitmap base_glyph(int index) {
  const std::string_view s = kFont[index];
  Bitmap bm{};
  for (int r = 0; r < kBaseRows; ++r) {
    for (int c = 0; c < kBaseCols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * kBaseCols + c;
      bm[r][c] = i < s.size() && s[i] == '#';
    }
  }
  return bm;
}

// Columns [first, last] holding ink.
std::pair<int, int> ink_columns(const Bitmap& bm) {
  int first = kBaseCols, last = -1;
  for (int c = 0; c < kBaseCols; ++c) {
    for (int r = 0; r < kBaseRows; ++r) {
      if (bm[r][c]) {
        first = std::min(first, c);
        last = std::max(last, c);
      }
    }
  }
  return {first, last};
}

bool ink(const Bitmap& bm, int r, int c) { return r >= 0 && r < kBaseRows && c >= 0 && c < kBaseCols && bm[r][c]; }

constexpr int kMargin = 1;
constexpr int kLineHeight = kBaseRows * 2 + 2 * kMargin;

float level(int k) { return static_cast<float>(k) / 255.0f; }

Raster block_glyph(const Bitmap& bm, int sx, float ink_level) {
  const auto [c0, c1] = ink_columns(bm);
  Raster g(kLineHeight, (c1 - c0 + 1) * sx);
  for (int r = 0; r < kBaseRows; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (!bm[r][c]) continue;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < sx; ++dx) g.at(kMargin + 2 * r + dy, (c - c0) * sx + dx) = ink_level;
      }
    }
  }
  return g;
}

// Hairline strokes with serifs at the ends of vertical strokes.
Raster serif_glyph(const Bitmap& bm) {
  const auto [c0, c1] = ink_columns(bm);
  const int pad = 1;
  Raster g(kLineHeight, (c1 - c0 + 1) * 2 + 2 * pad);
  auto put = [&](int y, int x) {
    if (y >= 0 && y < g.rows && x >= 0 && x < g.cols) g.at(y, x) = 0.0f;
  };
  for (int r = 0; r < kBaseRows; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (!bm[r][c]) continue;
      const int x = pad + (c - c0) * 2;
      const int y = kMargin + 2 * r;
      put(y, x);
      put(y + 1, x);
      if (ink(bm, r, c + 1)) {
        put(y, x + 1);
        put(y + 1, x + 1);
      }
      const bool vertical = ink(bm, r - 1, c) || ink(bm, r + 1, c);
      if (vertical && !ink(bm, r + 1, c) && !ink(bm, r, c - 1) && !ink(bm, r, c + 1)) {
        put(y + 1, x - 1);
        put(y + 1, x + 1);
      }
      if (vertical && !ink(bm, r - 1, c) && !ink(bm, r, c - 1) && !ink(bm, r, c + 1)) {
        put(y, x - 1);
        put(y, x + 1);
      }
    }
  }
  return g;
}

Raster italic_glyph(const Bitmap& bm) {
  const Raster upright = block_glyph(bm, 2, 0.0f);
  const int slant = (kLineHeight - 1) / 4;
  Raster g(kLineHeight, upright.cols + slant);
  for (int y = 0; y < upright.rows; ++y) {
    const int shift = (kLineHeight - 1 - y) / 4;
    for (int x = 0; x < upright.cols; ++x) g.at(y, x + shift) = upright.at(y, x);
  }
  return g;
}

Raster noisy_glyph(const Bitmap& bm, int glyph_index) {
  Raster g = block_glyph(bm, 2, 0.0f);
  KeyedRng rng(0x6e6f697379ull, static_cast<std::uint64_t>(glyph_index));
  for (float& v : g.px) {
    if (v < 1.0f) v = rng.uniform() < 0.08 ? level(200) : level(static_cast<int>(rng.below(90)));
  }
  return g;
}

GlyphStyle make_style(const std::string& id) {
  GlyphStyle st;
  st.style_id = id;
  st.height = kLineHeight;
  for (int i = 0; i < 26; ++i) {
    const Bitmap bm = base_glyph(i);
    Raster g;
    if (id == "block") {
      g = block_glyph(bm, 2, 0.0f);
    } else if (id == "serif") {
      g = serif_glyph(bm);
    } else if (id == "condensed") {
      g = block_glyph(bm, 1, level(40));
    } else if (id == "italic") {
      g = italic_glyph(bm);
    } else if (id == "noisy") {
      g = noisy_glyph(bm, i);
    } else {
      throw Error("unknown glyph style '" + id + "'");
    }
    st.glyphs.emplace(static_cast<char32_t>(U'a' + i), std::move(g));
  }
  if (id == "block") {
    st.spacing = 2;
    st.space_width = 6;
  } else if (id == "serif") {
    st.spacing = 1;
    st.space_width = 6;
  } else if (id == "condensed") {
    st.spacing = 2;
    st.space_width = 4;
  } else if (id == "italic") {
    st.spacing = -2;
    st.space_width = 6;
  } else {
    st.spacing = 3;
    st.space_width = 7;
  }
  return st;
}

}  // namespace

std::vector<std::string> builtin_style_ids() { return {"block", "serif", "condensed", "italic", "noisy"}; }

const GlyphStyle& builtin_style(const std::string& style_id) {
  static const std::map<std::string, GlyphStyle> styles = [] {
    std::map<std::string, GlyphStyle> m;
    for (const auto& id : builtin_style_ids()) m.emplace(id, make_style(id));
    return m;
  }();
  const auto it = styles.find(style_id);
  if (it == styles.end()) throw Error("unknown glyph style '" + style_id + "'");
  return it->second;
}

Raster render_line(const std::u32string& text, const GlyphStyle& style) {
  if (text.empty()) throw Error("cannot render an empty line");
  int width = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char32_t c = text[i];
    if (!style.supports(c)) {
      throw Error("style '" + style.style_id + "' has no glyph for '" + utf8::encode(c) + "'");
    }
    width += c == U' ' ? style.space_width : style.glyphs.at(c).cols;
  }
  width += style.spacing * static_cast<int>(text.size() - 1);
  if (width < 1) throw Error("line renders to zero width");

  Raster out(style.height, width, 1.0f);
  int x = 0;
  for (char32_t c : text) {
    if (c == U' ') {
      x += style.space_width + style.spacing;
      continue;
    }
    const Raster& g = style.glyphs.at(c);
    for (int r = 0; r < g.rows; ++r) {
      for (int cc = 0; cc < g.cols; ++cc) {
        const int xx = x + cc;
        if (xx < 0 || xx >= width) continue;
        // Overlapping glyphs (negative spacing) keep the darker ink.
        out.at(r, xx) = std::min(out.at(r, xx), g.at(r, cc));
      }
    }
    x += g.cols + style.spacing;
  }
  return out;
}

std::vector<std::size_t> line_counts(const std::vector<double>& weights, std::size_t total) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error("style weights must be non-negative");
    sum += w;
  }
  if (!(sum > 0.0)) throw Error("at least one style weight must be positive");
  std::vector<std::size_t> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    // Small epsilon so that exact shares (0.9 * 1000) are not lost to rounding.
    const double share = weights[i] / sum * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(share + 1e-9));
    assigned += counts[i];
    remainders.emplace_back(share - static_cast<double>(counts[i]), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++counts[remainders[k % remainders.size()].second];
  return counts;
}

Corpus generate_corpus(const CorpusSpec& spec, std::uint64_t seed) {
  if (spec.styles.empty()) throw Error("corpus spec needs at least one style");
  if (spec.min_length < 1 || spec.max_length < spec.min_length) throw Error("bad line length range");
  const std::u32string letters = [&] {
    std::u32string l;
    for (char32_t c : spec.alphabet) {
      if (c != U' ') l.push_back(c);
    }
    return l;
  }();
  if (letters.empty()) throw Error("corpus alphabet has no letters");
  std::vector<double> weights = spec.weights;
  if (weights.empty()) weights.assign(spec.styles.size(), 1.0);
  if (weights.size() != spec.styles.size()) throw Error("one weight per style required");
  const auto counts = line_counts(weights, spec.total_lines);

  Corpus corpus;
  for (std::size_t s = 0; s < spec.styles.size(); ++s) {
    const GlyphStyle& style = builtin_style(spec.styles[s]);
    WorkEntry work;
    work.work_id = spec.styles[s];
    work.tags["style"] = spec.styles[s];
    work.tags["synthetic"] = "true";
    for (std::size_t i = 0; i < counts[s]; ++i) {
      KeyedRng rng(seed, hash_combine(hash_string(work.work_id), i));
      const int len = spec.min_length + static_cast<int>(rng.below(spec.max_length - spec.min_length + 1));
      std::u32string text;
      for (int k = 0; k < len; ++k) {
        // Never leading, trailing or doubled spaces: the text is already normalized.
        const bool space_ok = k > 0 && k + 1 < len && text.back() != U' ';
        if (space_ok && rng.uniform() < spec.space_probability) {
          text.push_back(U' ');
        } else {
          text.push_back(letters[rng.below(letters.size())]);
        }
      }
      LineSample line;
      line.image = render_line(text, style);
      line.transcription = std::move(text);
      line.work_id = work.work_id;
      const std::size_t per_page = static_cast<std::size_t>(std::max(1, spec.lines_per_page));
      char page[16], id[16];
      std::snprintf(page, sizeof page, "p%04zu", i / per_page + 1);
      std::snprintf(id, sizeof id, "l%05zu", i);
      line.page_id = page;
      line.line_id = id;
      line.variant = Variant::raw;
      work.lines.push_back(std::move(line));
    }
    corpus.works.push_back(std::move(work));
  }
  return corpus;
}

}  // namespace lshocr::synth
