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
#include <map>
#include <string>
#include <vector>

#include "lshocr/corpus.hpp"
#include "lshocr/raster.hpp"

namespace lshocr::synth {

struct GlyphStyle {
  std::string style_id;
  int height = 0;
  int spacing = 0;
  int space_width = 0;
  std::map<char32_t, Raster> glyphs;

  bool supports(char32_t c) const { return c == U' ' || glyphs.contains(c); }
};

// Built-in styles over a-z: "block", "serif", "condensed", "italic", "noisy".
std::vector<std::string> builtin_style_ids();
const GlyphStyle& builtin_style(const std::string& style_id);

// Black ink on white, glyphs left to right; width = sum of glyph widths +
// spacing * (n - 1). Throws on empty text or unsupported characters.
Raster render_line(const std::u32string& text, const GlyphStyle& style);

struct CorpusSpec {
  std::vector<std::string> styles;
  std::vector<double> weights;  // one per style; empty means equal
  std::size_t total_lines = 0;
  std::u32string alphabet = U"abcdefghijklmnopqrstuvwxyz";
  int min_length = 5;
  int max_length = 20;
  double space_probability = 0.15;
  int lines_per_page = 25;
};

// Exact per-work line counts: floor shares plus largest remainders.
std::vector<std::size_t> line_counts(const std::vector<double>& weights, std::size_t total);

// One work per style; uniform random, already-normalized transcriptions.
Corpus generate_corpus(const CorpusSpec& spec, std::uint64_t seed);

}  // namespace lshocr::synth
