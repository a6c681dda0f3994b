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
#include <set>

#include "lshocr/error.hpp"
#include "lshocr/synth.hpp"
#include "lshocr/textnorm.hpp"

using namespace lshocr;
using namespace lshocr::synth;

TEST_CASE("built-in styles cover a-z") {
  const auto ids = builtin_style_ids();
  CHECK(ids.size() >= 4);
  std::set<std::vector<float>> distinct_a;
  for (const auto& id : ids) {
    const GlyphStyle& s = builtin_style(id);
    CHECK(s.style_id == id);
    for (char32_t c = U'a'; c <= U'z'; ++c) {
      REQUIRE(s.supports(c));
      const Raster& g = s.glyphs.at(c);
      CHECK(g.rows == s.height);
      CHECK(g.cols >= 1);
      CHECK(std::any_of(g.px.begin(), g.px.end(), [](float v) { return v < 1.0f; }));
    }
    CHECK(s.supports(U' '));
    distinct_a.insert(s.glyphs.at(U'a').px);
  }
  CHECK(distinct_a.size() == ids.size());
  CHECK_THROWS_AS(builtin_style("nope"), Error);
}

TEST_CASE("render width formula") {
  GlyphStyle s;
  s.style_id = "test";
  s.height = 4;
  s.spacing = 2;
  s.space_width = 3;
  s.glyphs[U'a'] = Raster(4, 8, 0.0f);
  s.glyphs[U'b'] = Raster(4, 8, 0.0f);
  CHECK(render_line(U"ab", s).cols == 18);
  CHECK(render_line(U"a b", s).cols == 8 + 3 + 8 + 2 * 2);
  CHECK_THROWS_AS(render_line(U"", s), Error);
  CHECK_THROWS_WITH_AS(render_line(U"ac", s), doctest::Contains("'c'"), Error);

  for (const auto& id : builtin_style_ids()) {
    const GlyphStyle& st = builtin_style(id);
    const std::u32string text = U"hello world";
    int expect = st.spacing * static_cast<int>(text.size() - 1);
    for (char32_t c : text) expect += c == U' ' ? st.space_width : st.glyphs.at(c).cols;
    const Raster r = render_line(text, st);
    CHECK(r.cols == expect);
    CHECK(r.rows == st.height);
    CHECK(r == render_line(text, st));
  }
}

TEST_CASE("line counts follow the weights exactly") {
  CHECK(line_counts({0.9, 0.1}, 1000) == std::vector<std::size_t>{900, 100});
  CHECK(line_counts({1, 1, 1}, 10) == std::vector<std::size_t>{4, 3, 3});
  CHECK(line_counts({0.91, 0.03, 0.03, 0.03}, 1000) == std::vector<std::size_t>{910, 30, 30, 30});
  CHECK_THROWS_AS(line_counts({0, 0}, 5), Error);
  CHECK_THROWS_AS(line_counts({-1, 2}, 5), Error);
}

TEST_CASE("generated corpora") {
  CorpusSpec spec;
  spec.styles = {"block", "serif"};
  spec.weights = {0.9, 0.1};
  spec.total_lines = 200;
  const Corpus c = generate_corpus(spec, 42);
  REQUIRE(c.works.size() == 2);
  CHECK(c.works[0].lines.size() == 180);
  CHECK(c.works[1].lines.size() == 20);
  CHECK(c.works[0].tags.at("style") == "block");
  c.validate();

  const Corpus again = generate_corpus(spec, 42);
  const auto a = c.all_lines(), b = again.all_lines();
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].image == b[i].image);
    CHECK(a[i].transcription == b[i].transcription);
    CHECK(a[i].key() == b[i].key());
  }
  CHECK(generate_corpus(spec, 43).all_lines()[0].transcription != a[0].transcription);

  const Codec codec = textnorm::alphabet_of(c, textnorm::default_rules());
  for (char32_t ch : codec.chars()) CHECK((ch == U' ' || spec.alphabet.find(ch) != std::u32string::npos));
  for (const auto& l : a) {
    CHECK(l.transcription.size() >= static_cast<std::size_t>(spec.min_length));
    CHECK(l.transcription.size() <= static_cast<std::size_t>(spec.max_length));
    CHECK(textnorm::normalize(l.transcription, textnorm::default_rules()) == l.transcription);
    CHECK(l.image == render_line(l.transcription, builtin_style(l.work_id)));
  }
}
