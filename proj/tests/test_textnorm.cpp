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

#include "lshocr/codec.hpp"
#include "lshocr/corpus.hpp"
#include "lshocr/error.hpp"
#include "lshocr/textnorm.hpp"
#include "lshocr/utf8.hpp"
#include "test_support.hpp"

using namespace lshocr;
using textnorm::default_rules;
using textnorm::normalize;

namespace {

std::string norm8(std::string_view s) { return textnorm::normalize_utf8(s, default_rules()); }

}  // namespace

TEST_CASE("whitespace and punctuation spacing") {
  CHECK(norm8("  foo ,bar  ") == "foo, bar");
  CHECK(norm8("a   b\t\tc") == "a b c");
  CHECK(norm8("end.") == "end.");
  CHECK(norm8("x ;y") == "x; y");
  CHECK(norm8("") == "");
  CHECK(norm8("   ") == "");
}

TEST_CASE("ligatures, quotes, macrons, I/J") {
  CHECK(norm8("ﬀ") == "ff");
  CHECK(norm8("æ") == "æ");
  CHECK(norm8("œÆ") == "œÆ");
  CHECK(norm8("ﬁn") == "fin");
  CHECK(norm8("ā") == "ã");
  CHECK(norm8("ā") == "ã");
  CHECK(norm8("„quote“") == "\"quote\"");
  CHECK(norm8("‘s’") == "'s'");
  CHECK(norm8("«guil»") == "\"guil\"");
  CHECK(norm8("Iam") == "Jam");
  CHECK(norm8("ſ") == "ſ");
  CHECK(norm8("ꝛ") == "r");
  CHECK(norm8("ʒ") == "z");
}

TEST_CASE("private-use codepoints never survive") {
  CHECK(norm8("ab") == "a�b");
  textnorm::CodepointMap map;
  map.add(U"", U"q");
  CHECK(normalize(U"", textnorm::make_rules(map)) == U"q");
  CHECK_THROWS_AS(map.add(U"x", U""), Error);
}

TEST_CASE("virgula folding is opt-in") {
  CHECK(norm8("a/b") == "a/ b");
  const auto folded = textnorm::with_virgula_folding(default_rules());
  CHECK(normalize(U"a/b", folded) == U"a, b");
}

TEST_CASE("table parsing") {
  const auto map = textnorm::parse_table("# comment\nU+0041\tb\nxy\tU+007A U+007A\nq\t\n");
  CHECK(map.apply(U"Axyq") == U"bzz");
  CHECK_THROWS_AS(textnorm::parse_table("nonsense"), Error);
  CHECK_THROWS_AS(textnorm::parse_table("U+ZZ\tx"), Error);
  // The embedded table parses and contains the ligature rules.
  const auto def = textnorm::parse_table(textnorm::default_table_text());
  CHECK(def.entries().at(U"ﬀ") == U"ff");
}

TEST_CASE("idempotence and output invariants on random strings") {
  KeyedRng rng(7, 1);
  for (int i = 0; i < 10000; ++i) {
    const std::u32string x = testing::tricky_text(rng);
    const std::u32string once = normalize(x, default_rules());
    REQUIRE(normalize(once, default_rules()) == once);
    for (std::size_t j = 0; j < once.size(); ++j) {
      REQUIRE_FALSE(textnorm::is_private_use(once[j]));
      if (j + 1 < once.size()) {
        REQUIRE_FALSE((textnorm::is_whitespace(once[j]) && textnorm::is_whitespace(once[j + 1])));
        REQUIRE_FALSE((textnorm::is_whitespace(once[j]) && textnorm::is_punctuation(once[j + 1])));
      }
    }
    if (!once.empty()) {
      REQUIRE_FALSE(textnorm::is_whitespace(once.front()));
      REQUIRE_FALSE(textnorm::is_whitespace(once.back()));
    }
  }
}

TEST_CASE("unmapped characters keep their order") {
  KeyedRng rng(7, 2);
  for (int i = 0; i < 1000; ++i) {
    const auto x = lshocr::testing::random_text(rng, U"abcdefgh", 20);
    CHECK(normalize(x, default_rules()) == x);
  }
}

TEST_CASE("alphabet_of") {
  Corpus c;
  auto& w = c.work("w");
  auto line = [](std::u32string t, std::string id) {
    LineSample s;
    s.image = Raster(2, 2);
    s.transcription = std::move(t);
    s.work_id = "w";
    s.page_id = "p";
    s.line_id = std::move(id);
    return s;
  };
  w.lines.push_back(line(U"ab", "1"));
  w.lines.push_back(line(U"ba", "2"));
  Codec codec = textnorm::alphabet_of(c, default_rules());
  CHECK(codec.chars() == U" ab");
  CHECK(codec.index_of(U'a') == 2u);
  w.lines.push_back(line(U"ba", "3"));
  CHECK(textnorm::alphabet_of(c, default_rules()) == codec);
  w.lines.push_back(line(U"abc", "4"));
  CHECK(textnorm::alphabet_of(c, default_rules()).chars() == U" abc");
  w.lines[3].selected = false;
  CHECK(textnorm::alphabet_of(c, default_rules()) == codec);
  CHECK_THROWS_AS(textnorm::alphabet_of(Corpus{}, default_rules()), Error);
}

TEST_CASE("codec encode/decode") {
  const Codec codec(U"cba");
  CHECK(codec.classes() == 5);
  CHECK(codec.encode(U"a b") == std::vector<int>{2, 1, 3});
  CHECK(codec.decode({2, 1, 3}) == U"a b");
  CHECK_THROWS_WITH_AS(codec.encode(U"z"), doctest::Contains("z"), Error);
}

TEST_CASE("utf8 round trip and errors") {
  const std::u32string s = U"aæﬀ\U0001F600";
  CHECK(utf8::decode(utf8::encode(s)) == s);
  CHECK_THROWS_AS(utf8::decode("\xC3"), Error);
  CHECK_THROWS_AS(utf8::decode("\xED\xA0\x80"), Error);
  CHECK(utf8::decode_lenient("a\xFF") == U"a�");
}
