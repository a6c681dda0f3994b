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

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lshocr/codec.hpp"

namespace lshocr {

struct LineSample;
struct Corpus;

namespace textnorm {

// Many-to-one substitutions, applied as one left-to-right longest-match
// pass. Private-use codepoints without an explicit entry become U+FFFD.
class CodepointMap {
 public:
  CodepointMap() = default;
  // Throws if a target contains a private-use codepoint.
  void add(std::u32string source, std::u32string target);
  std::u32string apply(std::u32string_view text) const;

  const std::map<std::u32string, std::u32string>& entries() const { return entries_; }
  bool operator==(const CodepointMap&) const = default;

 private:
  std::map<std::u32string, std::u32string> entries_;
  std::size_t longest_ = 0;
};

// Deletes whitespace before punctuation and inserts one space after it
// unless it ends the line or whitespace already follows.
struct PunctuationSpacing {
  bool operator==(const PunctuationSpacing&) const = default;
};
struct WhitespaceCollapse {
  bool operator==(const WhitespaceCollapse&) const = default;
};
struct WhitespaceTrim {
  bool operator==(const WhitespaceTrim&) const = default;
};

using Rule = std::variant<CodepointMap, PunctuationSpacing, WhitespaceCollapse, WhitespaceTrim>;

struct RuleSet {
  std::vector<Rule> rules;
};

bool is_whitespace(char32_t c);
bool is_punctuation(char32_t c);
bool is_private_use(char32_t c);

// The embedded default table in `source<TAB>target` form.
std::string_view default_table_text();

// Parses a rule table. Fields are literal UTF-8 or a run of `U+XXXX`
// tokens; an empty target deletes the source.
CodepointMap parse_table(std::string_view text);
CodepointMap load_table(const std::filesystem::path& path);

// Map -> punctuation spacing -> whitespace collapse -> trim.
RuleSet make_rules(CodepointMap map);
const RuleSet& default_rules();

// Adds the evaluation-only virgula (/) to comma folding.
RuleSet with_virgula_folding(RuleSet rules);

std::u32string normalize(std::u32string_view text, const RuleSet& rules);
std::string normalize_utf8(std::string_view text, const RuleSet& rules);

// Sorted alphabet of every selected transcription, blank at 0, space included.
Codec alphabet_of(const Corpus& corpus, const RuleSet& rules);
Codec alphabet_of(std::span<const LineSample> lines);

}  // namespace textnorm
}  // namespace lshocr
