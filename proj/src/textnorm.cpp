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

#include "lshocr/textnorm.hpp"

#include <fstream>
#include <sstream>

#include "lshocr/corpus.hpp"
#include "lshocr/error.hpp"
#include "lshocr/utf8.hpp"

namespace lshocr::textnorm {
namespace {

// Default transcription standardization. Consonantal ligatures are resolved,
// vowel ligatures (ae, oe) are kept, long s is kept.
constexpr std::string_view kDefaultTable = R"(# lshocr default normalization table
# source<TAB>target; fields are UTF-8 or U+XXXX runs.

# consonantal ligatures
U+FB00	ff
U+FB01	fi
U+FB02	fl
U+FB03	ffi
U+FB04	ffl
U+FB05	U+017F U+0074
U+FB06	st

# single quotes
U+2018	'
U+2019	'
U+201A	'
U+201B	'
U+2039	'
U+203A	'
U+2032	'
# double quotes
U+201C	"
U+201D	"
U+201E	"
U+201F	"
U+00AB	"
U+00BB	"
U+2033	"
U+301E	"

# macrons become tildes
U+0101	U+00E3
U+0113	U+1EBD
U+012B	U+0129
U+014D	U+00F5
U+016B	U+0169
U+0233	U+1EF9
U+0100	U+00C3
U+0112	U+1EBC
U+012A	U+0128
U+014C	U+00D5
U+016A	U+0168
U+0232	U+1EF8
U+0061 U+0304	U+00E3
U+0065 U+0304	U+1EBD
U+0069 U+0304	U+0129
U+006F U+0304	U+00F5
U+0075 U+0304	U+0169
U+0079 U+0304	U+1EF9
U+0041 U+0304	U+00C3
U+0045 U+0304	U+1EBC
U+0049 U+0304	U+0128
U+004F U+0304	U+00D5
U+0055 U+0304	U+0168
U+0059 U+0304	U+1EF8
U+0304	U+0303

# umlauts written with superscript e
U+0061 U+0364	U+00E4
U+006F U+0364	U+00F6
U+0075 U+0364	U+00FC
U+0041 U+0364	U+00C4
U+004F U+0364	U+00D6
U+0055 U+0364	U+00DC

# r rotunda, z caudata
U+A75B	r
U+A75A	R
U+0292	z
U+01B7	Z
U+A763	z
U+A762	Z

# capital I and J are one letter
I	J
)";

std::u32string parse_field(std::string_view field, int line_no) {
  // `U+XXXX U+YYYY` runs, or a literal.
  if (field.starts_with("U+")) {
    std::u32string out;
    std::istringstream in{std::string(field)};
    std::string tok;
    while (in >> tok) {
      if (!tok.starts_with("U+") || tok.size() < 3) {
        throw Error("rule table line " + std::to_string(line_no) + ": bad codepoint token '" + tok + "'");
      }
      std::size_t used = 0;
      unsigned long cp = 0;
      try {
        cp = std::stoul(tok.substr(2), &used, 16);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() - 2 || cp > 0x10FFFF) {
        throw Error("rule table line " + std::to_string(line_no) + ": bad codepoint token '" + tok + "'");
      }
      out.push_back(static_cast<char32_t>(cp));
    }
    return out;
  }
  return utf8::decode(field);
}

}  // namespace

bool is_whitespace(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

bool is_punctuation(char32_t c) {
  switch (c) {
    case U'.':
    case U',':
    case U';':
    case U':':
    case U'!':
    case U'?':
    case U'/':
      return true;
    default:
      return false;
  }
}

bool is_private_use(char32_t c) { return c >= 0xE000 && c <= 0xF8FF; }

void CodepointMap::add(std::u32string source, std::u32string target) {
  if (source.empty()) throw Error("rule source must not be empty");
  for (char32_t c : target) {
    if (is_private_use(c)) throw Error("rule target contains private-use codepoint");
  }
  longest_ = std::max(longest_, source.size());
  entries_[std::move(source)] = std::move(target);
}

std::u32string CodepointMap::apply(std::u32string_view text) const {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    bool matched = false;
    const std::size_t max_len = std::min(longest_, text.size() - i);
    for (std::size_t len = max_len; len >= 1; --len) {
      const auto it = entries_.find(std::u32string(text.substr(i, len)));
      if (it != entries_.end()) {
        out += it->second;
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) {
      out.push_back(is_private_use(text[i]) ? U'�' : text[i]);
      ++i;
    }
  }
  return out;
}

std::string_view default_table_text() { return kDefaultTable; }

CodepointMap parse_table(std::string_view text) {
  CodepointMap map;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error("rule table line " + std::to_string(line_no) + ": expected source<TAB>target");
    }
    map.add(parse_field(std::string_view(line).substr(0, tab), line_no),
            parse_field(std::string_view(line).substr(tab + 1), line_no));
  }
  return map;
}

CodepointMap load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open rule table " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_table(buf.str());
}

RuleSet make_rules(CodepointMap map) {
  RuleSet rs;
  rs.rules.emplace_back(std::move(map));
  rs.rules.emplace_back(PunctuationSpacing{});
  rs.rules.emplace_back(WhitespaceCollapse{});
  rs.rules.emplace_back(WhitespaceTrim{});
  return rs;
}

const RuleSet& default_rules() {
  static const RuleSet rules = make_rules(parse_table(kDefaultTable));
  return rules;
}

RuleSet with_virgula_folding(RuleSet rules) {
  for (auto& r : rules.rules) {
    if (auto* map = std::get_if<CodepointMap>(&r)) {
      map->add(U"/", U",");
      return rules;
    }
  }
  CodepointMap map;
  map.add(U"/", U",");
  rules.rules.insert(rules.rules.begin(), std::move(map));
  return rules;
}

namespace {

std::u32string punctuation_spacing(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size() + 8);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char32_t c = text[i];
    if (!is_punctuation(c)) {
      out.push_back(c);
      continue;
    }
    while (!out.empty() && is_whitespace(out.back())) out.pop_back();
    out.push_back(c);
    if (i + 1 < text.size() && !is_whitespace(text[i + 1])) out.push_back(U' ');
  }
  return out;
}

std::u32string whitespace_collapse(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size());
  bool in_run = false;
  for (char32_t c : text) {
    if (is_whitespace(c)) {
      if (!in_run) out.push_back(U' ');
      in_run = true;
    } else {
      out.push_back(c);
      in_run = false;
    }
  }
  return out;
}

std::u32string whitespace_trim(std::u32string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && is_whitespace(text[b])) ++b;
  while (e > b && is_whitespace(text[e - 1])) --e;
  return std::u32string(text.substr(b, e - b));
}

}  // namespace

std::u32string normalize(std::u32string_view text, const RuleSet& rules) {
  std::u32string cur(text);
  for (const auto& rule : rules.rules) {
    cur = std::visit(
        [&](const auto& r) -> std::u32string {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, CodepointMap>) {
            return r.apply(cur);
          } else if constexpr (std::is_same_v<T, PunctuationSpacing>) {
            return punctuation_spacing(cur);
          } else if constexpr (std::is_same_v<T, WhitespaceCollapse>) {
            return whitespace_collapse(cur);
          } else {
            return whitespace_trim(cur);
          }
        },
        rule);
  }
  return cur;
}

std::string normalize_utf8(std::string_view text, const RuleSet& rules) {
  return utf8::encode(normalize(utf8::decode(text), rules));
}

Codec alphabet_of(std::span<const LineSample> lines) {
  std::u32string chars;
  for (const auto& line : lines) chars += line.transcription;
  return Codec(std::move(chars));
}

Codec alphabet_of(const Corpus& corpus, const RuleSet& rules) {
  std::u32string chars;
  std::size_t n = 0;
  for (const auto& work : corpus.works) {
    for (const auto& line : work.lines) {
      if (!line.selected) continue;
      ++n;
      // Transcriptions are stored normalized; re-normalizing is a no-op
      // for them and guards manifests edited by hand.
      chars += normalize(line.transcription, rules);
    }
  }
  if (n == 0) throw Error("cannot build an alphabet from an empty corpus");
  return Codec(std::move(chars));
}

}  // namespace lshocr::textnorm
