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

#include "lshocr/xml.hpp"

#include <cctype>
#include <cstdint>

#include "lshocr/utf8.hpp"

namespace lshocr::xml {

std::string_view Element::local_name() const {
  const std::string_view n = name;
  const auto colon = n.rfind(':');
  return colon == std::string_view::npos ? n : n.substr(colon + 1);
}

const std::string* Element::attribute(std::string_view local) const {
  for (const auto& [k, v] : attributes) {
    std::string_view key = k;
    const auto colon = key.rfind(':');
    if (colon != std::string_view::npos) key = key.substr(colon + 1);
    if (key == local) return &v;
  }
  return nullptr;
}

std::vector<const Element*> Element::children_named(std::string_view local) const {
  std::vector<const Element*> out;
  for (const auto& c : children) {
    if (c.local_name() == local) out.push_back(&c);
  }
  return out;
}

const Element* Element::first_child(std::string_view local) const {
  for (const auto& c : children) {
    if (c.local_name() == local) return &c;
  }
  return nullptr;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view doc) : s_(doc) {}

  Element document() {
    if (s_.starts_with("\xEF\xBB\xBF")) advance(3);
    skip_misc();
    if (at_end() || peek() != '<') fail("expected root element");
    Element root = element();
    skip_misc();
    if (!at_end()) fail("content after root element");
    return root;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }
  bool at_end() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const { return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0'; }
  bool looking_at(std::string_view t) const { return s_.substr(pos_).starts_with(t); }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < s_.size(); ++i, ++pos_) {
      if (s_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else if ((static_cast<unsigned char>(s_[pos_]) & 0xC0) != 0x80) {
        ++col_;
      }
    }
  }

  void expect(std::string_view t) {
    if (!looking_at(t)) fail("expected '" + std::string(t) + "'");
    advance(t.size());
  }

  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
  void skip_space() {
    while (!at_end() && is_space(peek())) advance();
  }

  void skip_until(std::string_view terminator, const char* what) {
    const auto end = s_.find(terminator, pos_);
    if (end == std::string_view::npos) fail(std::string("unterminated ") + what);
    advance(end - pos_ + terminator.size());
  }

  // Comments, PIs, DOCTYPE and whitespace outside the root element.
  void skip_misc() {
    for (;;) {
      skip_space();
      if (looking_at("<?")) {
        skip_until("?>", "processing instruction");
      } else if (looking_at("<!--")) {
        skip_until("-->", "comment");
      } else if (looking_at("<!DOCTYPE")) {
        skip_until(">", "DOCTYPE");
      } else {
        return;
      }
    }
  }

  static bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '-' || c == '.' ||
           (static_cast<unsigned char>(c) & 0x80);
  }

  std::string name() {
    const std::size_t start = pos_;
    const char c = peek();
    if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':' || (static_cast<unsigned char>(c) & 0x80))) {
      fail("expected a name");
    }
    while (!at_end() && is_name_char(peek())) advance();
    return std::string(s_.substr(start, pos_ - start));
  }

  void entity(std::string& out) {
    expect("&");
    const auto semi = s_.find(';', pos_);
    if (semi == std::string_view::npos || semi - pos_ > 12) fail("unterminated entity reference");
    const std::string_view ref = s_.substr(pos_, semi - pos_);
    if (ref == "lt") {
      out += '<';
    } else if (ref == "gt") {
      out += '>';
    } else if (ref == "amp") {
      out += '&';
    } else if (ref == "quot") {
      out += '"';
    } else if (ref == "apos") {
      out += '\'';
    } else if (ref.starts_with('#')) {
      const bool hex = ref.size() > 1 && (ref[1] == 'x' || ref[1] == 'X');
      const std::string digits(ref.substr(hex ? 2 : 1));
      std::uint32_t cp = 0;
      std::size_t used = 0;
      try {
        cp = static_cast<std::uint32_t>(std::stoul(digits, &used, hex ? 16 : 10));
      } catch (const std::exception&) {
        used = 0;
      }
      if (digits.empty() || used != digits.size() || cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        fail("bad character reference");
      }
      out += utf8::encode(static_cast<char32_t>(cp));
    } else {
      fail("unknown entity '&" + std::string(ref) + ";'");
    }
    advance(semi - pos_ + 1);
  }

  std::string attribute_value() {
    const char quote = peek();
    if (quote != '"' && quote != '\'') fail("expected quoted attribute value");
    advance();
    std::string out;
    for (;;) {
      if (at_end()) fail("unterminated attribute value");
      const char c = peek();
      if (c == quote) break;
      if (c == '<') fail("'<' in attribute value");
      if (c == '&') {
        entity(out);
      } else {
        out += c;
        advance();
      }
    }
    advance();
    return out;
  }

  Element element() {
    Element el;
    el.line = line_;
    expect("<");
    el.name = name();
    for (;;) {
      const bool had_space = !at_end() && is_space(peek());
      skip_space();
      if (looking_at("/>")) {
        advance(2);
        return el;
      }
      if (peek() == '>') {
        advance();
        break;
      }
      if (at_end()) fail("unterminated start tag");
      if (!had_space) fail("expected whitespace between attributes");
      std::string key = name();
      skip_space();
      expect("=");
      skip_space();
      std::string value = attribute_value();
      for (const auto& [k, v] : el.attributes) {
        if (k == key) fail("duplicate attribute '" + key + "'");
      }
      el.attributes.emplace_back(std::move(key), std::move(value));
    }
    content(el);
    return el;
  }

  void content(Element& el) {
    for (;;) {
      if (at_end()) fail("unclosed element <" + el.name + ">");
      if (looking_at("</")) {
        advance(2);
        const std::string closing = name();
        if (closing != el.name) fail("mismatched closing tag </" + closing + "> for <" + el.name + ">");
        skip_space();
        expect(">");
        return;
      }
      if (looking_at("<!--")) {
        skip_until("-->", "comment");
      } else if (looking_at("<![CDATA[")) {
        advance(9);
        const auto end = s_.find("]]>", pos_);
        if (end == std::string_view::npos) fail("unterminated CDATA section");
        el.text += s_.substr(pos_, end - pos_);
        advance(end - pos_ + 3);
      } else if (looking_at("<?")) {
        skip_until("?>", "processing instruction");
      } else if (peek() == '<') {
        el.children.push_back(element());
      } else if (peek() == '&') {
        entity(el.text);
      } else {
        el.text += peek();
        advance();
      }
    }
  }
};

}  // namespace

Element parse(std::string_view document) { return Parser(document).document(); }

}  // namespace lshocr::xml
