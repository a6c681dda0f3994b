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

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lshocr/error.hpp"

namespace lshocr::xml {

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct Element {
  std::string name;  // qualified, as written
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  std::string text;  // concatenated character data directly inside this element
  int line = 0;

  std::string_view local_name() const;
  const std::string* attribute(std::string_view local) const;
  // Direct children whose local name matches.
  std::vector<const Element*> children_named(std::string_view local) const;
  const Element* first_child(std::string_view local) const;
};

// Non-validating parser for the subset used by ground-truth files:
// elements, attributes, character data, CDATA, comments, processing
// instructions, a DOCTYPE without internal subset, predefined and numeric
// entities. Returns the root element.
Element parse(std::string_view document);

}  // namespace lshocr::xml
