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

#include "lshocr/codec.hpp"

#include <algorithm>

#include "lshocr/error.hpp"
#include "lshocr/utf8.hpp"

namespace lshocr {

Codec::Codec(std::u32string chars) : chars_(std::move(chars)) {
  chars_.push_back(U' ');
  std::sort(chars_.begin(), chars_.end());
  chars_.erase(std::unique(chars_.begin(), chars_.end()), chars_.end());
}

std::optional<std::size_t> Codec::index_of(char32_t c) const {
  const auto it = std::lower_bound(chars_.begin(), chars_.end(), c);
  if (it == chars_.end() || *it != c) return std::nullopt;
  return static_cast<std::size_t>(it - chars_.begin()) + 1;
}

std::vector<int> Codec::encode(const std::u32string& text) const {
  std::vector<int> out;
  out.reserve(text.size());
  for (char32_t c : text) {
    const auto idx = index_of(c);
    if (!idx) throw Error("character '" + utf8::encode(c) + "' is not in the codec");
    out.push_back(static_cast<int>(*idx));
  }
  return out;
}

std::u32string Codec::decode(const std::vector<int>& labels) const {
  std::u32string out;
  for (int l : labels) {
    if (l > 0) out.push_back(char_at(static_cast<std::size_t>(l)));
  }
  return out;
}

}  // namespace lshocr
