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

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace lshocr {

// Ordered alphabet; index 0 is the CTC blank, character i sits at index i+1.
class Codec {
 public:
  Codec() = default;
  // Sorts and deduplicates; space is always added.
  explicit Codec(std::u32string chars);

  std::size_t size() const { return chars_.size(); }
  // Output-layer width including blank.
  std::size_t classes() const { return chars_.size() + 1; }
  char32_t char_at(std::size_t index) const { return chars_.at(index - 1); }
  std::optional<std::size_t> index_of(char32_t c) const;
  bool contains(char32_t c) const { return index_of(c).has_value(); }
  const std::u32string& chars() const { return chars_; }

  // Maps a transcription to label indices; throws naming the first
  // character that is missing from the codec.
  std::vector<int> encode(const std::u32string& text) const;
  std::u32string decode(const std::vector<int>& labels) const;

  bool operator==(const Codec&) const = default;

 private:
  std::u32string chars_;
};

}  // namespace lshocr
