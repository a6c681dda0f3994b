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

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "lshocr/raster.hpp"
#include "lshocr/rng.hpp"

namespace lshocr::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("lshocr_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Raster random_raster(KeyedRng& rng, int rows, int cols, bool quantized = true) {
  Raster r(rows, cols);
  for (float& v : r.px) {
    v = static_cast<float>(rng.uniform());
    if (quantized) v = quantize8(v);
  }
  return r;
}

inline std::u32string random_text(KeyedRng& rng, std::u32string_view alphabet, std::size_t max_len) {
  std::u32string s(rng.below(max_len + 1), U' ');
  for (char32_t& c : s) c = alphabet[rng.below(alphabet.size())];
  return s;
}

// Draws from a pool weighted toward characters the rules touch.
inline std::u32string tricky_text(KeyedRng& rng) {
  static const std::u32string pool =
      U"abcIJij  \t\n 　.,;:!?/'\"‘’“”«»„ﬀﬁﬅæ"
      U"ā̄̃ͤaeouꝛʒſ";
  std::u32string s(rng.below(24), U' ');
  for (char32_t& c : s) {
    c = rng.uniform() < 0.8 ? pool[rng.below(pool.size())] : static_cast<char32_t>(0x20 + rng.below(0x3000));
    if (c >= 0xD800 && c <= 0xDFFF) c = U'x';
  }
  return s;
}

}  // namespace lshocr::testing
