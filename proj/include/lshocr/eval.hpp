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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lshocr/textnorm.hpp"

namespace lshocr::eval {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

enum class OpKind { match, substitute, insert, del };

struct EditOp {
  OpKind kind;
  char32_t gt = 0;    // unset for insert
  char32_t pred = 0;  // unset for delete
  bool operator==(const EditOp&) const = default;
};

using EditAlignment = std::vector<EditOp>;

// One optimal alignment; backtrace prefers match, then substitute, delete,
// insert.
EditAlignment align(std::u32string_view gt, std::u32string_view pred);

// Applies `ops` to gt; throws if they do not fit.
std::u32string replay(std::u32string_view gt, const EditAlignment& ops);

std::size_t edit_count(const EditAlignment& ops);

using TextPair = std::pair<std::u32string, std::u32string>;  // (gt, pred)

// Applied to both sides before comparison.
struct Normalization {
  bool nfc = true;
  std::optional<textnorm::RuleSet> rules;
};

std::u32string nfc(std::u32string_view text);
std::u32string prepare(std::u32string_view text, const Normalization& norm);

struct CerResult {
  double cer = 0.0;
  std::size_t total_errors = 0;
  std::size_t total_gt_chars = 0;
};

// Micro-average over pairs; throws when there are no GT characters.
CerResult cer(std::span<const TextPair> pairs, const Normalization& norm = {});

struct ConfusionRow {
  std::u32string gt;    // empty for insertions
  std::u32string pred;  // empty for deletions
  std::size_t count = 0;
  double percent = 0.0;
};

struct ConfusionReport {
  std::vector<ConfusionRow> rows;
  std::size_t remaining_count = 0;
  double remaining_percent = 0.0;
  std::size_t total_errors = 0;
  std::size_t total_gt_chars = 0;
  double cer = 0.0;
};

ConfusionReport confusion_table(std::span<const TextPair> pairs, std::size_t top_n = 10,
                                const Normalization& norm = {});

// Whitespace as U+2423, everything else verbatim (UTF-8).
std::string display_token(std::u32string_view token);
std::string to_json(const ConfusionReport& report);
std::string to_tsv(const ConfusionReport& report);

// Prediction/GT interchange: `line_id<TAB>text` with \t, \n, \r and \\ escaped.
struct TsvRecord {
  std::string line_id;
  std::u32string text;
};

std::string escape_field(std::string_view text);
std::string unescape_field(std::string_view text);
std::vector<TsvRecord> parse_tsv(std::string_view content);
std::vector<TsvRecord> read_tsv(const std::filesystem::path& path);
std::string format_tsv(std::span<const TsvRecord> records);

// Pairs records by line_id; throws if either side lacks an id or repeats one.
std::vector<TextPair> pair_by_id(std::span<const TsvRecord> gt, std::span<const TsvRecord> pred);

}  // namespace lshocr::eval
