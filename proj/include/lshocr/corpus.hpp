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

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lshocr/raster.hpp"
#include "lshocr/textnorm.hpp"

namespace lshocr {

enum class Variant { raw, bin, nrm, sauvola, wolf, augmented };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view s);

struct LineSample {
  Raster image;
  std::u32string transcription;  // normalized
  std::string work_id;
  std::string page_id;
  std::string line_id;
  Variant variant = Variant::raw;
  bool selected = true;

  // "work/page/line"; identifies the line across its variants.
  std::string key() const;
};

struct WorkEntry {
  std::string work_id;
  std::map<std::string, std::string> tags;
  std::vector<LineSample> lines;
};

struct Corpus {
  std::vector<WorkEntry> works;

  std::size_t line_count() const;
  std::vector<LineSample> all_lines() const;
  std::vector<LineSample> selected_lines() const;
  WorkEntry& work(const std::string& work_id);  // creates on demand
  // Throws on duplicate (work, page, line, variant) or an invalid raster.
  void validate() const;
};

struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
};

struct LineRegion {
  std::string id;
  std::vector<Point> polygon;
  std::string text;  // raw transcription, UTF-8
};

struct PageParseResult {
  std::vector<LineRegion> regions;
  std::vector<std::string> warnings;
};

// Reads TextLine/Coords/TextEquiv from any PAGE schema version, matching
// elements by local name. Lines without usable coordinates or text are
// skipped with a warning. Throws xml::ParseError on malformed XML.
PageParseResult parse_page_xml(std::string_view xml, const Raster& page_image);

// Point-in-polygon where points on the boundary count as inside.
bool polygon_contains(std::span<const Point> polygon, int x, int y);

// Crops to the polygon's bounding box; pixels outside the polygon are white.
Raster extract_line(const Raster& page, const LineRegion& region);

struct ArtificialPage {
  Raster page;
  std::vector<LineRegion> regions;
};

// Stacks lines vertically with `gap` white rows between them; narrower
// lines are padded white on the right.
ArtificialPage concat_lines_to_page(std::span<const LineSample> lines, int gap);

// Emits a minimal PAGE document describing `regions`.
std::string write_page_xml(const ArtificialPage& page, std::string_view image_filename);

// Flags min(cap, available) distinct lines per work as selected. The choice
// depends only on (seed, work_id) and the work's set of line keys.
Corpus select_balanced(Corpus corpus, int cap, std::uint64_t seed);

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// k near-equal shards of a seeded shuffle, larger shards first.
std::vector<FoldSplit> split_folds(std::size_t n, int k, std::uint64_t seed);

// Same over samples, keeping all variants of one line in one shard.
std::vector<FoldSplit> split_folds(std::span<const LineSample> samples, int k, std::uint64_t seed);

// Corpus manifest: JSON listing works -> pages -> lines, rasters as 8-bit PNG
// files relative to the manifest's directory.
void write_manifest(const Corpus& corpus, const std::filesystem::path& dir);
Corpus read_manifest(const std::filesystem::path& manifest_path);

}  // namespace lshocr
