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

#include "lshocr/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "lshocr/image_io.hpp"
#include "lshocr/rng.hpp"
#include "lshocr/utf8.hpp"
#include "lshocr/xml.hpp"

namespace lshocr {

namespace {
constexpr std::string_view kVariantNames[] = {"raw", "bin", "nrm", "sauvola", "wolf", "augmented"};
constexpr std::uint64_t kFoldStream = 0x666f6c6473ull;  // "folds"
}  // namespace

std::string_view to_string(Variant v) { return kVariantNames[static_cast<int>(v)]; }

Variant variant_from_string(std::string_view s) {
  for (int i = 0; i < 6; ++i) {
    if (kVariantNames[i] == s) return static_cast<Variant>(i);
  }
  throw Error("unknown variant '" + std::string(s) + "'");
}

std::string LineSample::key() const { return work_id + "/" + page_id + "/" + line_id; }

std::size_t Corpus::line_count() const {
  std::size_t n = 0;
  for (const auto& w : works) n += w.lines.size();
  return n;
}

std::vector<LineSample> Corpus::all_lines() const {
  std::vector<LineSample> out;
  out.reserve(line_count());
  for (const auto& w : works) out.insert(out.end(), w.lines.begin(), w.lines.end());
  return out;
}

std::vector<LineSample> Corpus::selected_lines() const {
  std::vector<LineSample> out;
  for (const auto& w : works) {
    for (const auto& l : w.lines) {
      if (l.selected) out.push_back(l);
    }
  }
  return out;
}

WorkEntry& Corpus::work(const std::string& work_id) {
  for (auto& w : works) {
    if (w.work_id == work_id) return w;
  }
  works.push_back(WorkEntry{work_id, {}, {}});
  return works.back();
}

void Corpus::validate() const {
  std::set<std::tuple<std::string, std::string, std::string, Variant>> seen;
  for (const auto& w : works) {
    for (const auto& l : w.lines) {
      if (l.work_id != w.work_id) throw Error("line " + l.key() + " filed under work " + w.work_id);
      if (!seen.emplace(l.work_id, l.page_id, l.line_id, l.variant).second) {
        throw Error("duplicate line " + l.key() + " variant " + std::string(to_string(l.variant)));
      }
      if (l.image.empty()) throw Error("line " + l.key() + " has an empty raster");
      for (float v : l.image.px) {
        if (!(v >= 0.0f && v <= 1.0f)) throw Error("line " + l.key() + " has intensities outside [0,1]");
      }
    }
  }
}

// --- PAGE XML -------------------------------------------------------------

namespace {

bool parse_points_attr(const std::string& attr, std::vector<Point>& out) {
  std::istringstream in(attr);
  std::string tok;
  while (in >> tok) {
    const auto comma = tok.find(',');
    if (comma == std::string::npos) return false;
    try {
      std::size_t ux = 0, uy = 0;
      const std::string xs = tok.substr(0, comma), ys = tok.substr(comma + 1);
      const int x = std::stoi(xs, &ux);
      const int y = std::stoi(ys, &uy);
      if (ux != xs.size() || uy != ys.size()) return false;
      out.push_back({x, y});
    } catch (const std::exception&) {
      return false;
    }
  }
  return true;
}

// 2013+ schemas use Coords/@points; 2010 uses Coords/Point children.
bool read_coords(const xml::Element& coords, std::vector<Point>& out) {
  if (const auto* pts = coords.attribute("points")) return parse_points_attr(*pts, out);
  for (const auto* p : coords.children_named("Point")) {
    const auto* x = p->attribute("x");
    const auto* y = p->attribute("y");
    if (!x || !y) return false;
    try {
      out.push_back({std::stoi(*x), std::stoi(*y)});
    } catch (const std::exception&) {
      return false;
    }
  }
  return !out.empty();
}

// Direct TextEquiv children win over Word/Glyph ones; lowest @index first.
const xml::Element* line_unicode(const xml::Element& line) {
  const xml::Element* best = nullptr;
  long best_index = 0;
  for (const auto* te : line.children_named("TextEquiv")) {
    const auto* uni = te->first_child("Unicode");
    if (!uni) continue;
    long index = 0;
    if (const auto* idx = te->attribute("index")) {
      try {
        index = std::stol(*idx);
      } catch (const std::exception&) {
        index = 0;
      }
    }
    if (!best || index < best_index) {
      best = uni;
      best_index = index;
    }
  }
  return best;
}

void collect_lines(const xml::Element& el, std::vector<const xml::Element*>& out) {
  for (const auto& c : el.children) {
    if (c.local_name() == "TextLine") {
      out.push_back(&c);
    } else {
      collect_lines(c, out);
    }
  }
}

}  // namespace

PageParseResult parse_page_xml(std::string_view xml_text, const Raster& page_image) {
  const xml::Element root = xml::parse(xml_text);
  std::vector<const xml::Element*> lines;
  collect_lines(root, lines);

  PageParseResult result;
  for (const auto* line : lines) {
    const std::string id = line->attribute("id") ? *line->attribute("id") : "line" + std::to_string(result.regions.size());
    const std::string where = "TextLine " + id + " (line " + std::to_string(line->line) + ")";
    const auto* coords = line->first_child("Coords");
    LineRegion region;
    region.id = id;
    if (!coords || !read_coords(*coords, region.polygon)) {
      result.warnings.push_back(where + ": missing or unreadable coordinates");
      continue;
    }
    if (region.polygon.size() < 3) {
      result.warnings.push_back(where + ": polygon has fewer than 3 points");
      continue;
    }
    const auto outside = std::find_if(region.polygon.begin(), region.polygon.end(), [&](const Point& p) {
      return p.x < 0 || p.y < 0 || p.x >= page_image.cols || p.y >= page_image.rows;
    });
    if (outside != region.polygon.end()) {
      result.warnings.push_back(where + ": point (" + std::to_string(outside->x) + "," + std::to_string(outside->y) +
                                ") lies outside the page image");
      continue;
    }
    const auto* uni = line_unicode(*line);
    if (!uni || uni->text.empty()) {
      result.warnings.push_back(where + ": missing transcription");
      continue;
    }
    region.text = uni->text;
    result.regions.push_back(std::move(region));
  }
  return result;
}

bool polygon_contains(std::span<const Point> poly, int x, int y) {
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto a = poly[j], b = poly[i];
    const long long cross =
        static_cast<long long>(b.x - a.x) * (y - a.y) - static_cast<long long>(b.y - a.y) * (x - a.x);
    if (cross == 0 && x >= std::min(a.x, b.x) && x <= std::max(a.x, b.x) && y >= std::min(a.y, b.y) &&
        y <= std::max(a.y, b.y)) {
      return true;
    }
    // Half-open rule on y: each edge contributes for a.y <= y < b.y or b.y <= y < a.y.
    if ((a.y > y) != (b.y > y)) {
      // x-coordinate of the crossing compared exactly: x < a.x + (y-a.y)(b.x-a.x)/(b.y-a.y)
      const long long lhs = static_cast<long long>(x - a.x) * (b.y - a.y);
      const long long rhs = static_cast<long long>(y - a.y) * (b.x - a.x);
      if ((b.y - a.y) > 0 ? lhs < rhs : lhs > rhs) inside = !inside;
    }
  }
  return inside;
}

Raster extract_line(const Raster& page, const LineRegion& region) {
  if (region.polygon.size() < 3) throw Error("region " + region.id + ": polygon needs at least 3 points");
  int x0 = page.cols, y0 = page.rows, x1 = -1, y1 = -1;
  for (const auto& p : region.polygon) {
    if (p.x < 0 || p.y < 0 || p.x >= page.cols || p.y >= page.rows) {
      throw Error("region " + region.id + ": point (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                  ") is outside the " + std::to_string(page.cols) + "x" + std::to_string(page.rows) + " page");
    }
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  Raster out(y1 - y0 + 1, x1 - x0 + 1, 1.0f);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (polygon_contains(region.polygon, x, y)) out.at(y - y0, x - x0) = page.at(y, x);
    }
  }
  return out;
}

ArtificialPage concat_lines_to_page(std::span<const LineSample> lines, int gap) {
  if (lines.empty()) throw Error("cannot build a page from zero lines");
  if (gap < 0) throw Error("gap must be non-negative");
  int width = 0, height = 0;
  for (const auto& l : lines) {
    if (l.variant != lines.front().variant) throw Error("all lines on an artificial page must share a variant");
    width = std::max(width, l.image.cols);
    height += l.image.rows;
  }
  height += gap * static_cast<int>(lines.size() - 1);

  ArtificialPage out{Raster(height, width, 1.0f), {}};
  int y = 0;
  for (const auto& l : lines) {
    for (int r = 0; r < l.image.rows; ++r) {
      std::copy_n(l.image.px.begin() + static_cast<std::ptrdiff_t>(r) * l.image.cols, l.image.cols,
                  out.page.px.begin() + static_cast<std::ptrdiff_t>(y + r) * width);
    }
    const int x1 = l.image.cols - 1, y1 = y + l.image.rows - 1;
    out.regions.push_back(LineRegion{l.line_id, {{0, y}, {x1, y}, {x1, y1}, {0, y1}}, utf8::encode(l.transcription)});
    y += l.image.rows + gap;
  }
  return out;
}

namespace {
std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}
}  // namespace

std::string write_page_xml(const ArtificialPage& page, std::string_view image_filename) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<PcGts xmlns=\"http://schema.primaresearch.org/PAGE/gts/pagecontent/2019-07-15\">\n"
      << "  <Page imageFilename=\"" << xml_escape(image_filename) << "\" imageWidth=\"" << page.page.cols
      << "\" imageHeight=\"" << page.page.rows << "\">\n"
      << "    <TextRegion id=\"r0\">\n";
  for (const auto& r : page.regions) {
    out << "      <TextLine id=\"" << xml_escape(r.id) << "\">\n        <Coords points=\"";
    for (std::size_t i = 0; i < r.polygon.size(); ++i) {
      out << (i ? " " : "") << r.polygon[i].x << ',' << r.polygon[i].y;
    }
    out << "\"/>\n        <TextEquiv><Unicode>" << xml_escape(r.text) << "</Unicode></TextEquiv>\n      </TextLine>\n";
  }
  out << "    </TextRegion>\n  </Page>\n</PcGts>\n";
  return out.str();
}

// --- selection and folds ----------------------------------------------------

Corpus select_balanced(Corpus corpus, int cap, std::uint64_t seed) {
  if (cap < 1) throw Error("balance cap must be at least 1");
  for (auto& work : corpus.works) {
    std::set<std::pair<std::string, std::string>> keys;
    for (const auto& l : work.lines) keys.emplace(l.page_id, l.line_id);
    std::vector<std::pair<std::string, std::string>> order(keys.begin(), keys.end());
    KeyedRng rng(seed, hash_string(work.work_id));
    shuffle(order, rng);
    order.resize(std::min(order.size(), static_cast<std::size_t>(cap)));
    const std::set<std::pair<std::string, std::string>> chosen(order.begin(), order.end());
    for (auto& l : work.lines) l.selected = chosen.contains({l.page_id, l.line_id});
  }
  return corpus;
}

std::vector<FoldSplit> split_folds(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw Error("fold count must be at least 2");
  if (n < static_cast<std::size_t>(k)) {
    throw Error("cannot split " + std::to_string(n) + " samples into " + std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  KeyedRng rng(seed, kFoldStream);
  shuffle(order, rng);

  const std::size_t base = n / k, extra = n % k;
  std::vector<FoldSplit> folds(k);
  std::size_t begin = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    for (std::size_t i = 0; i < n; ++i) {
      const bool in_val = i >= begin && i < begin + size;
      (in_val ? folds[f].validation : folds[f].train).push_back(order[i]);
    }
    std::sort(folds[f].validation.begin(), folds[f].validation.end());
    std::sort(folds[f].train.begin(), folds[f].train.end());
    begin += size;
  }
  return folds;
}

std::vector<FoldSplit> split_folds(std::span<const LineSample> samples, int k, std::uint64_t seed) {
  // Group by line key in sorted order so the split ignores input ordering.
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < samples.size(); ++i) groups[samples[i].key()].push_back(i);
  std::vector<const std::vector<std::size_t>*> group_list;
  for (const auto& [key, members] : groups) group_list.push_back(&members);

  const auto group_folds = split_folds(group_list.size(), k, seed);
  std::vector<FoldSplit> out(group_folds.size());
  for (std::size_t f = 0; f < group_folds.size(); ++f) {
    for (auto g : group_folds[f].train) {
      out[f].train.insert(out[f].train.end(), group_list[g]->begin(), group_list[g]->end());
    }
    for (auto g : group_folds[f].validation) {
      out[f].validation.insert(out[f].validation.end(), group_list[g]->begin(), group_list[g]->end());
    }
    std::sort(out[f].train.begin(), out[f].train.end());
    std::sort(out[f].validation.begin(), out[f].validation.end());
  }
  return out;
}

// --- manifest ---------------------------------------------------------------

namespace {

std::string sanitize(std::string_view id) {
  std::string out;
  for (char c : id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

}  // namespace

void write_manifest(const Corpus& corpus, const std::filesystem::path& dir) {
  corpus.validate();
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::ordered_json works = nlohmann::ordered_json::array();
  for (const auto& w : corpus.works) {
    // Pages in first-appearance order.
    std::vector<std::string> page_order;
    std::map<std::string, nlohmann::ordered_json> pages;
    for (const auto& l : w.lines) {
      if (!pages.contains(l.page_id)) {
        page_order.push_back(l.page_id);
        pages[l.page_id] = nlohmann::ordered_json::array();
      }
      const fs::path rel = fs::path("images") / sanitize(w.work_id) / sanitize(l.page_id) /
                           (sanitize(l.line_id) + "." + std::string(to_string(l.variant)) + ".png");
      fs::create_directories((dir / rel).parent_path());
      write_png(dir / rel, l.image);
      pages[l.page_id].push_back({{"line_id", l.line_id},
                                  {"image", rel.generic_string()},
                                  {"text", utf8::encode(l.transcription)},
                                  {"variant", std::string(to_string(l.variant))},
                                  {"selected", l.selected}});
    }
    nlohmann::ordered_json page_list = nlohmann::ordered_json::array();
    for (const auto& p : page_order) page_list.push_back({{"page_id", p}, {"lines", pages[p]}});
    works.push_back({{"work_id", w.work_id}, {"tags", w.tags}, {"pages", page_list}});
  }
  nlohmann::ordered_json doc = {{"format", "lshocr-corpus/1"}, {"works", works}};
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
  out << doc.dump(2) << '\n';
}

Corpus read_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw Error("cannot open manifest " + manifest_path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(manifest_path.string() + ": " + e.what());
  }
  const auto base = manifest_path.parent_path();
  Corpus corpus;
  try {
    if (doc.at("format") != "lshocr-corpus/1") throw Error(manifest_path.string() + ": unsupported manifest format");
    for (const auto& w : doc.at("works")) {
      WorkEntry entry;
      entry.work_id = w.at("work_id").get<std::string>();
      if (w.contains("tags")) entry.tags = w.at("tags").get<std::map<std::string, std::string>>();
      for (const auto& p : w.at("pages")) {
        const auto page_id = p.at("page_id").get<std::string>();
        for (const auto& l : p.at("lines")) {
          LineSample s;
          s.work_id = entry.work_id;
          s.page_id = page_id;
          s.line_id = l.at("line_id").get<std::string>();
          s.transcription = utf8::decode(l.at("text").get<std::string>());
          s.variant = variant_from_string(l.at("variant").get<std::string>());
          s.selected = l.value("selected", true);
          s.image = read_image(base / l.at("image").get<std::string>());
          entry.lines.push_back(std::move(s));
        }
      }
      corpus.works.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(manifest_path.string() + ": " + e.what());
  }
  corpus.validate();
  return corpus;
}

}  // namespace lshocr
