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

#include <doctest.h>
#include <png.h>

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "lshocr/corpus.hpp"
#include "lshocr/error.hpp"
#include "lshocr/image_io.hpp"
#include "lshocr/imgproc.hpp"
#include "lshocr/utf8.hpp"
#include "lshocr/xml.hpp"
#include "test_support.hpp"

using namespace lshocr;
namespace pt = boost::property_tree;

namespace {

const char* kMinimalPage = R"(<?xml version="1.0" encoding="UTF-8"?>
<PcGts xmlns="http://schema.primaresearch.org/PAGE/gts/pagecontent/2013-07-15">
  <Page imageFilename="p.png" imageWidth="100" imageHeight="40">
    <TextRegion id="r1">
      <Coords points="0,0 99,0 99,39 0,39"/>
      <TextLine id="l1">
        <Coords points="10,10 90,10 90,30 10,30"/>
        <TextEquiv><Unicode>abc</Unicode></TextEquiv>
      </TextLine>
    </TextRegion>
  </Page>
</PcGts>
)";

std::string local(const std::string& name) {
  const auto colon = name.find(':');
  return colon == std::string::npos ? name : name.substr(colon + 1);
}

struct OracleLine {
  std::string id, points, text;
};

// Independent walk over a generic DOM.
void walk(const pt::ptree& node, std::vector<OracleLine>& out) {
  for (const auto& [name, child] : node) {
    if (local(name) == "TextLine") {
      OracleLine l;
      l.id = child.get<std::string>("<xmlattr>.id", "");
      for (const auto& [cn, cc] : child) {
        if (local(cn) == "Coords") l.points = cc.get<std::string>("<xmlattr>.points", "");
        if (local(cn) == "TextEquiv") {
          for (const auto& [un, uc] : cc) {
            if (local(un) == "Unicode") l.text = uc.data();
          }
        }
      }
      out.push_back(l);
    } else if (name != "<xmlattr>") {
      walk(child, out);
    }
  }
}

std::vector<OracleLine> oracle_parse(const std::string& xml) {
  std::istringstream in(xml);
  pt::ptree tree;
  pt::read_xml(in, tree);
  std::vector<OracleLine> out;
  walk(tree, out);
  return out;
}

std::string points_string(const std::vector<Point>& poly) {
  std::string s;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    s += (i ? " " : "") + std::to_string(poly[i].x) + "," + std::to_string(poly[i].y);
  }
  return s;
}

bool on_segment(Point a, Point b, int x, int y) {
  const double cross = double(b.x - a.x) * (y - a.y) - double(b.y - a.y) * (x - a.x);
  return cross == 0.0 && x >= std::min(a.x, b.x) && x <= std::max(a.x, b.x) && y >= std::min(a.y, b.y) &&
         y <= std::max(a.y, b.y);
}

// Scanline fill: intersect row y with every edge, sort the crossings, and
// fill between successive pairs. Boundary pixels count as inside.
std::vector<std::vector<bool>> scanline_mask(const std::vector<Point>& poly, int rows, int cols) {
  std::vector<std::vector<bool>> mask(rows, std::vector<bool>(cols, false));
  for (int y = 0; y < rows; ++y) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point a = poly[i], b = poly[(i + 1) % poly.size()];
      if ((a.y > y) != (b.y > y)) xs.push_back(a.x + double(y - a.y) * (b.x - a.x) / double(b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (int x = 0; x < cols; ++x) {
      bool in = false;
      for (std::size_t k = 0; k + 1 < xs.size(); k += 2) in = in || (x > xs[k] && x < xs[k + 1]);
      for (std::size_t i = 0; i < poly.size() && !in; ++i) in = on_segment(poly[i], poly[(i + 1) % poly.size()], x, y);
      mask[y][x] = in;
    }
  }
  return mask;
}

LineSample make_line(std::string id, int rows, int cols, KeyedRng& rng) {
  LineSample s;
  s.image = testing::random_raster(rng, rows, cols);
  s.transcription = U"text " + utf8::decode(id);
  s.work_id = "w";
  s.page_id = "p";
  s.line_id = std::move(id);
  return s;
}

}  // namespace

TEST_CASE("minimal PAGE file agrees with a generic XML walk") {
  const Raster page(40, 100);
  const auto res = parse_page_xml(kMinimalPage, page);
  const auto oracle = oracle_parse(kMinimalPage);
  REQUIRE(res.regions.size() == 1);
  REQUIRE(oracle.size() == 1);
  CHECK(res.warnings.empty());
  CHECK(res.regions[0].id == oracle[0].id);
  CHECK(points_string(res.regions[0].polygon) == oracle[0].points);
  CHECK(res.regions[0].text == oracle[0].text);
  CHECK(res.regions[0].polygon == std::vector<Point>{{10, 10}, {90, 10}, {90, 30}, {10, 30}});
  CHECK(res.regions[0].text == "abc");
}

TEST_CASE("document order, skips with warnings, schema versions") {
  const std::string xml = R"(<?xml version="1.0"?>
<pc:PcGts xmlns:pc="http://schema.primaresearch.org/PAGE/gts/pagecontent/2019-07-15">
 <pc:Page>
  <pc:TextRegion>
   <pc:TextLine id="a"><pc:Coords points="0,0 5,0 5,5"/><pc:TextEquiv><pc:Unicode>first &amp; one</pc:Unicode></pc:TextEquiv></pc:TextLine>
   <pc:TextLine id="b"><pc:Coords points="0,0 5,0 5,5"/></pc:TextLine>
   <pc:TextLine id="c"><pc:Coords points="0,0 5,0 5,5"/>
     <pc:TextEquiv index="2"><pc:Unicode>worse</pc:Unicode></pc:TextEquiv>
     <pc:TextEquiv index="1"><pc:Unicode>third</pc:Unicode></pc:TextEquiv></pc:TextLine>
   <pc:TextLine id="d"><pc:TextEquiv><pc:Unicode>no coords</pc:Unicode></pc:TextEquiv></pc:TextLine>
   <pc:TextLine id="e"><pc:Coords points="0,0 50,0 5,5"/><pc:TextEquiv><pc:Unicode>off page</pc:Unicode></pc:TextEquiv></pc:TextLine>
  </pc:TextRegion>
 </pc:Page>
</pc:PcGts>)";
  const auto res = parse_page_xml(xml, Raster(10, 10));
  REQUIRE(res.regions.size() == 2);
  CHECK(res.regions[0].id == "a");
  CHECK(res.regions[0].text == "first & one");
  CHECK(res.regions[1].id == "c");
  CHECK(res.regions[1].text == "third");
  REQUIRE(res.warnings.size() == 3);
  CHECK(res.warnings[0].find("TextLine b") != std::string::npos);
  CHECK(res.warnings[2].find("(50,0)") != std::string::npos);

  const std::string legacy = R"(<PcGts xmlns="http://schema.primaresearch.org/PAGE/gts/pagecontent/2010-03-19"><Page>
    <TextRegion><TextLine id="x"><Coords><Point x="1" y="1"/><Point x="4" y="1"/><Point x="4" y="3"/></Coords>
    <TextEquiv><Unicode>old</Unicode></TextEquiv></TextLine></TextRegion></Page></PcGts>)";
  const auto old = parse_page_xml(legacy, Raster(10, 10));
  REQUIRE(old.regions.size() == 1);
  CHECK(old.regions[0].polygon.size() == 3);
}

TEST_CASE("three lines, one without text") {
  std::string xml = "<PcGts><Page>";
  for (int i = 0; i < 3; ++i) {
    xml += "<TextLine id=\"l" + std::to_string(i) + "\"><Coords points=\"0,0 3,0 3,3\"/>";
    if (i != 1) xml += "<TextEquiv><Unicode>t" + std::to_string(i) + "</Unicode></TextEquiv>";
    xml += "</TextLine>";
  }
  xml += "</Page></PcGts>";
  const auto res = parse_page_xml(xml, Raster(5, 5));
  CHECK(res.regions.size() == 2);
  CHECK(res.warnings.size() == 1);
}

TEST_CASE("malformed XML reports line and column") {
  try {
    xml::parse("<a>\n  <b></c>\n</a>");
    FAIL("expected a parse error");
  } catch (const xml::ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() > 1);
  }
  CHECK_THROWS_AS(xml::parse("<a x='1' x='2'/>"), xml::ParseError);
  CHECK_THROWS_AS(xml::parse("<a></a><b/>"), xml::ParseError);
  CHECK_THROWS_AS(xml::parse("<a>&bogus;</a>"), xml::ParseError);
  CHECK_THROWS_AS(parse_page_xml("<PcGts><Page>", Raster(2, 2)), xml::ParseError);
  const auto el = xml::parse("\xEF\xBB\xBF<?xml version='1.0'?><!-- c --><a>x<![CDATA[<y>]]>&#65;&#x42;</a>");
  CHECK(el.text == "x<y>AB");
}

TEST_CASE("point in polygon matches a scanline oracle") {
  KeyedRng rng(11, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 12 + static_cast<int>(rng.below(20)), cols = 12 + static_cast<int>(rng.below(30));
    std::vector<Point> poly(3 + rng.below(5));
    for (auto& p : poly) p = {static_cast<int>(rng.below(cols)), static_cast<int>(rng.below(rows))};
    const auto mask = scanline_mask(poly, rows, cols);
    for (int y = 0; y < rows; ++y) {
      for (int x = 0; x < cols; ++x) REQUIRE(polygon_contains(poly, x, y) == mask[y][x]);
    }
  }
}

TEST_CASE("extract_line") {
  const Raster black(20, 40, 0.0f);
  SUBCASE("rectangle on the left half") {
    const Raster r = extract_line(black, {"l", {{0, 0}, {19, 0}, {19, 19}, {0, 19}}, "x"});
    CHECK(r.rows == 20);
    CHECK(r.cols == 20);
    CHECK(std::all_of(r.px.begin(), r.px.end(), [](float v) { return v == 0.0f; }));
  }
  SUBCASE("triangle against the oracle") {
    const std::vector<Point> tri{{2, 1}, {30, 6}, {9, 18}};
    const Raster r = extract_line(black, {"t", tri, "x"});
    const auto mask = scanline_mask(tri, 20, 40);
    for (int y = 1; y <= 18; ++y) {
      for (int x = 2; x <= 30; ++x) CHECK(r.at(y - 1, x - 2) == (mask[y][x] ? 0.0f : 1.0f));
    }
  }
  SUBCASE("full page polygon is the identity") {
    KeyedRng rng(3, 3);
    const Raster page = testing::random_raster(rng, 20, 40);
    CHECK(extract_line(page, {"f", {{0, 0}, {39, 0}, {39, 19}, {0, 19}}, "x"}) == page);
  }
  SUBCASE("out-of-bounds point is named") {
    CHECK_THROWS_WITH_AS(extract_line(black, {"o", {{0, 0}, {40, 0}, {0, 5}}, "x"}), doctest::Contains("(40,0)"),
                         Error);
  }
}

TEST_CASE("artificial pages") {
  KeyedRng rng(5, 5);
  std::vector<LineSample> lines{make_line("a", 48, 100, rng), make_line("b", 48, 80, rng)};
  const auto page = concat_lines_to_page(lines, 4);
  CHECK(page.page.rows == 100);
  CHECK(page.page.cols == 100);
  REQUIRE(page.regions.size() == 2);
  CHECK(page.regions[1].polygon[0].y == 52);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    CHECK(extract_line(page.page, page.regions[i]) == lines[i].image);
    CHECK(utf8::decode(page.regions[i].text) == lines[i].transcription);
  }
  // The written PAGE document parses back to the same regions.
  const auto reparsed = parse_page_xml(write_page_xml(page, "page.png"), page.page);
  REQUIRE(reparsed.regions.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(reparsed.regions[i].polygon == page.regions[i].polygon);
    CHECK(extract_line(page.page, reparsed.regions[i]) == lines[i].image);
    CHECK(reparsed.regions[i].text == page.regions[i].text);
  }
  const auto single = concat_lines_to_page(std::span(lines).first(1), 7);
  CHECK(single.page == lines[0].image);
  CHECK_THROWS_AS(concat_lines_to_page({}, 0), Error);
}

TEST_CASE("balanced selection") {
  KeyedRng rng(9, 9);
  Corpus c;
  for (auto [work, n] : {std::pair<std::string, int>{"big", 100}, {"small", 30}}) {
    auto& w = c.work(work);
    for (int i = 0; i < n; ++i) {
      LineSample s = make_line("l" + std::to_string(i), 4, 4, rng);
      s.work_id = work;
      w.lines.push_back(s);
    }
  }
  const Corpus sel = select_balanced(c, 50, 1);
  auto count = [](const WorkEntry& w) {
    return std::count_if(w.lines.begin(), w.lines.end(), [](const LineSample& l) { return l.selected; });
  };
  CHECK(count(sel.works[0]) == 50);
  CHECK(count(sel.works[1]) == 30);
  CHECK(sel.line_count() == c.line_count());

  auto chosen = [&](const Corpus& x, const std::string& work) {
    std::set<std::string> out;
    for (const auto& w : x.works) {
      if (w.work_id != work) continue;
      for (const auto& l : w.lines) {
        if (l.selected) out.insert(l.key());
      }
    }
    return out;
  };
  CHECK(chosen(select_balanced(c, 50, 1), "big") == chosen(sel, "big"));
  CHECK(chosen(select_balanced(c, 50, 2), "big") != chosen(sel, "big"));
  // Reordering lines and adding a work leave the selection alone.
  Corpus shuffled = c;
  std::reverse(shuffled.works[0].lines.begin(), shuffled.works[0].lines.end());
  std::reverse(shuffled.works.begin(), shuffled.works.end());
  shuffled.work("extra").lines.push_back(make_line("z", 4, 4, rng));
  shuffled.works.back().lines.back().work_id = "extra";
  CHECK(chosen(select_balanced(shuffled, 50, 1), "big") == chosen(sel, "big"));
  CHECK_THROWS_AS(select_balanced(c, 0, 1), Error);
}

TEST_CASE("fold splits partition the samples") {
  const auto folds = split_folds(100, 5, 3);
  REQUIRE(folds.size() == 5);
  std::set<std::size_t> all;
  for (const auto& f : folds) {
    CHECK(f.validation.size() == 20);
    CHECK(f.train.size() == 80);
    for (auto i : f.validation) CHECK(all.insert(i).second);
    std::set<std::size_t> u(f.train.begin(), f.train.end());
    u.insert(f.validation.begin(), f.validation.end());
    CHECK(u.size() == 100);
  }
  CHECK(all.size() == 100);
  const auto nine = split_folds(9, 2, 3);
  CHECK(nine[0].validation.size() == 5);
  CHECK(nine[1].validation.size() == 4);
  CHECK(split_folds(100, 5, 3)[2].validation == folds[2].validation);
  CHECK_THROWS_AS(split_folds(3, 5, 1), Error);
  CHECK_THROWS_AS(split_folds(10, 1, 1), Error);

  // Variants of one line share a shard.
  KeyedRng rng(1, 1);
  std::vector<LineSample> samples;
  for (int i = 0; i < 20; ++i) {
    for (Variant v : {Variant::raw, Variant::bin}) {
      LineSample s = make_line("l" + std::to_string(i), 2, 2, rng);
      s.variant = v;
      samples.push_back(s);
    }
  }
  for (const auto& f : split_folds(samples, 4, 8)) {
    std::set<std::string> val, tr;
    for (auto i : f.validation) val.insert(samples[i].key());
    for (auto i : f.train) tr.insert(samples[i].key());
    CHECK(f.validation.size() == 10);
    for (const auto& k : val) CHECK_FALSE(tr.contains(k));
  }
}

TEST_CASE("manifest round trip") {
  testing::TempDir dir("manifest");
  KeyedRng rng(2, 2);
  Corpus c;
  auto& w = c.work("w");
  w.tags["style"] = "test";
  for (int i = 0; i < 3; ++i) w.lines.push_back(make_line("l" + std::to_string(i), 5, 7, rng));
  w.lines[1].selected = false;
  w.lines[2].variant = Variant::bin;
  w.lines[2].transcription = U"ﬀ æ \"q\"";
  write_manifest(c, dir.path());
  const Corpus back = read_manifest(dir / "manifest.json");
  REQUIRE(back.works.size() == 1);
  CHECK(back.works[0].tags == w.tags);
  REQUIRE(back.works[0].lines.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& a = w.lines[i];
    const auto& b = back.works[0].lines[i];
    CHECK(a.image == b.image);
    CHECK(a.transcription == b.transcription);
    CHECK(a.key() == b.key());
    CHECK(a.variant == b.variant);
    CHECK(a.selected == b.selected);
  }
  Corpus dup = c;
  dup.works[0].lines.push_back(dup.works[0].lines[0]);
  CHECK_THROWS_AS(dup.validate(), Error);
  CHECK_THROWS_AS(read_manifest(dir / "missing.json"), Error);
}

TEST_CASE("image files") {
  testing::TempDir dir("images");
  KeyedRng rng(4, 4);
  const Raster img = testing::random_raster(rng, 9, 13);
  write_png(dir / "g.png", img);
  CHECK(read_image(dir / "g.png") == img);

  {
    std::ofstream pgm(dir / "g.pgm", std::ios::binary);
    pgm << "P5\n# comment\n13 9\n255\n";
    for (float v : img.px) pgm.put(static_cast<char>(level8(v)));
  }
  CHECK(read_image(dir / "g.pgm") == img);

  // 24-bit color goes through the luma formula.
  std::vector<unsigned char> rgb(9 * 13 * 3);
  for (auto& b : rgb) b = static_cast<unsigned char>(rng.below(256));
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  pi.width = 13;
  pi.height = 9;
  pi.format = PNG_FORMAT_RGB;
  REQUIRE(png_image_write_to_file(&pi, (dir / "c.png").c_str(), 0, rgb.data(), 0, nullptr));
  ColorRaster color(9, 13);
  for (std::size_t i = 0; i < rgb.size(); ++i) color.rgb[i] = rgb[i] / 255.0f;
  const Raster gray = imgproc::to_grayscale(color);
  const Raster loaded = read_image(dir / "c.png");
  REQUIRE(loaded.rows == 9);
  for (std::size_t i = 0; i < gray.px.size(); ++i) CHECK(loaded.px[i] == quantize8(gray.px[i]));
  CHECK_THROWS_AS(read_image(dir / "nope.png"), Error);
}
