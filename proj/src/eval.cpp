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

#include "lshocr/eval.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "lshocr/error.hpp"
#include "lshocr/utf8.hpp"

namespace lshocr::eval {
namespace {

struct Table {
  std::size_t cols;
  std::vector<std::size_t> d;
  std::size_t& at(std::size_t i, std::size_t j) { return d[i * cols + j]; }
};

Table dp_table(std::u32string_view a, std::u32string_view b) {
  Table t{b.size() + 1, std::vector<std::size_t>((a.size() + 1) * (b.size() + 1))};
  for (std::size_t i = 0; i <= a.size(); ++i) t.at(i, 0) = i;
  for (std::size_t j = 0; j <= b.size(); ++j) t.at(0, j) = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t diag = t.at(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1);
      t.at(i, j) = std::min({diag, t.at(i - 1, j) + 1, t.at(i, j - 1) + 1});
    }
  }
  return t;
}

double percent_of(std::size_t n, std::size_t total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(n) / static_cast<double>(total);
}

}  // namespace

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({diag + (a[i - 1] == b[j - 1] ? 0 : 1), up + 1, row[j - 1] + 1});
      diag = up;
    }
  }
  return row[b.size()];
}

EditAlignment align(std::u32string_view gt, std::u32string_view pred) {
  Table t = dp_table(gt, pred);
  EditAlignment ops;
  std::size_t i = gt.size(), j = pred.size();
  while (i > 0 || j > 0) {
    const std::size_t cur = t.at(i, j);
    if (i > 0 && j > 0 && gt[i - 1] == pred[j - 1] && cur == t.at(i - 1, j - 1)) {
      ops.push_back({OpKind::match, gt[i - 1], pred[j - 1]});
      --i, --j;
    } else if (i > 0 && j > 0 && cur == t.at(i - 1, j - 1) + 1) {
      ops.push_back({OpKind::substitute, gt[i - 1], pred[j - 1]});
      --i, --j;
    } else if (i > 0 && cur == t.at(i - 1, j) + 1) {
      ops.push_back({OpKind::del, gt[i - 1], 0});
      --i;
    } else {
      ops.push_back({OpKind::insert, 0, pred[j - 1]});
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

std::u32string replay(std::u32string_view gt, const EditAlignment& ops) {
  std::u32string out;
  std::size_t i = 0;
  for (const auto& op : ops) {
    if (op.kind == OpKind::insert) {
      out.push_back(op.pred);
      continue;
    }
    if (i >= gt.size() || gt[i] != op.gt) throw Error("edit script does not match the source string");
    ++i;
    if (op.kind != OpKind::del) out.push_back(op.kind == OpKind::match ? op.gt : op.pred);
  }
  if (i != gt.size()) throw Error("edit script leaves source characters unconsumed");
  return out;
}

std::size_t edit_count(const EditAlignment& ops) {
  return static_cast<std::size_t>(std::count_if(ops.begin(), ops.end(), [](const EditOp& o) {
    return o.kind != OpKind::match;
  }));
}

std::u32string nfc(std::u32string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  const std::string bytes = utf8::encode(text);
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(bytes);
  icu::UnicodeString dst = norm->normalize(src, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  std::string out;
  dst.toUTF8String(out);
  return utf8::decode(out);
}

std::u32string prepare(std::u32string_view text, const Normalization& norm) {
  std::u32string s = norm.rules ? textnorm::normalize(text, *norm.rules) : std::u32string(text);
  return norm.nfc ? nfc(s) : s;
}

CerResult cer(std::span<const TextPair> pairs, const Normalization& norm) {
  CerResult r;
  for (const auto& [gt, pred] : pairs) {
    const std::u32string g = prepare(gt, norm), p = prepare(pred, norm);
    r.total_errors += levenshtein(g, p);
    r.total_gt_chars += g.size();
  }
  if (r.total_gt_chars == 0) throw Error("CER undefined: ground truth has no characters");
  r.cer = static_cast<double>(r.total_errors) / static_cast<double>(r.total_gt_chars);
  return r;
}

ConfusionReport confusion_table(std::span<const TextPair> pairs, std::size_t top_n, const Normalization& norm) {
  if (top_n < 1) throw Error("top_n must be at least 1");
  ConfusionReport rep;
  std::map<std::pair<std::u32string, std::u32string>, std::size_t> counts;
  for (const auto& [gt, pred] : pairs) {
    const std::u32string g = prepare(gt, norm), p = prepare(pred, norm);
    rep.total_gt_chars += g.size();
    for (const auto& op : align(g, p)) {
      switch (op.kind) {
        case OpKind::match:
          continue;
        case OpKind::substitute:
          ++counts[{std::u32string(1, op.gt), std::u32string(1, op.pred)}];
          break;
        case OpKind::del:
          ++counts[{std::u32string(1, op.gt), U""}];
          break;
        case OpKind::insert:
          ++counts[{U"", std::u32string(1, op.pred)}];
          break;
      }
      ++rep.total_errors;
    }
  }
  std::vector<ConfusionRow> all;
  for (const auto& [key, n] : counts) all.push_back({key.first, key.second, n, percent_of(n, rep.total_errors)});
  // The map already orders ties lexicographically by (gt, pred).
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.count > b.count; });
  if (all.size() > top_n) {
    for (std::size_t i = top_n; i < all.size(); ++i) rep.remaining_count += all[i].count;
    all.resize(top_n);
  }
  rep.rows = std::move(all);
  rep.remaining_percent = percent_of(rep.remaining_count, rep.total_errors);
  rep.cer = rep.total_gt_chars == 0 ? 0.0
                                    : static_cast<double>(rep.total_errors) / static_cast<double>(rep.total_gt_chars);
  return rep;
}

std::string display_token(std::u32string_view token) {
  std::u32string out;
  for (char32_t c : token) out.push_back(textnorm::is_whitespace(c) ? U'␣' : c);
  return utf8::encode(out);
}

std::string to_json(const ConfusionReport& report) {
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    j["rows"].push_back({{"gt", display_token(r.gt)},
                         {"pred", display_token(r.pred)},
                         {"count", r.count},
                         {"percent", r.percent}});
  }
  j["remaining"] = {{"count", report.remaining_count}, {"percent", report.remaining_percent}};
  j["total_errors"] = report.total_errors;
  j["total_gt_chars"] = report.total_gt_chars;
  j["cer"] = report.cer;
  return j.dump(2) + "\n";
}

std::string to_tsv(const ConfusionReport& report) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << "gt\tpred\tcnt\tperc\n";
  for (const auto& r : report.rows) {
    os << display_token(r.gt) << '\t' << display_token(r.pred) << '\t' << r.count << '\t' << r.percent << '\n';
  }
  os << "Remaining\t\t" << report.remaining_count << '\t' << report.remaining_percent << '\n';
  return os.str();
}

std::string escape_field(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out.push_back(text[i]);
      continue;
    }
    if (++i == text.size()) throw Error("dangling escape in TSV field");
    switch (text[i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: throw Error(std::string("unknown TSV escape \\") + text[i]);
    }
  }
  return out;
}

std::vector<TsvRecord> parse_tsv(std::string_view content) {
  std::vector<TsvRecord> out;
  std::size_t lineno = 0;
  while (!content.empty()) {
    const std::size_t nl = content.find('\n');
    std::string_view line = content.substr(0, nl);
    content = nl == std::string_view::npos ? std::string_view{} : content.substr(nl + 1);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw Error("TSV line " + std::to_string(lineno) + " has no tab");
    out.push_back({std::string(line.substr(0, tab)), utf8::decode(unescape_field(line.substr(tab + 1)))});
  }
  return out;
}

std::vector<TsvRecord> read_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_tsv(ss.str());
}

std::string format_tsv(std::span<const TsvRecord> records) {
  std::string out;
  for (const auto& r : records) out += r.line_id + '\t' + escape_field(utf8::encode(r.text)) + '\n';
  return out;
}

std::vector<TextPair> pair_by_id(std::span<const TsvRecord> gt, std::span<const TsvRecord> pred) {
  std::map<std::string, const std::u32string*> by_id;
  for (const auto& r : pred) {
    if (!by_id.emplace(r.line_id, &r.text).second) throw Error("duplicate prediction id " + r.line_id);
  }
  std::vector<TextPair> out;
  std::map<std::string, bool> seen;
  for (const auto& r : gt) {
    if (!seen.emplace(r.line_id, true).second) throw Error("duplicate ground-truth id " + r.line_id);
    auto it = by_id.find(r.line_id);
    if (it == by_id.end()) throw Error("no prediction for line " + r.line_id);
    out.emplace_back(r.text, *it->second);
  }
  if (out.size() != pred.size()) throw Error("prediction file has lines without ground truth");
  return out;
}

}  // namespace lshocr::eval
