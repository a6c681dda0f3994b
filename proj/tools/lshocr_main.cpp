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

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lshocr/checkpoint_io.hpp"
#include "lshocr/corpus.hpp"
#include "lshocr/error.hpp"
#include "lshocr/eval.hpp"
#include "lshocr/image_io.hpp"
#include "lshocr/synth.hpp"
#include "lshocr/textnorm.hpp"
#include "lshocr/train.hpp"
#include "lshocr/utf8.hpp"
#include "lshocr/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace lshocr;

namespace {

struct Globals {
  int threads = 1;
  std::string out;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view data) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("write failed: " + p.string());
}

// Results go to --out when given, else stdout.
void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_file(g.out, text.back() == '\n' ? text : text + "\n");
  }
}

fs::path manifest_path(const fs::path& p) { return fs::is_directory(p) ? p / "manifest.json" : p; }

Corpus load_corpus(const fs::path& p) { return read_manifest(manifest_path(p)); }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

textnorm::RuleSet rules_from(const std::string& table, bool virgula) {
  textnorm::RuleSet rules = table.empty() ? textnorm::default_rules() : textnorm::make_rules(textnorm::load_table(table));
  return virgula ? textnorm::with_virgula_folding(std::move(rules)) : rules;
}

std::string gt_tsv(const Corpus& corpus) {
  std::vector<eval::TsvRecord> recs;
  std::set<std::string> seen;
  for (const auto& s : corpus.all_lines()) {
    if (seen.insert(s.key()).second) recs.push_back({s.key(), s.transcription});
  }
  return eval::format_tsv(recs);
}

void write_corpus(const Corpus& corpus, const fs::path& dir) {
  write_manifest(corpus, dir);
  write_file(dir / "gt.tsv", gt_tsv(corpus));
}

json corpus_summary(const Corpus& c, const fs::path& dir) {
  json j;
  j["manifest"] = (dir / "manifest.json").string();
  j["lines"] = c.line_count();
  j["works"] = json::object();
  for (const auto& w : c.works) j["works"][w.work_id] = w.lines.size();
  return j;
}

std::vector<Checkpoint> load_checkpoints(const std::vector<std::string>& paths) {
  std::vector<Checkpoint> out;
  for (const auto& p : paths) out.push_back(load_checkpoint(p));
  return out;
}

void apply_overrides(train::TrainConfig& cfg, const std::vector<std::string>& sets, std::uint64_t seed, int threads) {
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.validate();
}

json reports_json(const std::vector<train::TrainResult>& results) {
  json arr = json::array();
  for (const auto& r : results) arr.push_back(json::parse(train::report_json(r.report)));
  return arr;
}

json save_ensemble(const std::vector<train::TrainResult>& results, const fs::path& dir, const std::string& prefix) {
  fs::create_directories(dir);
  json paths = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const fs::path p = dir / (prefix + std::to_string(i) + ".ckpt");
    save_checkpoint(results[i].checkpoint, p);
    paths.push_back(p.string());
  }
  return paths;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lshocr: line-level OCR training and evaluation toolkit"};
  app.require_subcommand(0, 1);
  Globals g;
  bool version = false;
  app.add_flag("--version", version, "Print toolkit and checkpoint-format versions");
  app.add_option("--threads", g.threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Write the result here instead of stdout");
  bool as_json = true;
  app.add_flag("--json,!--no-json", as_json, "JSON output where applicable (default on)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Extract line images from PAGE XML + page images into a corpus");
  std::vector<std::string> ing_xml, ing_img;
  std::string ing_work = "work", ing_dir, ing_rules;
  ingest->add_option("--xml", ing_xml, "PAGE XML file (repeatable)")->required();
  ingest->add_option("--image", ing_img, "Page image matching each --xml")->required();
  ingest->add_option("--work", ing_work, "Work id");
  ingest->add_option("--dir", ing_dir, "Output corpus directory")->required();
  ingest->add_option("--rules", ing_rules, "Replacement table (default: built-in)");

  // normalize
  auto* normalize = app.add_subcommand("normalize", "Normalize transcriptions in a line_id<TAB>text file");
  std::string nrm_in, nrm_rules;
  bool nrm_virgula = false;
  normalize->add_option("--in", nrm_in, "Input TSV")->required();
  normalize->add_option("--rules", nrm_rules, "Replacement table (default: built-in)");
  normalize->add_flag("--virgula", nrm_virgula, "Also fold virgula to comma");

  // preprocess
  auto* preprocess = app.add_subcommand("preprocess", "Derive binarized/normalized variants of every line");
  std::string pre_in, pre_dir, pre_variants = "bin,nrm";
  int pre_height = 0;
  preprocess->add_option("--corpus", pre_in, "Input corpus manifest or directory")->required();
  preprocess->add_option("--dir", pre_dir, "Output corpus directory")->required();
  preprocess->add_option("--variants", pre_variants, "Comma list of bin,nrm,sauvola,wolf");
  preprocess->add_option("--height", pre_height, "Also scale lines to this height");
  train::PreprocessParams pre_params;
  preprocess->add_option("--window", pre_params.sauvola.window, "Sauvola/Wolf window (odd)")->capture_default_str();
  preprocess->add_option("--sauvola-k", pre_params.sauvola.k, "Sauvola k")->capture_default_str();
  preprocess->add_option("--sauvola-r", pre_params.sauvola.R, "Sauvola dynamic range R")->capture_default_str();
  preprocess->add_option("--wolf-k", pre_params.wolf.k, "Wolf k")->capture_default_str();
  preprocess->add_option("--nlbin-low", pre_params.nlbin.low_percentile, "nlbin low percentile")->capture_default_str();
  preprocess->add_option("--nlbin-high", pre_params.nlbin.high_percentile, "nlbin high percentile")
      ->capture_default_str();
  preprocess->add_option("--nlbin-bg-window", pre_params.nlbin.bg_window, "nlbin background window")
      ->capture_default_str();
  preprocess->add_option("--nlbin-bg-percentile", pre_params.nlbin.bg_percentile, "nlbin background percentile")
      ->capture_default_str();
  preprocess->add_option("--nlbin-threshold", pre_params.nlbin.threshold, "nlbin threshold")->capture_default_str();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic corpus");
  std::string syn_styles = "block,serif,condensed,italic", syn_weights, syn_dir;
  std::size_t syn_lines = 100;
  std::optional<std::uint64_t> syn_seed;
  int syn_cap = 0, syn_min = 5, syn_max = 20;
  synth_cmd->add_option("--styles", syn_styles, "Comma list of styles");
  synth_cmd->add_option("--weights", syn_weights, "Comma list of style weights");
  synth_cmd->add_option("--lines", syn_lines, "Total lines");
  synth_cmd->add_option("--min-length", syn_min, "Shortest transcription");
  synth_cmd->add_option("--max-length", syn_max, "Longest transcription");
  synth_cmd->add_option("--cap", syn_cap, "Mark a balanced selection of this many lines per work");
  synth_cmd->add_option("--seed", syn_seed, "Random seed")->required();
  synth_cmd->add_option("--dir", syn_dir, "Output corpus directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a voter ensemble");
  std::string tr_cfg, tr_cfg2, tr_data, tr_val, tr_dir, tr_mode = "crossfold";
  std::vector<std::string> tr_sets;
  std::optional<std::uint64_t> tr_seed;
  train_cmd->add_option("--config", tr_cfg, "Training config file")->required();
  train_cmd->add_option("--seed", tr_seed, "Random seed")->required();
  train_cmd->add_option("--data", tr_data, "Training corpus manifest or directory")->required();
  train_cmd->add_option("--val", tr_val, "Validation corpus (mode single)");
  train_cmd->add_option("--mode", tr_mode, "single | crossfold | two-stage")
      ->check(CLI::IsMember({"single", "crossfold", "two-stage"}));
  train_cmd->add_option("--stage2-config", tr_cfg2, "Stage-two config (mode two-stage)");
  train_cmd->add_option("--set", tr_sets, "Override a config key (key=value, repeatable)");
  train_cmd->add_option("--dir", tr_dir, "Checkpoint output directory")->required();

  // finetune
  auto* ft_cmd = app.add_subcommand("finetune", "Adapt a checkpoint to a new corpus");
  std::string ft_ckpt, ft_cfg, ft_data, ft_heldout, ft_dir;
  std::vector<std::string> ft_sets;
  int ft_folds = 2;
  std::optional<std::uint64_t> ft_seed;
  ft_cmd->add_option("--checkpoint", ft_ckpt, "Start checkpoint")->required();
  ft_cmd->add_option("--config", ft_cfg, "Training config file")->required();
  ft_cmd->add_option("--seed", ft_seed, "Random seed")->required();
  ft_cmd->add_option("--data", ft_data, "Target corpus")->required();
  ft_cmd->add_option("--heldout", ft_heldout, "Held-out test corpus (skips cross-validation)");
  ft_cmd->add_option("--folds", ft_folds, "Cross-validation folds")->check(CLI::Range(2, 100));
  ft_cmd->add_option("--set", ft_sets, "Override a config key (key=value, repeatable)");
  ft_cmd->add_option("--dir", ft_dir, "Checkpoint output directory");

  // predict
  auto* pred_cmd = app.add_subcommand("predict", "Transcribe lines with a (voted) ensemble");
  std::vector<std::string> pr_ckpts, pr_images;
  std::string pr_corpus, pr_variant = "bin";
  pred_cmd->add_option("--checkpoint", pr_ckpts, "Checkpoint (repeat to vote)")->required();
  auto* pr_corpus_opt = pred_cmd->add_option("--corpus", pr_corpus, "Corpus manifest or directory");
  auto* pr_images_opt = pred_cmd->add_option("--image", pr_images, "Line image (repeatable)");
  pr_corpus_opt->excludes(pr_images_opt);
  pred_cmd->add_option("--variant", pr_variant, "Network input variant");

  // eval / confusions
  auto* eval_cmd = app.add_subcommand("eval", "Character error rate of predictions against ground truth");
  auto* conf_cmd = app.add_subcommand("confusions", "Most common confusions");
  std::string ev_gt, ev_pred, ev_rules, conf_format = "json";
  bool ev_normalize = false, ev_no_nfc = false;
  std::size_t top_n = 10;
  for (auto* c : {eval_cmd, conf_cmd}) {
    c->add_option("--gt", ev_gt, "Ground-truth TSV")->required();
    c->add_option("--pred", ev_pred, "Prediction TSV")->required();
    c->add_flag("--normalize", ev_normalize, "Apply the text rules to both sides first");
    c->add_option("--rules", ev_rules, "Replacement table for --normalize");
    c->add_flag("--no-nfc", ev_no_nfc, "Skip Unicode NFC");
  }
  conf_cmd->add_option("--top-n", top_n, "Rows to list")->check(CLI::PositiveNumber);
  conf_cmd->add_option("--format", conf_format, "json | tsv")->check(CLI::IsMember({"json", "tsv"}));

  // dump-rules
  auto* dump_cmd = app.add_subcommand("dump-rules", "Print the effective replacement table");
  std::string dump_rules;
  dump_cmd->add_option("--rules", dump_rules, "Replacement table (default: built-in)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (version) {
      json j{{"toolkit", std::string(kToolkitVersion)},
             {"checkpoint_format", std::string(kCheckpointMagic.substr(0, kCheckpointMagic.size() - 1))},
             {"checkpoint_format_version", kCheckpointFormatVersion}};
      emit(g, as_json ? j.dump() : "lshocr " + std::string(kToolkitVersion));
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return 2;
    }

    if (ingest->parsed()) {
      if (ing_xml.size() != ing_img.size()) throw CLI::ValidationError("--xml and --image counts differ");
      const auto rules = rules_from(ing_rules, false);
      Corpus corpus;
      auto& work = corpus.work(ing_work);
      json warnings = json::array();
      for (std::size_t i = 0; i < ing_xml.size(); ++i) {
        const Raster page = read_image(ing_img[i]);
        const auto parsed = parse_page_xml(read_file(ing_xml[i]), page);
        const std::string page_id = fs::path(ing_xml[i]).stem().string();
        for (const auto& w : parsed.warnings) {
          warnings.push_back(ing_xml[i] + ": " + w);
          std::cerr << ing_xml[i] << ": " << w << "\n";
        }
        for (const auto& r : parsed.regions) {
          LineSample s;
          s.image = extract_line(page, r);
          s.transcription = textnorm::normalize(utf8::decode(r.text), rules);
          s.work_id = ing_work;
          s.page_id = page_id;
          s.line_id = r.id;
          work.lines.push_back(std::move(s));
        }
      }
      corpus.validate();
      write_corpus(corpus, ing_dir);
      json j = corpus_summary(corpus, ing_dir);
      j["warnings"] = warnings;
      emit(g, j.dump(2));
      return 0;
    }

    if (normalize->parsed()) {
      const auto rules = rules_from(nrm_rules, nrm_virgula);
      auto recs = eval::read_tsv(nrm_in);
      for (auto& r : recs) r.text = textnorm::normalize(r.text, rules);
      emit(g, eval::format_tsv(recs));
      return 0;
    }

    if (preprocess->parsed()) {
      Corpus corpus = load_corpus(pre_in);
      std::vector<Variant> variants;
      for (const auto& v : split_list(pre_variants)) variants.push_back(variant_from_string(v));
      pre_params.wolf.window = pre_params.sauvola.window;
      for (auto& w : corpus.works) {
        std::vector<LineSample> out;
        for (const auto& s : w.lines) {
          if (s.variant != Variant::raw) continue;
          LineSample raw = s;
          if (pre_height > 0) raw.image = imgproc::normalize_height(raw.image, pre_height);
          out.push_back(raw);
          for (Variant v : variants) {
            LineSample d = s;
            d.variant = v;
            d.image = train::prepare_line(s, v, pre_height > 0 ? pre_height : s.image.rows, pre_params);
            out.push_back(std::move(d));
          }
        }
        w.lines = std::move(out);
      }
      corpus.validate();
      write_corpus(corpus, pre_dir);
      emit(g, corpus_summary(corpus, pre_dir).dump(2));
      return 0;
    }

    if (synth_cmd->parsed()) {
      synth::CorpusSpec spec;
      spec.styles = split_list(syn_styles);
      for (const auto& w : split_list(syn_weights)) spec.weights.push_back(std::stod(w));
      spec.total_lines = syn_lines;
      spec.min_length = syn_min;
      spec.max_length = syn_max;
      Corpus corpus = synth::generate_corpus(spec, *syn_seed);
      if (syn_cap > 0) corpus = select_balanced(std::move(corpus), syn_cap, *syn_seed);
      write_corpus(corpus, syn_dir);
      emit(g, corpus_summary(corpus, syn_dir).dump(2));
      return 0;
    }

    if (train_cmd->parsed()) {
      train::TrainConfig cfg = train::load_config(tr_cfg);
      apply_overrides(cfg, tr_sets, *tr_seed, g.threads);
      const Corpus corpus = load_corpus(tr_data);
      json j;
      j["mode"] = tr_mode;
      if (tr_mode == "single") {
        if (tr_val.empty()) throw CLI::ValidationError("--mode single needs --val");
        const auto val = load_corpus(tr_val).all_lines();
        std::vector<train::TrainResult> r;
        r.push_back(train::train_single(cfg, corpus.all_lines(), val, nullptr, nullptr, "single"));
        j["checkpoints"] = save_ensemble(r, tr_dir, "model_");
        j["reports"] = reports_json(r);
      } else if (tr_mode == "crossfold") {
        const auto r = train::train_crossfold(cfg, corpus.all_lines());
        j["checkpoints"] = save_ensemble(r, tr_dir, "voter_");
        j["reports"] = reports_json(r);
      } else {
        train::TrainConfig cfg2 = tr_cfg2.empty() ? cfg : train::load_config(tr_cfg2);
        apply_overrides(cfg2, tr_sets, *tr_seed, g.threads);
        const auto r = train::train_two_stage(cfg, cfg2, corpus);
        j["stage1_checkpoints"] = save_ensemble(r.stage1, fs::path(tr_dir) / "stage1", "voter_");
        j["checkpoints"] = save_ensemble(r.stage2, tr_dir, "voter_");
        j["stage1_reports"] = reports_json(r.stage1);
        j["reports"] = reports_json(r.stage2);
      }
      emit(g, j.dump(2));
      return 0;
    }

    if (ft_cmd->parsed()) {
      train::TrainConfig cfg = train::load_config(ft_cfg);
      apply_overrides(cfg, ft_sets, *ft_seed, g.threads);
      const Checkpoint start = load_checkpoint(ft_ckpt);
      const auto lines = load_corpus(ft_data).all_lines();
      json j;
      if (!ft_heldout.empty()) {
        const auto test = load_corpus(ft_heldout).all_lines();
        const auto f = train::finetune_holdout(start, cfg, lines, test);
        j["test_cer"] = f.test_cer;
        if (!ft_dir.empty()) j["checkpoints"] = save_ensemble(f.voters, ft_dir, "voter_");
        j["reports"] = reports_json(f.voters);
      } else {
        const auto r = train::finetune(&start, cfg, lines, ft_folds);
        j["mean_cer"] = r.mean_cer;
        j["folds"] = json::array();
        for (std::size_t i = 0; i < r.folds.size(); ++i) {
          json fj{{"test_cer", r.folds[i].test_cer}, {"reports", reports_json(r.folds[i].voters)}};
          if (!ft_dir.empty()) {
            fj["checkpoints"] =
                save_ensemble(r.folds[i].voters, fs::path(ft_dir) / ("fold_" + std::to_string(i)), "voter_");
          }
          j["folds"].push_back(std::move(fj));
        }
      }
      emit(g, j.dump(2));
      return 0;
    }

    if (pred_cmd->parsed()) {
      const auto ensemble = load_checkpoints(pr_ckpts);
      const Variant variant = variant_from_string(pr_variant);
      std::vector<LineSample> lines;
      if (!pr_corpus.empty()) {
        std::set<std::string> seen;
        std::map<std::string, std::size_t> slot;
        for (const auto& s : load_corpus(pr_corpus).all_lines()) {
          auto it = slot.find(s.key());
          if (it == slot.end()) {
            slot.emplace(s.key(), lines.size());
            lines.push_back(s);
          } else if (s.variant == variant) {
            lines[it->second] = s;
          }
        }
      } else {
        if (pr_images.empty()) throw CLI::ValidationError("predict needs --corpus or --image");
        for (const auto& p : pr_images) {
          LineSample s;
          s.image = read_image(p);
          s.line_id = fs::path(p).stem().string();
          lines.push_back(std::move(s));
        }
      }
      const auto texts = train::transcribe(ensemble, lines, variant);
      std::vector<eval::TsvRecord> recs;
      for (std::size_t i = 0; i < lines.size(); ++i) {
        recs.push_back({pr_corpus.empty() ? lines[i].line_id : lines[i].key(), texts[i]});
      }
      emit(g, eval::format_tsv(recs));
      return 0;
    }

    if (eval_cmd->parsed() || conf_cmd->parsed()) {
      eval::Normalization norm;
      norm.nfc = !ev_no_nfc;
      if (ev_normalize) norm.rules = rules_from(ev_rules, false);
      const auto gt = eval::read_tsv(ev_gt);
      const auto pred = eval::read_tsv(ev_pred);
      const auto pairs = eval::pair_by_id(gt, pred);
      if (eval_cmd->parsed()) {
        const auto r = eval::cer(pairs, norm);
        json j{{"cer", r.cer}, {"total_errors", r.total_errors}, {"total_gt_chars", r.total_gt_chars},
               {"lines", pairs.size()}};
        emit(g, j.dump(2));
      } else {
        const auto rep = eval::confusion_table(pairs, top_n, norm);
        emit(g, conf_format == "tsv" ? eval::to_tsv(rep) : eval::to_json(rep));
      }
      return 0;
    }

    if (dump_cmd->parsed()) {
      const auto map = dump_rules.empty() ? textnorm::parse_table(textnorm::default_table_text())
                                          : textnorm::load_table(dump_rules);
      json rows = json::array();
      for (const auto& [from, to] : map.entries()) rows.push_back({{"from", utf8::encode(from)}, {"to", utf8::encode(to)}});
      json j{{"replacements", rows},
             {"pipeline", {"replacements", "punctuation_spacing", "whitespace_collapse", "whitespace_trim"}}};
      emit(g, j.dump(2));
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg) {
      if (c == '\n') c = ' ';
    }
    std::cerr << "error: " << msg << "\n";
    return 1;
  }
  return 0;
}
