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

#include "lshocr/train.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "lshocr/ctc.hpp"
#include "lshocr/error.hpp"
#include "lshocr/eval.hpp"
#include "lshocr/rng.hpp"
#include "lshocr/textnorm.hpp"
#include "lshocr/vote.hpp"

namespace lshocr::train {
namespace {

constexpr std::uint64_t kEpochStream = 0x65706f6368ull;    // "epoch"
constexpr std::uint64_t kDropoutStream = 0x64726f70ull;    // "drop"
constexpr std::uint64_t kAugmentStream = 0x6175676dull;    // "augm"
constexpr std::uint64_t kVoterStream = 0x766f746572ull;    // "voter"
constexpr std::uint64_t kAdaptStream = 0x6164617074ull;    // "adapt"

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const std::string v = trim(value);
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw Error("config key '" + std::string(key) + "': cannot parse '" + v + "'");
  }
  return out;
}

std::vector<Variant> parse_variants(std::string_view value) {
  std::vector<Variant> out;
  std::string item;
  std::istringstream in{std::string(value)};
  while (std::getline(in, item, ',')) {
    const Variant v = variant_from_string(trim(item));
    if (v == Variant::augmented) throw Error("'augmented' is not a preprocessing variant");
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  if (out.empty()) throw Error("variant_list must name at least one variant");
  return out;
}

// One training item: a line, one of its variants, and a copy index (0 is the
// unaugmented original).
struct Item {
  std::uint32_t line;
  std::uint16_t variant;
  std::uint16_t copy;
};

struct Prepared {
  std::vector<std::vector<Raster>> images;  // [line][variant]
  std::vector<ctc::LabelSeq> labels;
  std::vector<std::string> keys;
};

Prepared prepare_training(std::span<const LineSample> lines, const TrainConfig& cfg, const Codec& codec) {
  // Group samples by line so that stored variants are reused.
  std::map<std::string, std::vector<const LineSample*>> groups;
  std::vector<std::string> order;
  for (const auto& s : lines) {
    auto [it, fresh] = groups.try_emplace(s.key());
    if (fresh) order.push_back(s.key());
    it->second.push_back(&s);
  }
  Prepared p;
  for (const auto& key : order) {
    const auto& group = groups[key];
    std::vector<Raster> imgs;
    for (Variant v : cfg.variant_list) {
      const LineSample* src = group.front();
      for (const LineSample* s : group) {
        if (s->variant == v) src = s;
      }
      imgs.push_back(prepare_line(*src, v, cfg.arch.input_height));
    }
    p.images.push_back(std::move(imgs));
    p.labels.push_back(codec.encode(group.front()->transcription));
    p.keys.push_back(key);
  }
  return p;
}

struct ValSet {
  std::vector<Raster> images;
  std::vector<std::u32string> texts;
};

ValSet prepare_validation(std::span<const LineSample> lines, int height) {
  std::map<std::string, const LineSample*> chosen;
  std::vector<std::string> order;
  for (const auto& s : lines) {
    auto [it, fresh] = chosen.try_emplace(s.key(), &s);
    if (fresh) order.push_back(s.key());
    if (s.variant == Variant::bin) it->second = &s;
  }
  ValSet v;
  for (const auto& key : order) {
    v.images.push_back(prepare_line(*chosen[key], Variant::bin, height));
    v.texts.push_back(chosen[key]->transcription);
  }
  return v;
}

double validation_cer(const Checkpoint& ck, const ValSet& val) {
  const std::span<const Checkpoint> one(&ck, 1);
  const auto decoded = vote_and_decode(val.images, one, ck.codec);
  std::vector<eval::TextPair> pairs;
  for (std::size_t i = 0; i < decoded.size(); ++i) pairs.emplace_back(val.texts[i], decoded[i].text);
  return eval::cer(pairs).cer;
}

Checkpoint start_from(const Checkpoint& init) {
  Checkpoint ck = init;
  ck.tensors = ck.ema;
  ck.adam_m.clear();
  ck.adam_v.clear();
  ck.adam_step = 0;
  return ck;
}

std::set<std::string> keys_of(std::span<const LineSample> lines) {
  std::set<std::string> out;
  for (const auto& s : lines) out.insert(s.key());
  return out;
}

std::vector<LineSample> pick(std::span<const LineSample> lines, std::span<const std::size_t> idx) {
  std::vector<LineSample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(lines[i]);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (voters < 1) throw Error("voters must be >= 1");
  if (max_epochs < 1) throw Error("max_epochs must be >= 1");
  if (patience < 1) throw Error("patience must be >= 1");
  if (augmentations_per_sample < 0) throw Error("augmentations_per_sample must be >= 0");
  if (eval_interval_samples < 0) throw Error("eval_interval_samples must be >= 0");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (lr < 0.0) throw Error("lr must be >= 0");
  if (weight_decay < 0.0) throw Error("weight_decay must be >= 0");
  if (!(ema_decay > 0.0 && ema_decay < 1.0)) throw Error("ema_decay must lie in (0, 1)");
  if (threads < 1) throw Error("threads must be >= 1");
  if (variant_list.empty()) throw Error("variant_list must not be empty");
  ArchSpec a = arch;
  if (a.classes == 0) a.classes = 2;
  a.validate();
  augment.validate();
}

void TrainConfig::set(std::string_view key_in, std::string_view value) {
  const std::string key = trim(key_in);
  if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "voters") voters = parse_number<int>(key, value);
  else if (key == "max_epochs") max_epochs = parse_number<int>(key, value);
  else if (key == "patience") patience = parse_number<int>(key, value);
  else if (key == "eval_interval_samples") eval_interval_samples = parse_number<std::int64_t>(key, value);
  else if (key == "augmentations_per_sample") augmentations_per_sample = parse_number<int>(key, value);
  else if (key == "weight_decay") weight_decay = parse_number<double>(key, value);
  else if (key == "ema_decay") ema_decay = parse_number<double>(key, value);
  else if (key == "lr") lr = parse_number<double>(key, value);
  else if (key == "beta1") beta1 = parse_number<double>(key, value);
  else if (key == "beta2") beta2 = parse_number<double>(key, value);
  else if (key == "eps") eps = parse_number<double>(key, value);
  else if (key == "batch_size") batch_size = parse_number<int>(key, value);
  else if (key == "variant_list") variant_list = parse_variants(value);
  else if (key == "threads") threads = parse_number<int>(key, value);
  else if (key == "arch") {
    const std::string v = trim(value);
    if (v == "desk") arch = ArchSpec::desk();
    else if (v == "full") arch = ArchSpec{};
    else throw Error("config key 'arch': expected desk or full, got '" + v + "'");
  } else if (key == "input_height") arch.input_height = parse_number<int>(key, value);
  else if (key == "conv1_filters") arch.conv1_filters = parse_number<int>(key, value);
  else if (key == "conv2_filters") arch.conv2_filters = parse_number<int>(key, value);
  else if (key == "lstm_hidden") arch.lstm_hidden = parse_number<int>(key, value);
  else if (key == "dropout") arch.dropout = parse_number<double>(key, value);
  else if (key == "augment") {
    const std::string v = trim(value);
    if (v == "default") augment = imgproc::AugmentParams{};
    else if (v == "none") augment = imgproc::AugmentParams::identity();
    else throw Error("config key 'augment': expected default or none, got '" + v + "'");
  } else throw Error("unknown config key '" + key + "'");
}

TrainConfig parse_config(std::string_view text) {
  TrainConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    cfg.set(std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const TrainConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "seed = " << c.seed << "\nvoters = " << c.voters << "\nmax_epochs = " << c.max_epochs
     << "\npatience = " << c.patience << "\neval_interval_samples = " << c.eval_interval_samples
     << "\naugmentations_per_sample = " << c.augmentations_per_sample << "\nweight_decay = " << c.weight_decay
     << "\nema_decay = " << c.ema_decay << "\nlr = " << c.lr << "\nbeta1 = " << c.beta1 << "\nbeta2 = " << c.beta2
     << "\neps = " << c.eps << "\nbatch_size = " << c.batch_size << "\nvariant_list = ";
  for (std::size_t i = 0; i < c.variant_list.size(); ++i) os << (i ? "," : "") << to_string(c.variant_list[i]);
  os << "\ninput_height = " << c.arch.input_height << "\nconv1_filters = " << c.arch.conv1_filters
     << "\nconv2_filters = " << c.arch.conv2_filters << "\nlstm_hidden = " << c.arch.lstm_hidden
     << "\ndropout = " << c.arch.dropout << "\nthreads = " << c.threads << "\n";
  return os.str();
}

std::string report_json(const TrainReport& r) {
  nlohmann::ordered_json j;
  j["stage"] = r.stage;
  j["stop_reason"] = r.stop_reason;
  j["best_cer"] = r.best_cer;
  j["best_index"] = r.best_index;
  j["epochs_completed"] = r.epochs_completed;
  j["samples_seen"] = r.samples_seen;
  j["skipped_samples"] = r.skipped_samples;
  j["wall_seconds"] = r.wall_seconds;
  j["history"] = nlohmann::ordered_json::array();
  for (const auto& e : r.history) {
    j["history"].push_back({{"samples_seen", e.samples_seen}, {"epoch", e.epoch}, {"val_cer", e.val_cer}});
  }
  return j.dump();
}

Raster derive_variant(const Raster& image, Variant variant, const PreprocessParams& params) {
  switch (variant) {
    case Variant::raw:
      return image;
    case Variant::bin:
      return imgproc::nlbin(image, params.nlbin).bin;
    case Variant::nrm:
      return imgproc::nlbin(image, params.nlbin).nrm;
    case Variant::sauvola:
      return imgproc::sauvola(image, params.sauvola);
    case Variant::wolf:
      return imgproc::wolf(image, params.wolf);
    default:
      throw Error("cannot derive variant " + std::string(to_string(variant)));
  }
}

Raster prepare_line(const LineSample& sample, Variant variant, int height, const PreprocessParams& params) {
  const Raster img = sample.variant == variant ? sample.image : derive_variant(sample.image, variant, params);
  return imgproc::normalize_height(img, height);
}

TrainResult train_single(const TrainConfig& cfg, std::span<const LineSample> train_set,
                         std::span<const LineSample> val_set, const Checkpoint* init, const Codec* codec_in,
                         std::string_view stage) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  if (train_set.empty()) throw Error("training set is empty");
  if (val_set.empty()) throw Error("validation set is empty");
  {
    const auto tk = keys_of(train_set);
    for (const auto& s : val_set) {
      if (tk.contains(s.key())) throw Error("line " + s.key() + " is in both training and validation sets");
    }
  }

  Checkpoint ck;
  if (init) {
    ck = start_from(*init);
    for (const auto& s : train_set) {
      for (char32_t c : s.transcription) {
        if (!ck.codec.contains(c)) {
          throw Error("training text uses a character outside the checkpoint codec; adapt the codec first");
        }
      }
    }
  } else {
    const Codec codec = codec_in ? *codec_in : textnorm::alphabet_of(train_set);
    ck = init_params(cfg.arch, codec, cfg.seed);
  }
  ck.meta.seed = cfg.seed;
  ck.meta.stage = std::string(stage);
  ck.meta.epochs_seen = 0;

  const Prepared data = prepare_training(train_set, cfg, ck.codec);
  const ValSet val = prepare_validation(val_set, ck.arch.input_height);
  const AdamParams adam{cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay};

  std::vector<Item> items;
  for (std::uint32_t l = 0; l < data.images.size(); ++l) {
    for (std::uint16_t v = 0; v < cfg.variant_list.size(); ++v) {
      for (int c = 0; c <= cfg.augmentations_per_sample; ++c) items.push_back({l, v, static_cast<std::uint16_t>(c)});
    }
  }
  const std::int64_t interval = cfg.eval_interval_samples > 0
                                    ? cfg.eval_interval_samples
                                    : std::max<std::int64_t>(1, (static_cast<std::int64_t>(items.size()) + 1) / 2);

  TrainReport rep;
  rep.stage = std::string(stage);
  Checkpoint best = ck;
  int stale = 0;
  std::int64_t seen = 0, next_eval = interval, step = 0;
  bool stopped = false;

  auto evaluate = [&](int epoch) {
    const double c = validation_cer(ck, val);
    rep.history.push_back({seen, epoch, c});
    if (rep.history.size() == 1 || c < rep.best_cer) {
      rep.best_cer = c;
      rep.best_index = rep.history.size() - 1;
      best = ck;
      best.meta.best_val_cer = c;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      stopped = true;
    }
  };

  for (int epoch = 0; epoch < cfg.max_epochs && !stopped; ++epoch) {
    std::vector<Item> order = items;
    KeyedRng shuffle_rng(cfg.seed, hash_combine(kEpochStream, static_cast<std::uint64_t>(epoch)));
    shuffle(order, shuffle_rng);
    for (std::size_t begin = 0; begin < order.size() && !stopped; begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      std::vector<Raster> imgs;
      std::vector<const ctc::LabelSeq*> labels;
      for (std::size_t i = begin; i < end; ++i) {
        const Item& it = order[i];
        const ctc::LabelSeq& lab = data.labels[it.line];
        const Raster& base = data.images[it.line][it.variant];
        Raster img;
        if (it.copy == 0) {
          img = base;
        } else {
          std::uint64_t stream = hash_combine(kAugmentStream, hash_string(data.keys[it.line]));
          stream = hash_combine(stream, it.copy);
          stream = hash_combine(stream, static_cast<std::uint64_t>(epoch));
          stream = hash_combine(stream, static_cast<std::uint64_t>(cfg.variant_list[it.variant]));
          img = imgproc::augment(base, cfg.augment, cfg.seed, stream);
        }
        if (ArchSpec::frames(img.cols) < ctc::required_frames(lab)) {
          ++rep.skipped_samples;
          continue;
        }
        imgs.push_back(std::move(img));
        labels.push_back(&lab);
      }
      seen += static_cast<std::int64_t>(end - begin);
      if (!imgs.empty()) {
        const LineBatch batch = make_batch(imgs);
        auto out = forward(ck, batch, Mode::train, hash_combine(hash_combine(cfg.seed, kDropoutStream), step));
        std::vector<std::vector<float>> dlogits(imgs.size());
        const double scale = 1.0 / static_cast<double>(imgs.size());
        for (std::size_t b = 0; b < imgs.size(); ++b) {
          const auto lg = ctc::loss_grad(out.probs[b], *labels[b]);
          dlogits[b].resize(lg.grad.size());
          for (std::size_t i = 0; i < lg.grad.size(); ++i) dlogits[b][i] = static_cast<float>(lg.grad[i] * scale);
        }
        const auto grads = backward(ck, out.cache, dlogits);
        adam_step(ck, grads, adam);
        ema_update(ck, cfg.ema_decay);
        ++step;
      }
      while (seen >= next_eval && !stopped) {
        evaluate(epoch);
        next_eval += interval;
      }
    }
    ++rep.epochs_completed;
    ck.meta.epochs_seen = rep.epochs_completed;
  }
  if (!stopped && (rep.history.empty() || rep.history.back().samples_seen != seen)) {
    evaluate(rep.epochs_completed - 1);
  }
  rep.stop_reason = stopped ? "early_stop" : "max_epochs";
  rep.samples_seen = seen;
  best.meta.epochs_seen = rep.epochs_completed;
  best.meta.best_val_cer = rep.best_cer;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(best), std::move(rep)};
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard lock(mu);
          if (next >= n || failure) return;
          i = next++;
        }
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<TrainResult> train_crossfold(const TrainConfig& cfg, std::span<const LineSample> data,
                                         const Checkpoint* init, std::string_view stage) {
  cfg.validate();
  const std::size_t distinct = keys_of(data).size();
  if (distinct < static_cast<std::size_t>(std::max(cfg.voters, 2))) {
    throw Error("cross-fold training needs at least as many lines as voters");
  }
  const auto folds = split_folds(data, cfg.voters == 1 ? 5 : cfg.voters, cfg.seed);
  const Codec codec = init ? init->codec : textnorm::alphabet_of(data);
  std::vector<TrainResult> out(static_cast<std::size_t>(cfg.voters));
  parallel_for(out.size(), cfg.threads, [&](std::size_t v) {
    TrainConfig vc = cfg;
    vc.seed = hash_combine(hash_combine(cfg.seed, kVoterStream), v);
    const auto tr = pick(data, folds[v].train);
    const auto va = pick(data, folds[v].validation);
    out[v] = train_single(vc, tr, va, init, &codec, stage);
  });
  return out;
}

TwoStageResult train_two_stage(const TrainConfig& c1, const TrainConfig& c2, const Corpus& corpus) {
  const auto all = corpus.all_lines();
  if (corpus.selected_lines().empty()) throw Error("no selected lines for the second stage");
  if (c1.voters != c2.voters) throw Error("both stages must use the same number of voters");
  TwoStageResult r;
  r.stage1 = train_crossfold(c1, all, nullptr, "stage1");
  const auto folds = split_folds(all, c1.voters == 1 ? 5 : c1.voters, c1.seed);
  r.stage2.resize(r.stage1.size());
  parallel_for(r.stage2.size(), c2.threads, [&](std::size_t v) {
    std::vector<LineSample> tr, va;
    for (std::size_t i : folds[v].train) {
      if (all[i].selected) tr.push_back(all[i]);
    }
    for (std::size_t i : folds[v].validation) {
      if (all[i].selected) va.push_back(all[i]);
    }
    if (tr.empty() || va.empty()) throw Error("fold " + std::to_string(v) + " has no selected lines");
    TrainConfig vc = c2;
    vc.seed = hash_combine(hash_combine(c2.seed, kVoterStream), v);
    r.stage2[v] = train_single(vc, tr, va, &r.stage1[v].checkpoint, nullptr, "stage2");
  });
  return r;
}

Checkpoint adapt_codec(const Checkpoint& src, const Codec& new_codec) {
  Checkpoint out = src;
  out.adam_m.clear();
  out.adam_v.clear();
  out.adam_step = 0;
  if (new_codec == src.codec) return out;
  const int k_new = static_cast<int>(new_codec.classes());
  const int width = 2 * src.arch.lstm_hidden;
  const double bound = std::sqrt(6.0 / (width + k_new));
  out.codec = new_codec;
  out.arch.classes = k_new;
  auto remap = [&](TensorList<float>& dst, const TensorList<float>& from) {
    const auto& w_old = from[kOutWeight].data;
    const auto& b_old = from[kOutBias].data;
    std::vector<float> w(static_cast<std::size_t>(k_new) * width);
    std::vector<float> b(static_cast<std::size_t>(k_new), 0.0f);
    for (int k = 0; k < k_new; ++k) {
      std::optional<std::size_t> old;
      if (k == 0) {
        old = 0;
      } else if (auto idx = src.codec.index_of(new_codec.char_at(static_cast<std::size_t>(k)))) {
        old = *idx;
      }
      float* row = w.data() + static_cast<std::size_t>(k) * width;
      if (old) {
        std::copy_n(w_old.begin() + static_cast<std::ptrdiff_t>(*old * width), width, row);
        b[k] = b_old[*old];
      } else {
        KeyedRng rng(hash_combine(src.meta.seed, kAdaptStream),
                     static_cast<std::uint64_t>(new_codec.char_at(static_cast<std::size_t>(k))));
        for (int i = 0; i < width; ++i) row[i] = static_cast<float>(rng.uniform(-bound, bound));
      }
    }
    dst[kOutWeight].data = std::move(w);
    dst[kOutWeight].shape = {k_new, width};
    dst[kOutBias].data = std::move(b);
    dst[kOutBias].shape = {k_new};
  };
  remap(out.tensors, src.tensors);
  remap(out.ema, src.ema);
  out.validate();
  return out;
}

std::vector<Checkpoint> checkpoints_of(const std::vector<TrainResult>& results) {
  std::vector<Checkpoint> out;
  for (const auto& r : results) out.push_back(r.checkpoint);
  return out;
}

std::vector<std::u32string> transcribe(std::span<const Checkpoint> ensemble, std::span<const LineSample> lines,
                                       Variant variant) {
  if (ensemble.empty()) throw Error("empty ensemble");
  std::vector<Raster> imgs;
  imgs.reserve(lines.size());
  for (const auto& s : lines) imgs.push_back(prepare_line(s, variant, ensemble.front().arch.input_height));
  std::vector<std::u32string> out;
  for (auto& d : vote_and_decode(imgs, ensemble, ensemble.front().codec)) out.push_back(std::move(d.text));
  return out;
}

double ensemble_cer(std::span<const Checkpoint> ensemble, std::span<const LineSample> lines, Variant variant) {
  const auto pred = transcribe(ensemble, lines, variant);
  std::vector<eval::TextPair> pairs;
  for (std::size_t i = 0; i < lines.size(); ++i) pairs.emplace_back(lines[i].transcription, pred[i]);
  return eval::cer(pairs).cer;
}

FoldOutcome finetune_holdout(const Checkpoint& start, const TrainConfig& cfg, std::span<const LineSample> train,
                             std::span<const LineSample> heldout) {
  const Checkpoint adapted = adapt_codec(start, textnorm::alphabet_of(train));
  FoldOutcome f;
  f.voters = train_crossfold(cfg, train, &adapted, "finetune");
  f.test_cer = ensemble_cer(checkpoints_of(f.voters), heldout);
  return f;
}

FinetuneResult finetune(const Checkpoint* start, const TrainConfig& cfg, std::span<const LineSample> lines,
                        int folds) {
  if (folds < 2) throw Error("finetuning cross-validation needs at least two folds");
  const auto split = split_folds(lines, folds, hash_combine(cfg.seed, 0x6674ull));
  // One codec over the whole corpus, shared by every fold.
  std::optional<Checkpoint> adapted;
  if (start) adapted = adapt_codec(*start, textnorm::alphabet_of(lines));
  FinetuneResult r;
  for (int f = 0; f < folds; ++f) {
    const auto tr = pick(lines, split[f].train);
    const auto te = pick(lines, split[f].validation);
    FoldOutcome o;
    o.voters = train_crossfold(cfg, tr, adapted ? &*adapted : nullptr, adapted ? "finetune" : "scratch");
    o.test_cer = ensemble_cer(checkpoints_of(o.voters), te);
    r.folds.push_back(std::move(o));
    r.mean_cer += r.folds.back().test_cer / folds;
  }
  return r;
}

}  // namespace lshocr::train
