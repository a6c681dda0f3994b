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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lshocr/corpus.hpp"
#include "lshocr/imgproc.hpp"
#include "lshocr/net.hpp"

namespace lshocr::train {

struct TrainConfig {
  std::uint64_t seed = 0;
  int voters = 5;
  int max_epochs = 100;
  int patience = 5;
  std::int64_t eval_interval_samples = 0;  // 0: half an epoch's samples
  int augmentations_per_sample = 5;
  double weight_decay = 1e-5;
  double ema_decay = 0.99;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-7;
  int batch_size = 16;
  std::vector<Variant> variant_list{Variant::bin};
  ArchSpec arch = ArchSpec::desk();
  imgproc::AugmentParams augment;
  int threads = 1;

  void validate() const;
  // `key=value`; unknown keys and malformed values throw.
  void set(std::string_view key, std::string_view value);
};

// Key-value text file, one `key = value` per line, `#` starts a comment.
// Keys are the TrainConfig field names, plus `arch` (desk|full) and the
// ArchSpec fields input_height, conv1_filters, conv2_filters, lstm_hidden,
// dropout.
TrainConfig parse_config(std::string_view text);
TrainConfig load_config(const std::filesystem::path& path);
std::string format_config(const TrainConfig& config);

struct Evaluation {
  std::int64_t samples_seen = 0;
  int epoch = 0;
  double val_cer = 0.0;
};

struct TrainReport {
  std::vector<Evaluation> history;
  std::string stop_reason;  // early_stop | max_epochs
  std::size_t best_index = 0;
  double best_cer = 1.0;
  int epochs_completed = 0;
  std::int64_t samples_seen = 0;
  std::int64_t skipped_samples = 0;
  double wall_seconds = 0.0;
  std::string stage;
};

std::string report_json(const TrainReport& report);

struct TrainResult {
  Checkpoint checkpoint;
  TrainReport report;
};

struct PreprocessParams {
  imgproc::BinarizationParams sauvola = imgproc::sauvola_defaults();
  imgproc::BinarizationParams wolf = imgproc::wolf_defaults();
  imgproc::NlbinParams nlbin;
};

Raster derive_variant(const Raster& image, Variant variant, const PreprocessParams& params = {});

// Network input for one line: the requested variant, taken from the sample
// if it already is that variant, otherwise derived from its image; then
// scaled to `height`.
Raster prepare_line(const LineSample& sample, Variant variant, int height, const PreprocessParams& params = {});

// Early-stopped training of one model. With `init`, training resumes from
// its EMA weights; its codec must cover the training text. Without it a
// fresh model over `codec` (or the training alphabet) is drawn from the seed.
TrainResult train_single(const TrainConfig& config, std::span<const LineSample> train_set,
                         std::span<const LineSample> val_set, const Checkpoint* init = nullptr,
                         const Codec* codec = nullptr, std::string_view stage = "single");

// Voter i trains on fold i of split_folds(data, voters, seed); with one
// voter, fold 0 of a five-way split. Codec built from all of `data`.
std::vector<TrainResult> train_crossfold(const TrainConfig& config, std::span<const LineSample> data,
                                         const Checkpoint* init = nullptr, std::string_view stage = "crossfold");

struct TwoStageResult {
  std::vector<TrainResult> stage1;
  std::vector<TrainResult> stage2;
};

// Stage 1: cross-fold over every line. Stage 2: each voter continues on the
// selected lines of its own fold.
TwoStageResult train_two_stage(const TrainConfig& stage1, const TrainConfig& stage2, const Corpus& corpus);

// Remaps output rows to `new_codec`. Shared characters and blank are copied
// bit-exactly; new characters get Glorot rows drawn from the checkpoint seed.
Checkpoint adapt_codec(const Checkpoint& ckpt, const Codec& new_codec);

struct FoldOutcome {
  std::vector<TrainResult> voters;
  double test_cer = 0.0;
};

struct FinetuneResult {
  std::vector<FoldOutcome> folds;
  double mean_cer = 0.0;
};

// k-fold cross-validation over `lines`. Each fold trains an ensemble on the
// other folds (from `start` after codec adaptation, or from scratch when
// null) and tests on its own.
FinetuneResult finetune(const Checkpoint* start, const TrainConfig& config, std::span<const LineSample> lines,
                        int folds);

// Adapts `start`, cross-fold trains on `train` and scores on `heldout`.
FoldOutcome finetune_holdout(const Checkpoint& start, const TrainConfig& config, std::span<const LineSample> train,
                             std::span<const LineSample> heldout);

// Voted greedy transcriptions of `lines` (bin variant, at the ensemble's
// input height).
std::vector<std::u32string> transcribe(std::span<const Checkpoint> ensemble, std::span<const LineSample> lines,
                                       Variant variant = Variant::bin);
double ensemble_cer(std::span<const Checkpoint> ensemble, std::span<const LineSample> lines,
                    Variant variant = Variant::bin);

std::vector<Checkpoint> checkpoints_of(const std::vector<TrainResult>& results);

// Runs job(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job);

}  // namespace lshocr::train
