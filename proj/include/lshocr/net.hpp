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
#include <span>
#include <string>
#include <vector>

#include "lshocr/codec.hpp"
#include "lshocr/raster.hpp"

namespace lshocr {

// conv3x3+ReLU -> maxpool2x2 -> conv3x3+ReLU -> maxpool2x2 -> BLSTM ->
// dropout -> linear -> softmax.
struct ArchSpec {
  int input_height = 48;
  int conv1_filters = 40;
  int conv2_filters = 60;
  int lstm_hidden = 200;
  double dropout = 0.5;
  int classes = 0;  // codec size + blank

  // Reduced preset used for desk-scale training.
  static ArchSpec desk();

  void validate() const;
  int feature_dim() const { return conv2_filters * (input_height / 4); }
  static int frames(int width) { return width / 2 / 2; }
  bool operator==(const ArchSpec&) const = default;
};

template <class S>
struct Tensor {
  std::string name;
  std::vector<int> shape;
  std::vector<S> data;

  std::size_t size() const { return data.size(); }
};

template <class S>
using TensorList = std::vector<Tensor<S>>;

// Parameter order, which is also the on-disk order.
enum ParamId : int {
  kConv1Weight,
  kConv1Bias,
  kConv2Weight,
  kConv2Bias,
  kFwInput,
  kFwRecurrent,
  kFwBias,
  kBwInput,
  kBwRecurrent,
  kBwBias,
  kOutWeight,
  kOutBias,
  kParamCount
};

// Zero-filled tensors with the names and shapes `arch` calls for.
template <class S>
TensorList<S> make_params(const ArchSpec& arch);

// (fan_in, fan_out) used for Glorot initialization of a weight tensor.
std::pair<int, int> glorot_fans(const ArchSpec& arch, int param);

template <class To, class From>
TensorList<To> convert(const TensorList<From>& in) {
  TensorList<To> out;
  out.reserve(in.size());
  for (const auto& t : in) out.push_back({t.name, t.shape, std::vector<To>(t.data.begin(), t.data.end())});
  return out;
}

struct TrainMeta {
  std::uint64_t seed = 0;
  int epochs_seen = 0;
  double best_val_cer = 1.0;
  std::string stage = "init";
  bool operator==(const TrainMeta&) const = default;
};

struct Checkpoint {
  ArchSpec arch;
  Codec codec;
  TensorList<float> tensors;
  TensorList<float> ema;
  TrainMeta meta;

  // Adam state. Lives with the training run; not part of the file format.
  TensorList<float> adam_m;
  TensorList<float> adam_v;
  std::int64_t adam_step = 0;

  void validate() const;
};

// Glorot-uniform weights, zero biases, forget-gate bias 1; EMA = weights.
Checkpoint init_params(const ArchSpec& arch, const Codec& codec, std::uint64_t seed);

// Per-frame posteriors, frames x classes, row-stochastic; column 0 is blank.
struct ProbMatrix {
  int frames = 0;
  int classes = 0;
  std::vector<double> p;

  ProbMatrix() = default;
  ProbMatrix(int t, int c, double fill = 0.0) : frames(t), classes(c), p(static_cast<std::size_t>(t) * c, fill) {}
  double& at(int t, int k) { return p[static_cast<std::size_t>(t) * classes + k]; }
  double at(int t, int k) const { return p[static_cast<std::size_t>(t) * classes + k]; }
  bool operator==(const ProbMatrix&) const = default;
};

template <class S>
ProbMatrix softmax(std::span<const S> logits, int frames, int classes);

// Lines padded with white to a common width; true widths carried alongside.
struct LineBatch {
  int height = 0;
  int width = 0;
  std::vector<float> pixels;  // size() x height x width
  std::vector<int> widths;

  std::size_t size() const { return widths.size(); }
};

LineBatch make_batch(std::span<const Raster> lines);

namespace detail {
template <class S>
struct SampleCache;
}

template <class S>
struct NetCache {
  std::vector<detail::SampleCache<S>> samples;
  NetCache();
  ~NetCache();
  NetCache(NetCache&&) noexcept;
  NetCache& operator=(NetCache&&) noexcept;
};

template <class S>
struct NetOutput {
  std::vector<ProbMatrix> probs;
  std::vector<std::vector<S>> logits;  // frames x classes, row-major
  NetCache<S> cache;
};

// Padded frames are excluded: sample b yields frames(widths[b]) rows.
// With training = true, dropout masks are drawn from KeyedRng(dropout_stream, b).
template <class S>
NetOutput<S> forward_params(const ArchSpec& arch, const TensorList<S>& params, const LineBatch& batch, bool training,
                            std::uint64_t dropout_stream);

// Gradients of sum_b <dlogits_b, logits_b> with respect to every tensor.
template <class S>
TensorList<S> backward_params(const ArchSpec& arch, const TensorList<S>& params, const NetCache<S>& cache,
                              std::span<const std::vector<S>> dlogits);

// ReLU on/off bits and max-pool winners; the loss is smooth in the
// parameters wherever this stays fixed.
template <class S>
std::vector<int> activation_pattern(const NetCache<S>& cache);

enum class Mode { train, infer };

// Inference mode runs the EMA tensors without dropout.
NetOutput<float> forward(const Checkpoint& ckpt, const LineBatch& batch, Mode mode, std::uint64_t dropout_stream = 0);
TensorList<float> backward(const Checkpoint& ckpt, const NetCache<float>& cache,
                           std::span<const std::vector<float>> dlogits);

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-7;
  double weight_decay = 1e-5;
};

// Decoupled decay theta *= (1 - lr*wd), then the bias-corrected Adam step.
void adam_step(Checkpoint& ckpt, const TensorList<float>& grads, const AdamParams& params);

// ema += (1 - decay) * (theta - ema)
void ema_update(Checkpoint& ckpt, double decay);

}  // namespace lshocr
