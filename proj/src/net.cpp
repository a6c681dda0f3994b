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

#include "lshocr/net.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "lshocr/error.hpp"
#include "lshocr/rng.hpp"

namespace lshocr {

ArchSpec ArchSpec::desk() {
  ArchSpec a;
  a.input_height = 20;
  a.conv1_filters = 8;
  a.conv2_filters = 16;
  a.lstm_hidden = 48;
  a.dropout = 0.5;
  return a;
}

void ArchSpec::validate() const {
  if (input_height < 4 || input_height % 4 != 0) throw Error("input height must be a positive multiple of 4");
  if (conv1_filters < 1 || conv2_filters < 1 || lstm_hidden < 1) throw Error("layer sizes must be at least 1");
  if (classes < 2) throw Error("output layer needs at least blank + one character");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("dropout must lie in [0,1)");
}

template <class S>
TensorList<S> make_params(const ArchSpec& a) {
  const int f1 = a.conv1_filters, f2 = a.conv2_filters, h = a.lstm_hidden, d = a.feature_dim(), k = a.classes;
  auto t = [](std::string name, std::vector<int> shape) {
    std::size_t n = 1;
    for (int s : shape) n *= static_cast<std::size_t>(s);
    return Tensor<S>{std::move(name), std::move(shape), std::vector<S>(n, S(0))};
  };
  TensorList<S> p;
  p.push_back(t("conv1.weight", {f1, 1, 3, 3}));
  p.push_back(t("conv1.bias", {f1}));
  p.push_back(t("conv2.weight", {f2, f1, 3, 3}));
  p.push_back(t("conv2.bias", {f2}));
  for (const char* dir : {"lstm_fw", "lstm_bw"}) {
    p.push_back(t(std::string(dir) + ".w_ih", {4 * h, d}));
    p.push_back(t(std::string(dir) + ".w_hh", {4 * h, h}));
    p.push_back(t(std::string(dir) + ".bias", {4 * h}));
  }
  p.push_back(t("output.weight", {k, 2 * h}));
  p.push_back(t("output.bias", {k}));
  return p;
}

template TensorList<float> make_params<float>(const ArchSpec&);
template TensorList<double> make_params<double>(const ArchSpec&);

std::pair<int, int> glorot_fans(const ArchSpec& a, int param) {
  const int h = a.lstm_hidden;
  switch (param) {
    case kConv1Weight: return {9, a.conv1_filters * 9};
    case kConv2Weight: return {a.conv1_filters * 9, a.conv2_filters * 9};
    case kFwInput:
    case kBwInput: return {a.feature_dim(), 4 * h};
    case kFwRecurrent:
    case kBwRecurrent: return {h, 4 * h};
    case kOutWeight: return {2 * h, a.classes};
    default: return {0, 0};
  }
}

void Checkpoint::validate() const {
  arch.validate();
  if (arch.classes != static_cast<int>(codec.classes())) throw Error("output layer does not match codec size");
  const auto expected = make_params<float>(arch);
  if (tensors.size() != expected.size() || ema.size() != expected.size()) throw Error("checkpoint tensor count mismatch");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (tensors[i].name != expected[i].name || tensors[i].shape != expected[i].shape ||
        tensors[i].data.size() != expected[i].data.size()) {
      throw Error("checkpoint tensor '" + tensors[i].name + "' does not match the architecture");
    }
    if (ema[i].name != tensors[i].name || ema[i].shape != tensors[i].shape || ema[i].data.size() != tensors[i].data.size()) {
      throw Error("EMA tensor '" + ema[i].name + "' does not match its weight tensor");
    }
  }
}

Checkpoint init_params(const ArchSpec& arch_in, const Codec& codec, std::uint64_t seed) {
  Checkpoint ck;
  ck.arch = arch_in;
  ck.arch.classes = static_cast<int>(codec.classes());
  ck.arch.validate();
  ck.codec = codec;
  ck.tensors = make_params<float>(ck.arch);
  for (int i = 0; i < kParamCount; ++i) {
    auto& t = ck.tensors[i];
    const auto [fan_in, fan_out] = glorot_fans(ck.arch, i);
    if (fan_in > 0) {
      const double bound = std::sqrt(6.0 / (fan_in + fan_out));
      KeyedRng rng(seed, static_cast<std::uint64_t>(i) + 1);
      for (float& v : t.data) v = static_cast<float>(rng.uniform(-bound, bound));
    }
  }
  const int h = ck.arch.lstm_hidden;
  for (int b : {kFwBias, kBwBias}) {
    std::fill(ck.tensors[b].data.begin() + h, ck.tensors[b].data.begin() + 2 * h, 1.0f);
  }
  ck.ema = ck.tensors;
  ck.meta.seed = seed;
  return ck;
}

template <class S>
ProbMatrix softmax(std::span<const S> logits, int frames, int classes) {
  ProbMatrix out(frames, classes);
  for (int t = 0; t < frames; ++t) {
    const S* row = logits.data() + static_cast<std::size_t>(t) * classes;
    double mx = row[0];
    for (int k = 1; k < classes; ++k) mx = std::max(mx, static_cast<double>(row[k]));
    double z = 0.0;
    for (int k = 0; k < classes; ++k) z += out.at(t, k) = std::exp(static_cast<double>(row[k]) - mx);
    for (int k = 0; k < classes; ++k) out.at(t, k) /= z;
  }
  return out;
}

template ProbMatrix softmax<float>(std::span<const float>, int, int);
template ProbMatrix softmax<double>(std::span<const double>, int, int);

LineBatch make_batch(std::span<const Raster> lines) {
  LineBatch b;
  if (lines.empty()) return b;
  b.height = lines.front().rows;
  for (const auto& l : lines) {
    if (l.rows != b.height) throw Error("all lines in a batch must share one height");
    b.width = std::max(b.width, l.cols);
  }
  b.pixels.assign(lines.size() * b.height * static_cast<std::size_t>(b.width), 1.0f);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (int r = 0; r < b.height; ++r) {
      std::copy_n(lines[i].px.begin() + static_cast<std::ptrdiff_t>(r) * lines[i].cols, lines[i].cols,
                  b.pixels.begin() + static_cast<std::ptrdiff_t>((i * b.height + r) * b.width));
    }
    b.widths.push_back(lines[i].cols);
  }
  return b;
}

namespace detail {

template <class S>
using MatR = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using MatC = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

struct LstmShape {
  int hidden;
};

template <class S>
struct LstmCache {
  MatC<S> x;      // D x T, in processing order
  MatC<S> gates;  // 4H x T activated i, f, g, o
  MatC<S> cell;   // H x T
  MatC<S> hid;    // H x T
};

template <class S>
struct SampleCache {
  int height = 0, width = 0, frames = 0;
  MatR<S> cols1;  // 9 x HW
  MatR<S> act1;   // F1 x HW, post-ReLU
  std::vector<int> arg1;
  MatR<S> cols2;  // F1*9 x (H/2 * W/2)
  MatR<S> act2;
  std::vector<int> arg2;
  LstmCache<S> fw, bw;
  MatC<S> mask;  // 2H x T dropout multipliers; empty in inference
  MatC<S> out_in;  // 2H x T after dropout
};

template <class S>
auto weight(const TensorList<S>& p, int id, int rows, int cols) {
  return Eigen::Map<const MatR<S>>(p[id].data.data(), rows, cols);
}
template <class S>
auto weight(TensorList<S>& p, int id, int rows, int cols) {
  return Eigen::Map<MatR<S>>(p[id].data.data(), rows, cols);
}
template <class S>
auto bias(const TensorList<S>& p, int id) {
  return Eigen::Map<const Vec<S>>(p[id].data.data(), static_cast<Eigen::Index>(p[id].data.size()));
}
template <class S>
auto bias(TensorList<S>& p, int id) {
  return Eigen::Map<Vec<S>>(p[id].data.data(), static_cast<Eigen::Index>(p[id].data.size()));
}

// Plain sequential sums. Eigen's vectorized rowwise().sum() groups terms
// differently from call to call, which breaks bit-exact reruns.
template <class Dst, class M>
void add_row_sums(Dst&& dst, const M& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    typename M::Scalar acc(0);
    for (Eigen::Index c = 0; c < m.cols(); ++c) acc += m(r, c);
    dst(r) += acc;
  }
}

// 3x3 same-padding patches: row c*9 + ky*3 + kx, column y*W + x.
template <class S>
MatR<S> im2col(const MatR<S>& in, int h, int w) {
  const int c_in = static_cast<int>(in.rows());
  MatR<S> cols(c_in * 9, h * w);
  for (int c = 0; c < c_in; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        S* dst = cols.row(c * 9 + ky * 3 + kx).data();
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - 1;
          for (int x = 0; x < w; ++x) {
            const int sx = x + kx - 1;
            dst[y * w + x] = (sy >= 0 && sy < h && sx >= 0 && sx < w) ? in(c, sy * w + sx) : S(0);
          }
        }
      }
    }
  }
  return cols;
}

template <class S>
MatR<S> col2im(const MatR<S>& cols, int c_in, int h, int w) {
  MatR<S> out = MatR<S>::Zero(c_in, h * w);
  for (int c = 0; c < c_in; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const S* src = cols.row(c * 9 + ky * 3 + kx).data();
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          for (int x = 0; x < w; ++x) {
            const int sx = x + kx - 1;
            if (sx >= 0 && sx < w) out(c, sy * w + sx) += src[y * w + x];
          }
        }
      }
    }
  }
  return out;
}

// 2x2 max pool, floor semantics; records the winning input index.
template <class S>
MatR<S> maxpool(const MatR<S>& in, int h, int w, std::vector<int>& arg) {
  const int oh = h / 2, ow = w / 2, ch = static_cast<int>(in.rows());
  MatR<S> out(ch, oh * ow);
  arg.assign(static_cast<std::size_t>(ch) * oh * ow, 0);
  for (int c = 0; c < ch; ++c) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        int best = (2 * y) * w + 2 * x;
        for (int idx : {(2 * y) * w + 2 * x + 1, (2 * y + 1) * w + 2 * x, (2 * y + 1) * w + 2 * x + 1}) {
          if (in(c, idx) > in(c, best)) best = idx;
        }
        out(c, y * ow + x) = in(c, best);
        arg[static_cast<std::size_t>(c) * oh * ow + y * ow + x] = best;
      }
    }
  }
  return out;
}

template <class S>
MatR<S> unpool(const MatR<S>& grad, const std::vector<int>& arg, int in_size) {
  MatR<S> out = MatR<S>::Zero(grad.rows(), in_size);
  const auto per = grad.cols();
  for (Eigen::Index c = 0; c < grad.rows(); ++c) {
    for (Eigen::Index j = 0; j < per; ++j) out(c, arg[c * per + j]) += grad(c, j);
  }
  return out;
}

template <class S>
S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

template <class S>
void lstm_forward(const TensorList<S>& p, int base, int hidden, LstmCache<S>& c) {
  const auto d = c.x.rows();
  const auto t_len = c.x.cols();
  const auto w_ih = weight(p, base, 4 * hidden, static_cast<int>(d));
  const auto w_hh = weight(p, base + 1, 4 * hidden, hidden);
  const auto b = bias(p, base + 2);
  MatC<S> z = w_ih * c.x;
  z.colwise() += b;
  c.gates.resize(4 * hidden, t_len);
  c.cell.resize(hidden, t_len);
  c.hid.resize(hidden, t_len);
  Vec<S> h = Vec<S>::Zero(hidden), cell = Vec<S>::Zero(hidden);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    Vec<S> zt = z.col(t);
    zt.noalias() += w_hh * h;
    for (int j = 0; j < hidden; ++j) {
      const S i = sigmoid(zt(j));
      const S f = sigmoid(zt(hidden + j));
      const S g = std::tanh(zt(2 * hidden + j));
      const S o = sigmoid(zt(3 * hidden + j));
      cell(j) = f * cell(j) + i * g;
      h(j) = o * std::tanh(cell(j));
      c.gates(j, t) = i;
      c.gates(hidden + j, t) = f;
      c.gates(2 * hidden + j, t) = g;
      c.gates(3 * hidden + j, t) = o;
    }
    c.cell.col(t) = cell;
    c.hid.col(t) = h;
  }
}

// Returns dL/dx; accumulates parameter gradients.
template <class S>
MatC<S> lstm_backward(const TensorList<S>& p, TensorList<S>& g, int base, int hidden, const LstmCache<S>& c,
                      const MatC<S>& d_hid) {
  const auto d = c.x.rows();
  const auto t_len = c.x.cols();
  const auto w_ih = weight(p, base, 4 * hidden, static_cast<int>(d));
  const auto w_hh = weight(p, base + 1, 4 * hidden, hidden);
  MatC<S> dz(4 * hidden, t_len);
  Vec<S> dh_next = Vec<S>::Zero(hidden), dc_next = Vec<S>::Zero(hidden);
  for (Eigen::Index t = t_len - 1; t >= 0; --t) {
    for (int j = 0; j < hidden; ++j) {
      const S i = c.gates(j, t), f = c.gates(hidden + j, t), gg = c.gates(2 * hidden + j, t),
              o = c.gates(3 * hidden + j, t);
      const S tc = std::tanh(c.cell(j, t));
      const S c_prev = t > 0 ? c.cell(j, t - 1) : S(0);
      const S dh = d_hid(j, t) + dh_next(j);
      const S d_o = dh * tc;
      const S dc = dh * o * (S(1) - tc * tc) + dc_next(j);
      dz(j, t) = dc * gg * i * (S(1) - i);
      dz(hidden + j, t) = dc * c_prev * f * (S(1) - f);
      dz(2 * hidden + j, t) = dc * i * (S(1) - gg * gg);
      dz(3 * hidden + j, t) = d_o * o * (S(1) - o);
      dc_next(j) = dc * f;
    }
    dh_next.noalias() = w_hh.transpose() * dz.col(t);
  }
  MatC<S> h_prev = MatC<S>::Zero(hidden, t_len);
  if (t_len > 1) h_prev.rightCols(t_len - 1) = c.hid.leftCols(t_len - 1);
  weight(g, base, 4 * hidden, static_cast<int>(d)).noalias() += dz * c.x.transpose();
  weight(g, base + 1, 4 * hidden, hidden).noalias() += dz * h_prev.transpose();
  add_row_sums(bias(g, base + 2), dz);
  return w_ih.transpose() * dz;
}

template <class S>
std::vector<S> forward_sample(const ArchSpec& a, const TensorList<S>& p, const float* pixels, int stride, int width,
                              bool training, KeyedRng* rng, SampleCache<S>& c) {
  const int h = a.input_height, f1 = a.conv1_filters, f2 = a.conv2_filters, hid = a.lstm_hidden;
  c.height = h;
  c.width = width;
  // Network input is ink density, so zero padding reads as paper.
  MatR<S> in(1, h * width);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < width; ++x) in(0, y * width + x) = S(1) - static_cast<S>(pixels[y * stride + x]);
  }
  c.cols1 = im2col(in, h, width);
  c.act1 = weight(p, kConv1Weight, f1, 9) * c.cols1;
  c.act1.colwise() += bias(p, kConv1Bias);
  c.act1 = c.act1.cwiseMax(S(0));
  const int h2 = h / 2, w2 = width / 2;
  const MatR<S> pool1 = maxpool(c.act1, h, width, c.arg1);

  c.cols2 = im2col(pool1, h2, w2);
  c.act2 = weight(p, kConv2Weight, f2, f1 * 9) * c.cols2;
  c.act2.colwise() += bias(p, kConv2Bias);
  c.act2 = c.act2.cwiseMax(S(0));
  const int h4 = h2 / 2, t_len = w2 / 2;
  c.frames = t_len;
  const MatR<S> pool2 = maxpool(c.act2, h2, w2, c.arg2);

  MatC<S> x(f2 * h4, t_len);
  for (int f = 0; f < f2; ++f) {
    for (int y = 0; y < h4; ++y) {
      for (int t = 0; t < t_len; ++t) x(f * h4 + y, t) = pool2(f, y * t_len + t);
    }
  }
  c.fw.x = x;
  c.bw.x = x.rowwise().reverse();
  lstm_forward(p, kFwInput, hid, c.fw);
  lstm_forward(p, kBwInput, hid, c.bw);

  MatC<S> r(2 * hid, t_len);
  r.topRows(hid) = c.fw.hid;
  r.bottomRows(hid) = c.bw.hid.rowwise().reverse();
  if (training && a.dropout > 0.0) {
    c.mask.resize(2 * hid, t_len);
    const S keep_scale = S(1) / S(1 - a.dropout);
    for (Eigen::Index j = 0; j < c.mask.size(); ++j) c.mask.data()[j] = rng->uniform() < a.dropout ? S(0) : keep_scale;
    c.out_in = r.cwiseProduct(c.mask);
  } else {
    c.mask.resize(0, 0);
    c.out_in = std::move(r);
  }
  MatC<S> logits = weight(p, kOutWeight, a.classes, 2 * hid) * c.out_in;
  logits.colwise() += bias(p, kOutBias);
  return std::vector<S>(logits.data(), logits.data() + logits.size());
}

template <class S>
void backward_sample(const ArchSpec& a, const TensorList<S>& p, const SampleCache<S>& c, const std::vector<S>& dlogits,
                     TensorList<S>& g) {
  const int h = c.height, width = c.width, f1 = a.conv1_filters, f2 = a.conv2_filters, hid = a.lstm_hidden;
  const int t_len = c.frames, k = a.classes;
  if (static_cast<int>(dlogits.size()) != t_len * k) throw Error("logit gradient has the wrong shape");
  const Eigen::Map<const MatC<S>> dl(dlogits.data(), k, t_len);

  weight(g, kOutWeight, k, 2 * hid).noalias() += dl * c.out_in.transpose();
  add_row_sums(bias(g, kOutBias), dl);
  MatC<S> dr = weight(p, kOutWeight, k, 2 * hid).transpose() * dl;
  if (c.mask.size() > 0) dr = dr.cwiseProduct(c.mask);

  const MatC<S> dh_fw = dr.topRows(hid);
  const MatC<S> dh_bw = dr.bottomRows(hid).rowwise().reverse();
  MatC<S> dx = lstm_backward(p, g, kFwInput, hid, c.fw, dh_fw);
  dx += lstm_backward(p, g, kBwInput, hid, c.bw, dh_bw).rowwise().reverse();

  const int h2 = h / 2, w2 = width / 2, h4 = h2 / 2;
  MatR<S> dpool2(f2, h4 * t_len);
  for (int f = 0; f < f2; ++f) {
    for (int y = 0; y < h4; ++y) {
      for (int t = 0; t < t_len; ++t) dpool2(f, y * t_len + t) = dx(f * h4 + y, t);
    }
  }
  MatR<S> da2 = unpool(dpool2, c.arg2, h2 * w2);
  da2 = da2.cwiseProduct((c.act2.array() > S(0)).template cast<S>().matrix());
  weight(g, kConv2Weight, f2, f1 * 9).noalias() += da2 * c.cols2.transpose();
  add_row_sums(bias(g, kConv2Bias), da2);
  const MatR<S> dcols2 = weight(p, kConv2Weight, f2, f1 * 9).transpose() * da2;
  const MatR<S> dpool1 = col2im(dcols2, f1, h2, w2);

  MatR<S> da1 = unpool(dpool1, c.arg1, h * width);
  da1 = da1.cwiseProduct((c.act1.array() > S(0)).template cast<S>().matrix());
  weight(g, kConv1Weight, f1, 9).noalias() += da1 * c.cols1.transpose();
  add_row_sums(bias(g, kConv1Bias), da1);
}

}  // namespace detail

template <class S>
NetCache<S>::NetCache() = default;
template <class S>
NetCache<S>::~NetCache() = default;
template <class S>
NetCache<S>::NetCache(NetCache&&) noexcept = default;
template <class S>
NetCache<S>& NetCache<S>::operator=(NetCache&&) noexcept = default;

template <class S>
NetOutput<S> forward_params(const ArchSpec& arch, const TensorList<S>& params, const LineBatch& batch, bool training,
                            std::uint64_t dropout_stream) {
  if (batch.size() > 0 && batch.height != arch.input_height) {
    throw Error("line height " + std::to_string(batch.height) + " does not match network input height " +
                std::to_string(arch.input_height));
  }
  NetOutput<S> out;
  out.cache.samples.resize(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    KeyedRng rng(dropout_stream, b);
    const float* px = batch.pixels.data() + b * batch.height * static_cast<std::size_t>(batch.width);
    auto logits = detail::forward_sample(arch, params, px, batch.width, batch.widths[b], training, &rng,
                                         out.cache.samples[b]);
    const int frames = out.cache.samples[b].frames;
    out.probs.push_back(softmax<S>(logits, frames, arch.classes));
    out.logits.push_back(std::move(logits));
  }
  return out;
}

template <class S>
TensorList<S> backward_params(const ArchSpec& arch, const TensorList<S>& params, const NetCache<S>& cache,
                              std::span<const std::vector<S>> dlogits) {
  if (dlogits.size() != cache.samples.size()) throw Error("one logit gradient per sample required");
  TensorList<S> grads = make_params<S>(arch);
  for (std::size_t b = 0; b < dlogits.size(); ++b) detail::backward_sample(arch, params, cache.samples[b], dlogits[b], grads);
  return grads;
}

template <class S>
std::vector<int> activation_pattern(const NetCache<S>& cache) {
  std::vector<int> out;
  for (const auto& c : cache.samples) {
    out.insert(out.end(), c.arg1.begin(), c.arg1.end());
    out.insert(out.end(), c.arg2.begin(), c.arg2.end());
    for (const auto* act : {&c.act1, &c.act2}) {
      for (Eigen::Index i = 0; i < act->size(); ++i) out.push_back(act->data()[i] > S(0));
    }
  }
  return out;
}

template struct NetCache<float>;
template struct NetCache<double>;
template std::vector<int> activation_pattern(const NetCache<float>&);
template std::vector<int> activation_pattern(const NetCache<double>&);
template NetOutput<float> forward_params(const ArchSpec&, const TensorList<float>&, const LineBatch&, bool, std::uint64_t);
template NetOutput<double> forward_params(const ArchSpec&, const TensorList<double>&, const LineBatch&, bool,
                                          std::uint64_t);
template TensorList<float> backward_params(const ArchSpec&, const TensorList<float>&, const NetCache<float>&,
                                           std::span<const std::vector<float>>);
template TensorList<double> backward_params(const ArchSpec&, const TensorList<double>&, const NetCache<double>&,
                                            std::span<const std::vector<double>>);

NetOutput<float> forward(const Checkpoint& ckpt, const LineBatch& batch, Mode mode, std::uint64_t dropout_stream) {
  const bool training = mode == Mode::train;
  return forward_params(ckpt.arch, training ? ckpt.tensors : ckpt.ema, batch, training, dropout_stream);
}

TensorList<float> backward(const Checkpoint& ckpt, const NetCache<float>& cache,
                           std::span<const std::vector<float>> dlogits) {
  return backward_params(ckpt.arch, ckpt.tensors, cache, dlogits);
}

void adam_step(Checkpoint& ck, const TensorList<float>& grads, const AdamParams& hp) {
  if (grads.size() != ck.tensors.size()) throw Error("gradient list does not match checkpoint tensors");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].shape != ck.tensors[i].shape || grads[i].data.size() != ck.tensors[i].data.size()) {
      throw Error("gradient shape mismatch for '" + ck.tensors[i].name + "'");
    }
  }
  if (ck.adam_m.size() != ck.tensors.size()) {
    ck.adam_m = make_params<float>(ck.arch);
    ck.adam_v = make_params<float>(ck.arch);
    ck.adam_step = 0;
  }
  ++ck.adam_step;
  const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(ck.adam_step));
  const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(ck.adam_step));
  const double decay = 1.0 - hp.lr * hp.weight_decay;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    auto& theta = ck.tensors[i].data;
    auto& m = ck.adam_m[i].data;
    auto& v = ck.adam_v[i].data;
    const auto& g = grads[i].data;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double gj = g[j];
      m[j] = static_cast<float>(hp.beta1 * m[j] + (1.0 - hp.beta1) * gj);
      v[j] = static_cast<float>(hp.beta2 * v[j] + (1.0 - hp.beta2) * gj * gj);
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      double t = theta[j];
      if (decay != 1.0) t *= decay;
      t -= hp.lr * m_hat / (std::sqrt(v_hat) + hp.eps);
      theta[j] = static_cast<float>(t);
    }
  }
}

void ema_update(Checkpoint& ck, double decay) {
  if (!(decay > 0.0 && decay < 1.0)) throw Error("EMA decay must lie in (0,1)");
  const float rate = static_cast<float>(1.0 - decay);
  for (std::size_t i = 0; i < ck.tensors.size(); ++i) {
    auto& e = ck.ema[i].data;
    const auto& t = ck.tensors[i].data;
    for (std::size_t j = 0; j < e.size(); ++j) e[j] += rate * (t[j] - e[j]);
  }
}

}  // namespace lshocr
