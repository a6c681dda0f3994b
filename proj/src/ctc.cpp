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

#include "lshocr/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lshocr/error.hpp"

namespace lshocr::ctc {
namespace {

constexpr double kFloor = 1e-30;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

void check_label(const ProbMatrix& probs, const LabelSeq& label) {
  if (label.empty()) throw Error("CTC label must not be empty");
  for (int l : label) {
    if (l <= 0 || l >= probs.classes) throw Error("CTC label index " + std::to_string(l) + " out of range");
  }
  const int need = required_frames(label);
  if (probs.frames < need) {
    throw Error("label too long: needs " + std::to_string(need) + " frames, have " + std::to_string(probs.frames));
  }
}

}  // namespace

int required_frames(const LabelSeq& label) {
  int n = static_cast<int>(label.size());
  for (std::size_t i = 1; i < label.size(); ++i) n += label[i] == label[i - 1] ? 1 : 0;
  return n;
}

LossGrad loss_grad(const ProbMatrix& probs, const LabelSeq& label) {
  check_label(probs, label);
  const int t_len = probs.frames, k = probs.classes;
  const int s_len = 2 * static_cast<int>(label.size()) + 1;
  std::vector<int> ext(s_len, 0);
  for (std::size_t i = 0; i < label.size(); ++i) ext[2 * i + 1] = label[i];

  std::vector<double> logy(probs.p.size());
  for (std::size_t i = 0; i < logy.size(); ++i) logy[i] = std::log(std::max(probs.p[i], kFloor));
  auto ly = [&](int t, int c) { return logy[static_cast<std::size_t>(t) * k + c]; };
  // Skip transition s-2 -> s allowed onto a non-blank that differs from s-2.
  auto can_skip = [&](int s) { return s >= 2 && ext[s] != 0 && ext[s] != ext[s - 2]; };

  std::vector<double> alpha(static_cast<std::size_t>(t_len) * s_len, kNegInf), beta(alpha.size(), kNegInf);
  auto a = [&](int t, int s) -> double& { return alpha[static_cast<std::size_t>(t) * s_len + s]; };
  auto b = [&](int t, int s) -> double& { return beta[static_cast<std::size_t>(t) * s_len + s]; };

  a(0, 0) = ly(0, ext[0]);
  if (s_len > 1) a(0, 1) = ly(0, ext[1]);
  for (int t = 1; t < t_len; ++t) {
    for (int s = 0; s < s_len; ++s) {
      double acc = a(t - 1, s);
      if (s >= 1) acc = log_add(acc, a(t - 1, s - 1));
      if (can_skip(s)) acc = log_add(acc, a(t - 1, s - 2));
      if (acc != kNegInf) a(t, s) = acc + ly(t, ext[s]);
    }
  }
  b(t_len - 1, s_len - 1) = ly(t_len - 1, ext[s_len - 1]);
  b(t_len - 1, s_len - 2) = ly(t_len - 1, ext[s_len - 2]);
  for (int t = t_len - 2; t >= 0; --t) {
    for (int s = s_len - 1; s >= 0; --s) {
      double acc = b(t + 1, s);
      if (s + 1 < s_len) acc = log_add(acc, b(t + 1, s + 1));
      if (s + 2 < s_len && can_skip(s + 2)) acc = log_add(acc, b(t + 1, s + 2));
      if (acc != kNegInf) b(t, s) = acc + ly(t, ext[s]);
    }
  }
  const double log_p = log_add(a(t_len - 1, s_len - 1), a(t_len - 1, s_len - 2));
  if (log_p == kNegInf) throw Error("label unreachable under the given posteriors");

  LossGrad out;
  out.loss = -log_p;
  out.grad.assign(probs.p.size(), 0.0);
  std::vector<double> occ(k);
  for (int t = 0; t < t_len; ++t) {
    std::fill(occ.begin(), occ.end(), kNegInf);
    for (int s = 0; s < s_len; ++s) occ[ext[s]] = log_add(occ[ext[s]], a(t, s) + b(t, s));
    for (int c = 0; c < k; ++c) {
      // alpha*beta double counts y_t(c); divide it out once.
      const double gamma = occ[c] == kNegInf ? 0.0 : std::exp(occ[c] - ly(t, c) - log_p);
      out.grad[static_cast<std::size_t>(t) * k + c] = probs.at(t, c) - gamma;
    }
  }
  return out;
}

double brute_force_loss(const ProbMatrix& probs, const LabelSeq& label) {
  const int t_len = probs.frames, k = probs.classes;
  double paths = 1.0;
  for (int t = 0; t < t_len; ++t) paths *= k;
  if (paths > 1e7) throw Error("brute-force CTC instance too large");
  check_label(probs, label);

  std::vector<int> path(t_len, 0);
  double total = 0.0;
  LabelSeq collapsed;
  for (;;) {
    collapsed.clear();
    int prev = -1;
    for (int c : path) {
      if (c != prev && c != 0) collapsed.push_back(c);
      prev = c;
    }
    if (collapsed == label) {
      double pr = 1.0;
      for (int t = 0; t < t_len; ++t) pr *= probs.at(t, path[t]);
      total += pr;
    }
    int t = t_len - 1;
    while (t >= 0 && ++path[t] == k) path[t--] = 0;
    if (t < 0) break;
  }
  if (!(total > 0.0)) throw Error("label unreachable under the given posteriors");
  return -std::log(total);
}

DecodeResult greedy_decode(const ProbMatrix& probs, const Codec& codec) {
  if (probs.classes != static_cast<int>(codec.classes())) throw Error("posterior width does not match codec");
  DecodeResult out;
  int prev = -1;
  double run_sum = 0.0;
  int run_len = 0;
  auto flush = [&] {
    if (prev > 0) {
      out.labels.push_back(prev);
      out.text.push_back(codec.char_at(static_cast<std::size_t>(prev)));
      out.char_confidences.push_back(run_sum / run_len);
    }
  };
  for (int t = 0; t < probs.frames; ++t) {
    int best = 0;
    for (int c = 1; c < probs.classes; ++c) {
      if (probs.at(t, c) > probs.at(t, best)) best = c;
    }
    if (best != prev) {
      flush();
      prev = best;
      run_sum = 0.0;
      run_len = 0;
    }
    run_sum += probs.at(t, best);
    ++run_len;
  }
  flush();
  if (!out.char_confidences.empty()) {
    double s = 0.0;
    for (double c : out.char_confidences) s += c;
    out.sequence_confidence = s / static_cast<double>(out.char_confidences.size());
  }
  return out;
}

}  // namespace lshocr::ctc
