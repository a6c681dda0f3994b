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

#include <cmath>
#include <numeric>

#include "lshocr/ctc.hpp"
#include "lshocr/error.hpp"
#include "oracles.hpp"

using namespace lshocr;
using namespace lshocr::oracles;

namespace {

ProbMatrix rows(std::initializer_list<std::initializer_list<double>> r) {
  ProbMatrix m(static_cast<int>(r.size()), static_cast<int>(r.begin()->size()));
  int t = 0;
  for (const auto& row : r) {
    int k = 0;
    for (double v : row) m.at(t, k++) = v;
    ++t;
  }
  return m;
}

ctc::LabelSeq random_label(KeyedRng& rng, int classes) {
  ctc::LabelSeq l(1 + rng.below(3));
  for (int& v : l) v = 1 + static_cast<int>(rng.below(classes - 1));
  return l;
}

}  // namespace

TEST_CASE("closed-form losses") {
  CHECK(ctc::loss_grad(rows({{0.4, 0.6}}), {1}).loss == doctest::Approx(-std::log(0.6)).epsilon(1e-12));
  CHECK(ctc::loss_grad(rows({{0.5, 0.5}, {0.5, 0.5}}), {1}).loss == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(ctc::loss_grad(rows({{0.5, 0.5}, {0.5, 0.5}}), {1, 1}), doctest::Contains("label too long"),
                       Error);
  CHECK_THROWS_WITH_AS(ctc::brute_force_loss(rows({{0.5, 0.5}, {0.5, 0.5}}), {1, 1}),
                       doctest::Contains("label too long"), Error);
  CHECK(ctc::brute_force_loss(rows({{0.4, 0.6}}), {1}) == doctest::Approx(-std::log(0.6)).epsilon(1e-12));
  CHECK(ctc::required_frames({1, 1, 2, 2, 2}) == 8);
  CHECK_THROWS_AS(ctc::loss_grad(rows({{0.5, 0.5}}), {}), Error);
  CHECK_THROWS_AS(ctc::brute_force_loss(ProbMatrix(11, 5, 0.2), {1}), Error);
}

TEST_CASE("recursion matches enumeration") {
  KeyedRng rng(31, 0);
  for (int i = 0; i < 500; ++i) {
    const int t = 1 + static_cast<int>(rng.below(8));
    const int classes = 2 + static_cast<int>(rng.below(4));
    const ProbMatrix p = random_probs(rng, t, classes);
    const auto label = random_label(rng, classes);
    if (ctc::required_frames(label) > t) {
      CHECK_THROWS_AS(ctc::loss_grad(p, label), Error);
      CHECK_THROWS_AS(ctc::brute_force_loss(p, label), Error);
      continue;
    }
    const double fast = ctc::loss_grad(p, label).loss;
    REQUIRE(fast >= 0.0);
    REQUIRE(std::abs(fast - ctc::brute_force_loss(p, label)) < 1e-9);
  }
}

TEST_CASE("logit gradients match central differences") {
  KeyedRng rng(32, 0);
  // Five-point central stencil; keeps truncation and rounding both near 1e-12.
  const double h = 1e-3;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int t = 3 + static_cast<int>(rng.below(6));
    const int classes = 2 + static_cast<int>(rng.below(4));
    std::vector<double> logits;
    const ProbMatrix p = random_probs(rng, t, classes, &logits);
    const auto label = random_label(rng, classes);
    if (ctc::required_frames(label) > t) continue;
    const auto g = ctc::loss_grad(p, label);
    for (std::size_t j = 0; j < logits.size(); ++j) {
      auto at = [&](double delta) {
        auto l = logits;
        l[j] += delta;
        return ctc::loss_grad(softmax<double>(l, t, classes), label).loss;
      };
      const double fd = (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
      worst = std::max(worst, relative_error(g.grad[j], fd));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("loss is invariant under consistent class permutation") {
  KeyedRng rng(33, 0);
  for (int i = 0; i < 100; ++i) {
    const int t = 4 + static_cast<int>(rng.below(5)), classes = 4;
    const ProbMatrix p = random_probs(rng, t, classes);
    const auto label = random_label(rng, classes);
    if (ctc::required_frames(label) > t) continue;
    std::vector<int> perm{1, 2, 3};
    shuffle(perm, rng);
    ProbMatrix q = p;
    for (int f = 0; f < t; ++f) {
      for (int k = 1; k < classes; ++k) q.at(f, perm[k - 1]) = p.at(f, k);
    }
    ctc::LabelSeq l2;
    for (int c : label) l2.push_back(perm[c - 1]);
    CHECK(ctc::loss_grad(q, l2).loss == doctest::Approx(ctc::loss_grad(p, label).loss).epsilon(1e-12));
  }
}

TEST_CASE("greedy decoding") {
  const Codec codec(U"ab");  // ' ' = 1, a = 2, b = 3
  auto one_hot = [&](std::vector<int> path) {
    ProbMatrix m(static_cast<int>(path.size()), 4);
    for (std::size_t t = 0; t < path.size(); ++t) m.at(static_cast<int>(t), path[t]) = 1.0;
    return m;
  };
  const auto d = ctc::greedy_decode(one_hot({0, 2, 2, 0, 3}), codec);
  CHECK(d.text == U"ab");
  CHECK(d.char_confidences.size() == 2);
  const auto blank = ctc::greedy_decode(one_hot({0, 0, 0}), codec);
  CHECK(blank.text.empty());
  CHECK(blank.sequence_confidence == 1.0);

  ProbMatrix conf = rows({{0.1, 0.0, 0.8, 0.1}, {0.2, 0.0, 0.6, 0.2}, {0.9, 0.0, 0.05, 0.05}});
  const auto c = ctc::greedy_decode(conf, codec);
  CHECK(c.text == U"a");
  CHECK(c.char_confidences[0] == doctest::Approx(0.7));
  CHECK(c.sequence_confidence == doctest::Approx(0.7));
  // Ties resolve to the lowest index, here blank.
  CHECK(ctc::greedy_decode(rows({{0.5, 0.0, 0.5, 0.0}}), codec).text.empty());
  CHECK_THROWS_AS(ctc::greedy_decode(ProbMatrix(2, 7, 0.1), codec), Error);

  // The canonical path of any label decodes back to it.
  KeyedRng rng(34, 0);
  for (int i = 0; i < 200; ++i) {
    std::vector<int> label(1 + rng.below(10));
    for (int& v : label) v = 1 + static_cast<int>(rng.below(3));
    std::vector<int> path{0};
    for (std::size_t j = 0; j < label.size(); ++j) {
      if (j > 0 && label[j] == label[j - 1]) path.push_back(0);
      path.push_back(label[j]);
      if (rng.uniform() < 0.5) path.push_back(label[j]);
    }
    const auto r = ctc::greedy_decode(one_hot(path), codec);
    CHECK(r.labels == label);
    CHECK(r.text == codec.decode(label));
    CHECK(r.text.find(U'\0') == std::u32string::npos);
  }
}
