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

#include <algorithm>
#include <cstdint>
#include <vector>

#include "lshocr/ctc.hpp"
#include "lshocr/net.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace lshocr::oracles {

// Height 8, filters 2/3, hidden 4, three classes.
inline ArchSpec tiny_arch() {
  ArchSpec a;
  a.input_height = 8;
  a.conv1_filters = 2;
  a.conv2_filters = 3;
  a.lstm_hidden = 4;
  a.dropout = 0.5;
  return a;
}

struct GradCheck {
  double worst = 0.0;
  std::size_t checked = 0;
  std::size_t kinked = 0;  // stencil crosses a ReLU or pooling switch
};

// Full network + CTC loss in double, analytic gradient vs the five-point
// central difference of the scalar loss, for every parameter entry.
inline GradCheck full_stack_gradcheck(std::uint64_t seed, int width = 28, double h = 1e-4) {
  const Codec codec(U"ab");
  const Checkpoint ck = init_params(tiny_arch(), codec, seed);
  const ArchSpec& arch = ck.arch;
  auto params = convert<double>(ck.tensors);
  KeyedRng rng(seed, 99);
  // Perturb biases too so no tensor sits at an all-zero point.
  for (auto& t : params) {
    for (double& v : t.data) v += 0.1 * rng.normal();
  }
  const std::vector<Raster> lines{testing::random_raster(rng, 8, width, false),
                                  testing::random_raster(rng, 8, width - 5, false)};
  const LineBatch batch = make_batch(lines);
  const std::vector<ctc::LabelSeq> labels{{1, 2}, {2, 2}};
  const std::uint64_t stream = hash_combine(seed, 7);

  std::vector<int> pattern;
  bool smooth = true;
  auto loss_of = [&](const TensorList<double>& p) {
    auto out = forward_params<double>(arch, p, batch, true, stream);
    smooth = smooth && activation_pattern(out.cache) == pattern;
    double s = 0.0;
    for (std::size_t b = 0; b < labels.size(); ++b) s += ctc::loss_grad(out.probs[b], labels[b]).loss;
    return s;
  };

  auto out = forward_params<double>(arch, params, batch, true, stream);
  std::vector<std::vector<double>> dlogits;
  for (std::size_t b = 0; b < labels.size(); ++b) dlogits.push_back(ctc::loss_grad(out.probs[b], labels[b]).grad);
  const auto grads = backward_params<double>(arch, params, out.cache, dlogits);
  pattern = activation_pattern(out.cache);

  GradCheck gc;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t j = 0; j < params[i].data.size(); ++j) {
      auto p = params;
      smooth = true;
      auto at = [&](double d) {
        p[i].data[j] = params[i].data[j] + d;
        return loss_of(p);
      };
      const double fd = (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
      if (!smooth) {
        ++gc.kinked;
        continue;
      }
      gc.worst = std::max(gc.worst, relative_error(grads[i].data[j], fd));
      ++gc.checked;
    }
  }
  return gc;
}

}  // namespace lshocr::oracles
