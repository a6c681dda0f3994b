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

#include <string>
#include <vector>

#include "lshocr/codec.hpp"
#include "lshocr/net.hpp"

namespace lshocr::ctc {

// Label indices 1..C; blank (0) never appears.
using LabelSeq = std::vector<int>;

// |label| plus one separating blank per adjacent repeat.
int required_frames(const LabelSeq& label);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d logits, frames x classes row-major
};

// Negative log-likelihood by the log-space alpha/beta recursion, and its
// exact gradient with respect to the pre-softmax logits. Probabilities are
// floored at 1e-30 before taking logs. Throws if the label cannot fit.
LossGrad loss_grad(const ProbMatrix& probs, const LabelSeq& label);

// Sums every frame path that collapses to `label`. (C+1)^T must be <= 1e7.
double brute_force_loss(const ProbMatrix& probs, const LabelSeq& label);

struct DecodeResult {
  std::u32string text;
  std::vector<int> labels;
  std::vector<double> char_confidences;
  double sequence_confidence = 1.0;

  bool operator==(const DecodeResult&) const = default;
};

// Best path: per-frame argmax (ties to the lowest index), collapse repeats,
// drop blanks. A character's confidence is the mean winning posterior
// over the frames of its run.
DecodeResult greedy_decode(const ProbMatrix& probs, const Codec& codec);

}  // namespace lshocr::ctc
