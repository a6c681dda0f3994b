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

#include <span>
#include <vector>

#include "lshocr/ctc.hpp"
#include "lshocr/net.hpp"

namespace lshocr {

// Elementwise mean of the voters' posteriors. Each cell's values are summed
// in sorted order relative to their minimum, so the result does not depend
// on voter order and N identical inputs average to that input exactly.
ProbMatrix vote(std::span<const ProbMatrix> voters);

// Runs every checkpoint in inference mode (EMA weights) on each line,
// averages the posteriors and decodes. Lines must already be at the
// network's input height.
std::vector<ctc::DecodeResult> vote_and_decode(std::span<const Raster> lines, std::span<const Checkpoint> checkpoints,
                                               const Codec& codec);
ctc::DecodeResult vote_and_decode(const Raster& line, std::span<const Checkpoint> checkpoints, const Codec& codec);

}  // namespace lshocr
