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

#include "lshocr/vote.hpp"

#include <algorithm>

#include "lshocr/error.hpp"

namespace lshocr {

ProbMatrix vote(std::span<const ProbMatrix> voters) {
  if (voters.empty()) throw Error("voting needs at least one voter");
  const auto& first = voters.front();
  for (std::size_t v = 1; v < voters.size(); ++v) {
    if (voters[v].frames != first.frames || voters[v].classes != first.classes) {
      throw Error("voter " + std::to_string(v) + " has shape " + std::to_string(voters[v].frames) + "x" +
                  std::to_string(voters[v].classes) + ", expected " + std::to_string(first.frames) + "x" +
                  std::to_string(first.classes));
    }
  }
  ProbMatrix out(first.frames, first.classes);
  const double n = static_cast<double>(voters.size());
  std::vector<double> cell(voters.size());
  for (std::size_t i = 0; i < out.p.size(); ++i) {
    for (std::size_t v = 0; v < voters.size(); ++v) cell[v] = voters[v].p[i];
    std::sort(cell.begin(), cell.end());
    double excess = 0.0;
    for (double x : cell) excess += x - cell.front();
    out.p[i] = cell.front() + excess / n;
  }
  return out;
}

std::vector<ctc::DecodeResult> vote_and_decode(std::span<const Raster> lines, std::span<const Checkpoint> checkpoints,
                                               const Codec& codec) {
  if (checkpoints.empty()) throw Error("voting needs at least one checkpoint");
  for (std::size_t v = 0; v < checkpoints.size(); ++v) {
    if (!(checkpoints[v].codec == codec)) throw Error("checkpoint " + std::to_string(v) + " uses a different codec");
    if (!(checkpoints[v].arch == checkpoints.front().arch)) {
      throw Error("checkpoint " + std::to_string(v) + " uses a different architecture");
    }
  }
  std::vector<ctc::DecodeResult> out;
  out.reserve(lines.size());
  constexpr std::size_t kChunk = 32;
  for (std::size_t begin = 0; begin < lines.size(); begin += kChunk) {
    const auto chunk = lines.subspan(begin, std::min(kChunk, lines.size() - begin));
    const LineBatch batch = make_batch(chunk);
    std::vector<std::vector<ProbMatrix>> per_voter;
    for (const auto& ck : checkpoints) per_voter.push_back(forward(ck, batch, Mode::infer).probs);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      std::vector<ProbMatrix> mats;
      mats.reserve(checkpoints.size());
      for (auto& pv : per_voter) mats.push_back(std::move(pv[i]));
      out.push_back(ctc::greedy_decode(vote(mats), codec));
    }
  }
  return out;
}

ctc::DecodeResult vote_and_decode(const Raster& line, std::span<const Checkpoint> checkpoints, const Codec& codec) {
  return vote_and_decode(std::span<const Raster>(&line, 1), checkpoints, codec).front();
}

}  // namespace lshocr
