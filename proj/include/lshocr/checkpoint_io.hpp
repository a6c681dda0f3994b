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

#include <filesystem>
#include <string>
#include <string_view>

#include "lshocr/net.hpp"

namespace lshocr {

inline constexpr std::string_view kCheckpointMagic = "LSHOCR1\n";
inline constexpr int kCheckpointFormatVersion = 1;

// `LSHOCR1\n`, a JSON block (arch, codec, train_meta, tensor directory with
// name/shape/byte offset), `\0`, then little-endian float32 data in
// directory order: weights first, EMA tensors (suffix `.ema`) after.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace lshocr
