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

#include "lshocr/raster.hpp"

namespace lshocr {

// Loads an 8-bit gray, gray+alpha, RGB, RGBA or palette PNG, or a binary
// PGM (P5). Color input is converted with imgproc::to_grayscale.
Raster read_image(const std::filesystem::path& path);
ColorRaster read_color_png(const std::filesystem::path& path);

// Writes an 8-bit grayscale PNG. Output bytes depend only on pixel values.
void write_png(const std::filesystem::path& path, const Raster& img);

}  // namespace lshocr
