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

#include "lshocr/image_io.hpp"

#include <png.h>

#include <fstream>
#include <string>
#include <vector>

#include "lshocr/imgproc.hpp"

namespace lshocr {
namespace {

bool has_png_signature(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

// Decodes with the simplified libpng API into the requested sample layout.
std::vector<unsigned char> decode_png(const std::filesystem::path& path, png_uint_32 format, int& rows, int& cols) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(path.string() + ": " + image.message);
  }
  image.format = format;
  std::vector<unsigned char> data(PNG_IMAGE_SIZE(image));
  // Composite any alpha onto white paper.
  png_color background{255, 255, 255};
  if (!png_image_finish_read(&image, &background, data.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(path.string() + ": " + image.message);
  }
  rows = static_cast<int>(image.height);
  cols = static_cast<int>(image.width);
  return data;
}

bool png_is_gray(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(path.string() + ": " + image.message);
  }
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  png_image_free(&image);
  return gray;
}

Raster read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw Error(path.string() + ": unsupported image format");
  auto skip_comments = [&] {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string line;
      std::getline(in, line);
      in >> std::ws;
    }
  };
  int cols = 0, rows = 0, maxval = 0;
  skip_comments();
  in >> cols;
  skip_comments();
  in >> rows;
  skip_comments();
  in >> maxval;
  in.get();
  if (!in || cols <= 0 || rows <= 0 || maxval <= 0 || maxval > 255) throw Error(path.string() + ": bad PGM header");
  Raster img(rows, cols);
  std::vector<unsigned char> buf(static_cast<std::size_t>(rows) * cols);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw Error(path.string() + ": truncated PGM");
  for (std::size_t i = 0; i < buf.size(); ++i) img.px[i] = quantize8(static_cast<float>(buf[i]) / maxval);
  return img;
}

}  // namespace

ColorRaster read_color_png(const std::filesystem::path& path) {
  int rows = 0, cols = 0;
  const auto data = decode_png(path, PNG_FORMAT_RGB, rows, cols);
  ColorRaster img(rows, cols);
  for (std::size_t i = 0; i < data.size(); ++i) img.rgb[i] = static_cast<float>(data[i]) / 255.0f;
  return img;
}

Raster read_image(const std::filesystem::path& path) {
  if (!has_png_signature(path)) return read_pgm(path);
  if (png_is_gray(path)) {
    int rows = 0, cols = 0;
    const auto data = decode_png(path, PNG_FORMAT_GRAY, rows, cols);
    Raster img(rows, cols);
    for (std::size_t i = 0; i < data.size(); ++i) img.px[i] = static_cast<float>(data[i]) / 255.0f;
    return img;
  }
  // Color: luma, then snap to the 8-bit grid used by every stored raster.
  Raster gray = imgproc::to_grayscale(read_color_png(path));
  for (float& v : gray.px) v = quantize8(v);
  return gray;
}

void write_png(const std::filesystem::path& path, const Raster& img) {
  if (img.empty()) throw Error("cannot write empty raster to " + path.string());
  std::vector<unsigned char> data(img.px.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<unsigned char>(level8(img.px[i]));
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.cols);
  image.height = static_cast<png_uint_32>(img.rows);
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, data.data(), 0, nullptr)) {
    throw Error(path.string() + ": " + image.message);
  }
}

}  // namespace lshocr
