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

#include "lshocr/checkpoint_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lshocr/error.hpp"
#include "lshocr/utf8.hpp"

namespace lshocr {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

nlohmann::json arch_json(const ArchSpec& a) {
  return {{"input_height", a.input_height}, {"conv1_filters", a.conv1_filters}, {"conv2_filters", a.conv2_filters},
          {"lstm_hidden", a.lstm_hidden},   {"dropout", a.dropout},             {"classes", a.classes}};
}

ArchSpec arch_from(const nlohmann::json& j) {
  ArchSpec a;
  a.input_height = j.at("input_height");
  a.conv1_filters = j.at("conv1_filters");
  a.conv2_filters = j.at("conv2_filters");
  a.lstm_hidden = j.at("lstm_hidden");
  a.dropout = j.at("dropout");
  a.classes = j.at("classes");
  return a;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  ck.validate();
  nlohmann::json codec = nlohmann::json::array();
  for (char32_t c : ck.codec.chars()) codec.push_back(utf8::encode(c));
  nlohmann::json dir = nlohmann::json::array();
  std::size_t offset = 0;
  auto add = [&](const Tensor<float>& t, const std::string& suffix) {
    dir.push_back({{"name", t.name + suffix}, {"shape", t.shape}, {"offset", offset}});
    offset += t.data.size() * sizeof(float);
  };
  for (const auto& t : ck.tensors) add(t, "");
  for (const auto& t : ck.ema) add(t, ".ema");
  const nlohmann::json header = {
      {"format_version", kCheckpointFormatVersion},
      {"arch", arch_json(ck.arch)},
      {"codec", codec},
      {"train_meta",
       {{"seed", ck.meta.seed}, {"epochs_seen", ck.meta.epochs_seen}, {"best_val_cer", ck.meta.best_val_cer},
        {"stage", ck.meta.stage}}},
      {"tensors", dir},
  };
  std::string out(kCheckpointMagic);
  out += header.dump();
  out.push_back('\0');
  const std::size_t data_start = out.size();
  out.resize(data_start + offset);
  char* dst = out.data() + data_start;
  for (const auto* list : {&ck.tensors, &ck.ema}) {
    for (const auto& t : *list) {
      std::memcpy(dst, t.data.data(), t.data.size() * sizeof(float));
      dst += t.data.size() * sizeof(float);
    }
  }
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  if (!bytes.starts_with(kCheckpointMagic)) throw Error("not an LSHOCR1 checkpoint");
  const auto nul = bytes.find('\0', kCheckpointMagic.size());
  if (nul == std::string_view::npos) throw Error("checkpoint header is not terminated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(kCheckpointMagic.size(), nul - kCheckpointMagic.size()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("checkpoint header: ") + e.what());
  }
  const std::string_view data = bytes.substr(nul + 1);

  Checkpoint ck;
  try {
    ck.arch = arch_from(header.at("arch"));
    std::u32string chars;
    for (const auto& c : header.at("codec")) {
      const auto cp = utf8::decode(c.get<std::string>());
      if (cp.size() != 1) throw Error("codec entries must be single codepoints");
      chars += cp;
    }
    ck.codec = Codec(chars);
    if (ck.codec.chars() != chars) throw Error("codec in checkpoint is not sorted or lacks space");
    const auto& meta = header.at("train_meta");
    ck.meta.seed = meta.at("seed");
    ck.meta.epochs_seen = meta.at("epochs_seen");
    ck.meta.best_val_cer = meta.at("best_val_cer");
    ck.meta.stage = meta.at("stage");

    ck.tensors = make_params<float>(ck.arch);
    ck.ema = ck.tensors;
    const auto& dir = header.at("tensors");
    if (dir.size() != 2 * ck.tensors.size()) throw Error("checkpoint tensor directory has the wrong length");
    std::size_t expected_offset = 0;
    for (std::size_t i = 0; i < dir.size(); ++i) {
      auto& t = i < ck.tensors.size() ? ck.tensors[i] : ck.ema[i - ck.tensors.size()];
      const std::string want = t.name + (i < ck.tensors.size() ? "" : ".ema");
      const auto& entry = dir[i];
      if (entry.at("name") != want) throw Error("unexpected tensor '" + entry.at("name").get<std::string>() + "'");
      if (entry.at("shape").get<std::vector<int>>() != t.shape) throw Error("tensor '" + want + "' has the wrong shape");
      const std::size_t offset = entry.at("offset");
      const std::size_t nbytes = t.data.size() * sizeof(float);
      if (offset != expected_offset || offset + nbytes > data.size()) throw Error("tensor '" + want + "' is out of range");
      std::memcpy(t.data.data(), data.data() + offset, nbytes);
      expected_offset += nbytes;
    }
    if (expected_offset != data.size()) throw Error("trailing bytes after checkpoint tensors");
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("checkpoint header: ") + e.what());
  }
  ck.validate();
  return ck;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace lshocr
