// Copyright 2026 The adfusion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "adfusion/error.hpp"
#include "adfusion/io.hpp"

namespace adfusion::io {
namespace {

constexpr std::array<char, 4> kCheckpointMagic = {'T', 'F', 'M', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff),
                         static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff),
                         static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) {
    throw FormatError(std::string("checkpoint truncated while reading ") + what);
  }
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::string get_bytes(std::istream& in, std::uint32_t n, const char* what) {
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (static_cast<std::uint32_t>(in.gcount()) != n) {
    throw FormatError(std::string("checkpoint truncated while reading ") + what);
  }
  return s;
}

}  // namespace

std::string config_to_json(const model::ModelConfig& cfg) {
  nlohmann::json j;
  j["modalities"] = cfg.modalities.to_string();
  j["d_text"] = cfg.d_text;
  j["d_image"] = cfg.d_image;
  j["text_proj"] = cfg.text_proj;
  j["image_proj"] = cfg.image_proj;
  j["acoustic_in"] = cfg.acoustic_in;
  j["acoustic_proj"] = cfg.acoustic_proj;
  j["d_g"] = cfg.d_g;
  j["head_hidden"] = cfg.head_hidden;
  j["dropout1"] = cfg.dropout1;
  j["dropout2"] = cfg.dropout2;
  j["n_classes"] = cfg.n_classes;
  return j.dump();
}

model::ModelConfig config_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    model::ModelConfig cfg;
    cfg.modalities =
        model::ModalitySet::parse(j.at("modalities").get<std::string>());
    cfg.d_text = j.at("d_text").get<std::size_t>();
    cfg.d_image = j.at("d_image").get<std::size_t>();
    cfg.text_proj = j.at("text_proj").get<std::size_t>();
    cfg.image_proj = j.at("image_proj").get<std::size_t>();
    cfg.acoustic_in = j.at("acoustic_in").get<std::size_t>();
    cfg.acoustic_proj = j.at("acoustic_proj").get<std::size_t>();
    cfg.d_g = j.at("d_g").get<std::size_t>();
    cfg.head_hidden = j.at("head_hidden").get<std::size_t>();
    cfg.dropout1 = j.at("dropout1").get<double>();
    cfg.dropout2 = j.at("dropout2").get<double>();
    cfg.n_classes = j.at("n_classes").get<std::size_t>();
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid model config block: ") + e.what());
  }
}

void write_checkpoint(const std::filesystem::path& path,
                      const model::MultimodalModel<float>& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  const std::string cfg = config_to_json(model.config());
  put_u32(out, static_cast<std::uint32_t>(cfg.size()));
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  const auto params = model.parameters();
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    put_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_tensor(out, p.tensor);
  }
  if (!out) throw FormatError("failed writing checkpoint " + path.string());
}

model::MultimodalModel<float> read_checkpoint(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  try {
    std::array<char, 4> magic{};
    in.read(magic.data(), 4);
    if (in.gcount() != 4 || magic != kCheckpointMagic) {
      throw FormatError("bad checkpoint magic");
    }
    const auto cfg_len = get_u32(in, "config length");
    const auto cfg = config_from_json(get_bytes(in, cfg_len, "config"));
    auto model = model::MultimodalModel<float>::init(cfg, 0);
    auto params = model.parameters();
    const auto count = get_u32(in, "parameter count");
    if (count != params.size()) {
      throw FormatError("checkpoint has " + std::to_string(count) +
                        " parameters, config implies " +
                        std::to_string(params.size()));
    }
    for (auto& p : params) {
      const auto name_len = get_u32(in, "parameter name length");
      const auto name = get_bytes(in, name_len, "parameter name");
      if (name != p.name) {
        throw FormatError("expected parameter '" + p.name + "', found '" +
                          name + "'");
      }
      auto any = read_tensor_any(in);
      auto* t = std::get_if<Tensor>(&any);
      if (!t) throw FormatError("parameter '" + name + "' is not f32");
      if (t->shape() != p.tensor.shape()) {
        throw FormatError("parameter '" + name + "' has shape " +
                          shape_str(t->shape()) + ", expected " +
                          shape_str(p.tensor.shape()));
      }
      std::copy(t->data().begin(), t->data().end(),
                p.tensor.mutable_data().begin());
    }
    return model;
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace adfusion::io
