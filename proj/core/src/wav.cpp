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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "adfusion/audio.hpp"
#include "adfusion/error.hpp"

namespace adfusion::audio {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

std::uint32_t u32_at(const std::vector<unsigned char>& b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (b[off + 1] << 8) |
         (b[off + 2] << 16) | (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

std::uint16_t u16_at(const std::vector<unsigned char>& b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

void put_u32(std::ofstream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::ofstream& out, std::uint16_t v) {
  out.put(static_cast<char>(v & 0xff));
  out.put(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open WAV file " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  auto fail = [&](const std::string& why) -> FormatError {
    return FormatError(path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t data_off = 0, data_len = 0;
  bool have_data = false;
  for (std::size_t off = 12; off + 8 <= bytes.size();) {
    const std::uint32_t len = u32_at(bytes, off + 4);
    const std::size_t body = off + 8;
    if (body + len > bytes.size()) {
      if (std::memcmp(&bytes[off], "data", 4) != 0) throw fail("truncated chunk");
    }
    if (std::memcmp(&bytes[off], "fmt ", 4) == 0) {
      if (len < 16) throw fail("fmt chunk too short");
      format = u16_at(bytes, body);
      channels = u16_at(bytes, body + 2);
      rate = u32_at(bytes, body + 4);
      bits = u16_at(bytes, body + 14);
      if (format == kFormatExtensible && len >= 26) {
        format = u16_at(bytes, body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(&bytes[off], "data", 4) == 0) {
      data_off = body;
      data_len = std::min<std::size_t>(len, bytes.size() - body);
      if (data_len != len) throw fail("truncated data chunk");
      have_data = true;
      break;
    }
    off = body + len + (len & 1);
  }
  if (!have_fmt) throw fail("missing fmt chunk");
  if (!have_data) throw fail("missing data chunk");
  if (format != kFormatPcm) {
    throw fail("unsupported encoding (format code " + std::to_string(format) +
               "); only PCM is supported");
  }
  if (bits != 16) {
    throw fail("unsupported sample width " + std::to_string(bits) +
               " bits; only 16-bit PCM is supported");
  }
  if (channels == 0 || rate == 0) throw fail("invalid channel count or rate");

  const std::size_t frame_bytes = 2u * channels;
  const std::size_t frames = data_len / frame_bytes;
  AudioClip clip;
  clip.sample_rate = rate;
  clip.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const auto raw = static_cast<std::int16_t>(
          u16_at(bytes, data_off + f * frame_bytes + 2 * c));
      acc += raw / 32768.0;
    }
    clip.samples[f] = static_cast<float>(acc / channels);
  }
  if (clip.samples.empty()) throw fail("no audio samples");
  return clip;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  const auto data_len = static_cast<std::uint32_t>(clip.samples.size() * 2);
  out.write("RIFF", 4);
  put_u32(out, 36 + data_len);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, clip.sample_rate);
  put_u32(out, clip.sample_rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.write("data", 4);
  put_u32(out, data_len);
  for (float s : clip.samples) {
    const double clamped = std::clamp(static_cast<double>(s), -1.0, 1.0);
    const auto v = static_cast<std::int16_t>(
        std::lround(std::min(clamped * 32768.0, 32767.0)));
    put_u16(out, static_cast<std::uint16_t>(v));
  }
  if (!out) throw FormatError("failed writing " + path.string());
}

}  // namespace adfusion::audio
