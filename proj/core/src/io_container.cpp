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
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "adfusion/error.hpp"
#include "adfusion/io.hpp"

namespace adfusion::io {
namespace {

constexpr std::array<char, 4> kMagic = {'T', 'N', 'S', '1'};

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(U)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw FormatError(std::string("tensor container truncated while reading ") +
                      what);
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(bytes[i]) << (8 * i);
  }
  return value;
}

template <typename T>
void write_impl(std::ostream& out, const BasicTensor<T>& t) {
  using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  if (t.rank() > 255) throw ShapeError("tensor rank exceeds 255");
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(
                                sizeof(T) == 4 ? DType::kF32 : DType::kF64));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.rank()));
  for (std::size_t d : t.shape()) {
    if (d > 0xffffffffULL) throw ShapeError("dimension exceeds u32");
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  }
  std::vector<char> payload(t.numel() * sizeof(T));
  const auto data = t.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Bits bits = std::bit_cast<Bits>(data[i]);
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      payload[i * sizeof(T) + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw FormatError("failed writing tensor container");
}

template <typename T>
BasicTensor<T> read_payload(std::istream& in, Shape shape) {
  using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const std::size_t n = shape_numel(shape);
  std::vector<unsigned char> raw(n * sizeof(T));
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw FormatError("tensor container truncated: payload for " +
                      shape_str(shape) + " needs " +
                      std::to_string(raw.size()) + " bytes, got " +
                      std::to_string(in.gcount()));
  }
  std::vector<T> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    Bits bits = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      bits |= static_cast<Bits>(raw[i * sizeof(T) + b]) << (8 * b);
    }
    data[i] = std::bit_cast<T>(bits);
  }
  return BasicTensor<T>(std::move(shape), std::move(data));
}

template <typename T>
void write_file(const std::filesystem::path& path, const BasicTensor<T>& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_impl(out, t);
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor& t) { write_impl(out, t); }
void write_tensor(std::ostream& out, const Tensor64& t) { write_impl(out, t); }
void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  write_file(path, t);
}
void write_tensor(const std::filesystem::path& path, const Tensor64& t) {
  write_file(path, t);
}

AnyTensor read_tensor_any(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4) throw FormatError("tensor container truncated: no magic");
  if (magic != kMagic) throw FormatError("bad tensor container magic");
  const auto dtype = get_le<std::uint8_t>(in, "dtype");
  const auto ndim = get_le<std::uint8_t>(in, "ndim");
  Shape shape;
  for (std::uint8_t i = 0; i < ndim; ++i) {
    shape.push_back(get_le<std::uint32_t>(in, "dims"));
  }
  switch (static_cast<DType>(dtype)) {
    case DType::kF32:
      return read_payload<float>(in, std::move(shape));
    case DType::kF64:
      return read_payload<double>(in, std::move(shape));
  }
  throw FormatError("unknown tensor dtype code " + std::to_string(dtype));
}

AnyTensor read_tensor_any(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open tensor file " + path.string());
  try {
    return read_tensor_any(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Tensor read_tensor(const std::filesystem::path& path) {
  auto any = read_tensor_any(path);
  if (auto* f = std::get_if<Tensor>(&any)) return *f;
  return std::get<Tensor64>(any).cast<float>();
}

std::size_t container_size(const Shape& shape, DType dtype) {
  const std::size_t width = dtype == DType::kF32 ? 4 : 8;
  return 4 + 1 + 1 + 4 * shape.size() + shape_numel(shape) * width;
}

}  // namespace adfusion::io
