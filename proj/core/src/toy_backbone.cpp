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

#include "adfusion/toy_backbone.hpp"

#include <vector>

#include "adfusion/rng.hpp"

namespace adfusion::model {
namespace {

std::uint64_t fnv1a(std::span<const std::byte> bytes, std::uint64_t h) {
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Tensor toy_backbone(BackboneKind kind, std::span<const std::byte> raw,
                    std::uint64_t seed, std::size_t rows, std::size_t width) {
  std::vector<float> out(rows * width);
  const std::uint64_t kind_tag = kind == BackboneKind::kText ? 0x74 : 0x69;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t begin = raw.size() * r / rows;
    const std::size_t end = raw.size() * (r + 1) / rows;
    std::uint64_t h = fnv1a(raw.subspan(begin, end - begin),
                            0xcbf29ce484222325ULL);
    std::uint64_t mix = seed ^ (kind_tag << 56) ^ (static_cast<std::uint64_t>(r) << 1);
    h ^= splitmix64(mix);
    Rng rng(h);
    for (std::size_t c = 0; c < width; ++c) {
      out[r * width + c] = static_cast<float>(rng.uniform(-1.0, 1.0));
    }
  }
  return Tensor({rows, width}, std::move(out));
}

Tensor toy_backbone(BackboneKind kind, std::string_view text,
                    std::uint64_t seed, std::size_t rows, std::size_t width) {
  return toy_backbone(
      kind,
      std::span<const std::byte>(reinterpret_cast<const std::byte*>(text.data()),
                                 text.size()),
      seed, rows, width);
}

}  // namespace adfusion::model
