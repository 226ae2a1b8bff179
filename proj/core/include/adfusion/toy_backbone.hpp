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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "adfusion/tensor.hpp"

namespace adfusion::model {

enum class BackboneKind { kText, kImage };

/// Deterministic stand-in for a pretrained encoder. The input bytes are cut
/// into `rows` contiguous chunks; each chunk is hashed together with the
/// seed, kind and row index, and the hash drives a generator that emits one
/// embedding row with entries in [-1, 1). Same input and seed always give
/// the same [rows x width] tensor.
Tensor toy_backbone(BackboneKind kind, std::span<const std::byte> raw,
                    std::uint64_t seed, std::size_t rows, std::size_t width);

Tensor toy_backbone(BackboneKind kind, std::string_view text,
                    std::uint64_t seed, std::size_t rows, std::size_t width);

}  // namespace adfusion::model
