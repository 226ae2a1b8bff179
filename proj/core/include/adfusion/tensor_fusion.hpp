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

#include <optional>

#include "adfusion/tape.hpp"
#include "adfusion/tensor.hpp"

namespace adfusion::fusion {

/// Branch representations entering the fusion layer. The text vector is
/// always present; at least one of image/acoustic must be too.
template <typename T>
struct BranchVectors {
  BasicTensor<T> z_t;
  std::optional<BasicTensor<T>> z_v;
  std::optional<BasicTensor<T>> z_a;
};

/// Outer product of the 1-augmented branch vectors: (d_t+1) x (d_v+1) x
/// (d_a+1) for three branches, (d_t+1) x (d_x+1) for two. The entry at the
/// all-last index is exactly 1.
template <typename T>
struct FusedTensor {
  BasicTensor<T> data;

  std::size_t order() const { return data.rank(); }
};

/// [z; 1], the constant appended as the last element.
template <typename T>
BasicTensor<T> augment_one(BasicTape<T>& tape, const BasicTensor<T>& z);

/// Throws ShapeError when fewer than two branches are present or a branch
/// is not a vector.
template <typename T>
FusedTensor<T> tensor_fusion(BasicTape<T>& tape,
                             const BranchVectors<T>& branches);

/// Row-major flattening over (t, v, a) for the output head.
template <typename T>
BasicTensor<T> flatten(BasicTape<T>& tape, const FusedTensor<T>& fused);

}  // namespace adfusion::fusion
