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

#include "adfusion/tensor_fusion.hpp"

#include "adfusion/error.hpp"
#include "adfusion/ops.hpp"

namespace adfusion::fusion {
namespace {

template <typename T>
void require_vector(const BasicTensor<T>& z, const char* name) {
  if (z.rank() != 1) {
    throw ShapeError(std::string("fusion branch ") + name +
                     " must be a vector, got " + shape_str(z.shape()));
  }
}

}  // namespace

template <typename T>
BasicTensor<T> augment_one(BasicTape<T>& tape, const BasicTensor<T>& z) {
  return ops::append_one(tape, z);
}

template <typename T>
FusedTensor<T> tensor_fusion(BasicTape<T>& tape,
                             const BranchVectors<T>& branches) {
  require_vector(branches.z_t, "z_t");
  if (!branches.z_v && !branches.z_a) {
    throw ShapeError("tensor fusion needs the text branch plus at least one "
                     "other modality");
  }
  auto t = augment_one(tape, branches.z_t);
  if (branches.z_v && branches.z_a) {
    require_vector(*branches.z_v, "z_v");
    require_vector(*branches.z_a, "z_a");
    auto v = augment_one(tape, *branches.z_v);
    auto a = augment_one(tape, *branches.z_a);
    // (t (x) v) flattened row-major, then (x) a: entry (i*|v| + j, k) is
    // t[i] v[j] a[k], i.e. T[i, j, k] after the reshape.
    auto tv = ops::outer(tape, t, v);
    auto tv_flat = ops::reshape(tape, tv, {t.numel() * v.numel()});
    auto tva = ops::outer(tape, tv_flat, a);
    return {ops::reshape(tape, tva, {t.numel(), v.numel(), a.numel()})};
  }
  const auto& other = branches.z_v ? *branches.z_v : *branches.z_a;
  require_vector(other, branches.z_v ? "z_v" : "z_a");
  return {ops::outer(tape, t, augment_one(tape, other))};
}

template <typename T>
BasicTensor<T> flatten(BasicTape<T>& tape, const FusedTensor<T>& fused) {
  return ops::reshape(tape, fused.data, {fused.data.numel()});
}

#define ADFUSION_INSTANTIATE_FUSION(T)                                      \
  template BasicTensor<T> augment_one(BasicTape<T>&, const BasicTensor<T>&); \
  template FusedTensor<T> tensor_fusion(BasicTape<T>&,                      \
                                        const BranchVectors<T>&);           \
  template BasicTensor<T> flatten(BasicTape<T>&, const FusedTensor<T>&);

ADFUSION_INSTANTIATE_FUSION(float)
ADFUSION_INSTANTIATE_FUSION(double)

#undef ADFUSION_INSTANTIATE_FUSION

}  // namespace adfusion::fusion
