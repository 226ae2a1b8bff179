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

#include "adfusion/gated_attention.hpp"

#include <cmath>

#include "adfusion/error.hpp"
#include "adfusion/ops.hpp"

namespace adfusion::attention {

template <typename T>
GatedAttentionParams<T> GatedAttentionParams<T>::init(std::size_t d,
                                                      std::size_t d_g,
                                                      Rng& rng) {
  GatedAttentionParams p;
  p.fc_q = nn::DenseLayer<T>::xavier(d, d_g, rng);
  p.fc_k = nn::DenseLayer<T>::xavier(d, d_g, rng);
  p.fc_g = nn::DenseLayer<T>::xavier(d_g, 2, rng);
  return p;
}

template <typename T>
GatedAttentionParams<T> GatedAttentionParams<T>::zeros(std::size_t d,
                                                       std::size_t d_g) {
  return {nn::DenseLayer<T>::zeros(d, d_g), nn::DenseLayer<T>::zeros(d, d_g),
          nn::DenseLayer<T>::zeros(d_g, 2)};
}

template <typename T>
void GatedAttentionParams<T>::append_parameters(
    const std::string& prefix, nn::ParameterList<T>& out) const {
  fc_q.append_parameters(prefix + ".fc_q", out);
  fc_k.append_parameters(prefix + ".fc_k", out);
  fc_g.append_parameters(prefix + ".fc_g", out);
}

template <typename T>
GatingMasks<T> compute_gating_masks(BasicTape<T>& tape,
                                    const GatedAttentionParams<T>& params,
                                    const BasicTensor<T>& q,
                                    const BasicTensor<T>& k) {
  if (q.shape() != k.shape() || q.rank() != 2) {
    throw ShapeError("gating masks need matching [N x d] inputs, got " +
                     shape_str(q.shape()) + " and " + shape_str(k.shape()));
  }
  auto gated = ops::mul(tape, params.fc_q.forward(tape, q),
                        params.fc_k.forward(tape, k));
  auto m = ops::sigmoid(tape, params.fc_g.forward(tape, gated));
  auto mask_q = ops::column(tape, m, 0);
  auto mask_k = ops::column(tape, m, 1);
  return {m, mask_q, mask_k};
}

template <typename T>
BasicTensor<T> gated_attention_map(BasicTape<T>& tape, const BasicTensor<T>& q,
                                   const BasicTensor<T>& k,
                                   const BasicTensor<T>& mask_q,
                                   const BasicTensor<T>& mask_k) {
  if (q.shape() != k.shape() || q.rank() != 2) {
    throw ShapeError("attention map needs matching [N x d] inputs, got " +
                     shape_str(q.shape()) + " and " + shape_str(k.shape()));
  }
  const std::size_t n = q.dim(0), d = q.dim(1);
  if (mask_q.shape() != Shape{n} || mask_k.shape() != Shape{n}) {
    throw ShapeError("attention masks must have length " + std::to_string(n) +
                     ", got " + shape_str(mask_q.shape()) + " and " +
                     shape_str(mask_k.shape()));
  }
  auto gq = ops::mul(tape, q, ops::tile_columns(tape, mask_q, d));
  auto gk = ops::mul(tape, k, ops::tile_columns(tape, mask_k, d));
  auto scores = ops::matmul(tape, gq, ops::transpose(tape, gk));
  const T inv_sqrt_d = static_cast<T>(1.0 / std::sqrt(static_cast<double>(d)));
  return ops::softmax_rows(tape, ops::scale(tape, scores, inv_sqrt_d));
}

template <typename T>
AttentionTrace<T> gated_self_attention_forward(
    BasicTape<T>& tape, const GatedAttentionParams<T>& params,
    const BasicTensor<T>& z) {
  if (z.rank() != 2 || z.dim(0) == 0) {
    throw ShapeError("gated self-attention needs [N x d] input with N >= 1, "
                     "got " +
                     shape_str(z.shape()));
  }
  if (z.dim(1) != params.d()) {
    throw ShapeError("gated self-attention configured for d=" +
                     std::to_string(params.d()) + ", got " +
                     shape_str(z.shape()));
  }
  AttentionTrace<T> trace;
  trace.q = z;
  trace.k = z;
  trace.v = z;
  auto masks = compute_gating_masks(tape, params, trace.q, trace.k);
  trace.masks_m = masks.m;
  trace.mask_q = masks.mask_q;
  trace.mask_k = masks.mask_k;
  trace.attention_map =
      gated_attention_map(tape, trace.q, trace.k, trace.mask_q, trace.mask_k);
  trace.output_h = ops::matmul(tape, trace.attention_map, trace.v);
  return trace;
}

#define ADFUSION_INSTANTIATE_ATTENTION(T)                                     \
  template struct GatedAttentionParams<T>;                                    \
  template GatingMasks<T> compute_gating_masks(                               \
      BasicTape<T>&, const GatedAttentionParams<T>&, const BasicTensor<T>&,   \
      const BasicTensor<T>&);                                                 \
  template BasicTensor<T> gated_attention_map(                                \
      BasicTape<T>&, const BasicTensor<T>&, const BasicTensor<T>&,            \
      const BasicTensor<T>&, const BasicTensor<T>&);                          \
  template AttentionTrace<T> gated_self_attention_forward(                    \
      BasicTape<T>&, const GatedAttentionParams<T>&, const BasicTensor<T>&);

ADFUSION_INSTANTIATE_ATTENTION(float)
ADFUSION_INSTANTIATE_ATTENTION(double)

#undef ADFUSION_INSTANTIATE_ATTENTION

}  // namespace adfusion::attention
