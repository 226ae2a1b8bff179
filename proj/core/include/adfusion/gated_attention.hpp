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
#include <string>

#include "adfusion/nn.hpp"
#include "adfusion/rng.hpp"
#include "adfusion/tape.hpp"
#include "adfusion/tensor.hpp"

namespace adfusion::attention {

/// Learned part of gated self-attention: the query and key gate projections
/// (d -> d_g) and the mask head (d_g -> 2). Queries, keys and values are the
/// input sequence itself, so these are the only parameters.
template <typename T>
struct GatedAttentionParams {
  nn::DenseLayer<T> fc_q;
  nn::DenseLayer<T> fc_k;
  nn::DenseLayer<T> fc_g;

  static GatedAttentionParams init(std::size_t d, std::size_t d_g, Rng& rng);
  static GatedAttentionParams zeros(std::size_t d, std::size_t d_g);

  std::size_t d() const { return fc_q.in_features(); }
  std::size_t d_g() const { return fc_q.out_features(); }

  void append_parameters(const std::string& prefix,
                         nn::ParameterList<T>& out) const;
};

template <typename T>
struct GatingMasks {
  BasicTensor<T> m;       // [N x 2]
  BasicTensor<T> mask_q;  // [N], column 0 of m
  BasicTensor<T> mask_k;  // [N], column 1 of m
};

/// Everything a forward pass produces, for inspection and tests.
template <typename T>
struct AttentionTrace {
  BasicTensor<T> q, k, v;
  BasicTensor<T> masks_m;
  BasicTensor<T> mask_q, mask_k;
  BasicTensor<T> attention_map;  // [N x N], rows sum to 1
  BasicTensor<T> output_h;       // [N x d]
};

/// M = sigmoid(fc_g(fc_q(Q) * fc_k(K))), split into per-token query and key
/// gates.
template <typename T>
GatingMasks<T> compute_gating_masks(BasicTape<T>& tape,
                                    const GatedAttentionParams<T>& params,
                                    const BasicTensor<T>& q,
                                    const BasicTensor<T>& k);

/// softmax_rows((Q * tile(mask_q)) (K * tile(mask_k))^T / sqrt(d)).
template <typename T>
BasicTensor<T> gated_attention_map(BasicTape<T>& tape, const BasicTensor<T>& q,
                                   const BasicTensor<T>& k,
                                   const BasicTensor<T>& mask_q,
                                   const BasicTensor<T>& mask_k);

/// H = A V with Q = K = V = z. Output has the shape of z.
template <typename T>
AttentionTrace<T> gated_self_attention_forward(
    BasicTape<T>& tape, const GatedAttentionParams<T>& params,
    const BasicTensor<T>& z);

}  // namespace adfusion::attention
