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

#include "adfusion/tape.hpp"
#include "adfusion/tensor.hpp"

// Differentiable primitives. Every op takes the tape first; when the tape is
// enabled and any input requires a gradient, the op records its local
// backward rule. Binary ops require identical shapes: there is no implicit
// broadcasting beyond `add_row_bias` and `tile_columns`.
namespace adfusion::ops {

/// [m x k] * [k x n] -> [m x n]. Each output entry accumulates a[i,k]*b[k,j]
/// in ascending k.
template <typename T>
BasicTensor<T> matmul(BasicTape<T>& tape, const BasicTensor<T>& a,
                      const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> transpose(BasicTape<T>& tape, const BasicTensor<T>& a);

template <typename T>
BasicTensor<T> add(BasicTape<T>& tape, const BasicTensor<T>& a,
                   const BasicTensor<T>& b);

/// Element-wise (Hadamard) product.
template <typename T>
BasicTensor<T> mul(BasicTape<T>& tape, const BasicTensor<T>& a,
                   const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> scale(BasicTape<T>& tape, const BasicTensor<T>& a, T factor);

/// x[m x n] + bias[n], bias repeated on every row.
template <typename T>
BasicTensor<T> add_row_bias(BasicTape<T>& tape, const BasicTensor<T>& x,
                            const BasicTensor<T>& bias);

template <typename T>
BasicTensor<T> sigmoid(BasicTape<T>& tape, const BasicTensor<T>& x);

/// max(x, 0); the subgradient at exactly 0 is 0.
template <typename T>
BasicTensor<T> relu(BasicTape<T>& tape, const BasicTensor<T>& x);

/// Row-wise softmax of a matrix, stabilised by subtracting the row max.
template <typename T>
BasicTensor<T> softmax_rows(BasicTape<T>& tape, const BasicTensor<T>& x);

/// Sum of all entries, as a rank-0 tensor.
template <typename T>
BasicTensor<T> sum(BasicTape<T>& tape, const BasicTensor<T>& x);

/// Column means of x[n x d] -> [d]. Throws ShapeError when n == 0.
template <typename T>
BasicTensor<T> mean_rows(BasicTape<T>& tape, const BasicTensor<T>& x);

/// Column j of x[m x n] -> [m].
template <typename T>
BasicTensor<T> column(BasicTape<T>& tape, const BasicTensor<T>& x,
                      std::size_t j);

/// v[m] -> [m x n] with v copied into every column.
template <typename T>
BasicTensor<T> tile_columns(BasicTape<T>& tape, const BasicTensor<T>& v,
                            std::size_t n);

template <typename T>
BasicTensor<T> reshape(BasicTape<T>& tape, const BasicTensor<T>& x,
                       Shape shape);

/// v[d] -> [v; 1], length d + 1.
template <typename T>
BasicTensor<T> append_one(BasicTape<T>& tape, const BasicTensor<T>& v);

/// a[p] (x) b[q] -> [p x q] with out[i,j] = a[i] * b[j].
template <typename T>
BasicTensor<T> outer(BasicTape<T>& tape, const BasicTensor<T>& a,
                     const BasicTensor<T>& b);

/// -log softmax(logits)[label] for a logit vector, computed via
/// log-sum-exp. Throws ConfigError when label is out of range.
template <typename T>
BasicTensor<T> cross_entropy(BasicTape<T>& tape, const BasicTensor<T>& logits,
                             std::size_t label);

}  // namespace adfusion::ops
