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
#include <vector>

#include "adfusion/ops.hpp"
#include "adfusion/rng.hpp"
#include "adfusion/tape.hpp"
#include "adfusion/tensor.hpp"

namespace adfusion::nn {

template <typename T>
struct NamedTensor {
  std::string name;
  BasicTensor<T> tensor;
};

template <typename T>
using ParameterList = std::vector<NamedTensor<T>>;

/// y = x W + b over the trailing dimension. W is [in x out].
template <typename T>
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(BasicTensor<T> weight, BasicTensor<T> bias);

  /// Xavier-uniform weights, zero bias.
  static DenseLayer xavier(std::size_t in, std::size_t out, Rng& rng);
  static DenseLayer zeros(std::size_t in, std::size_t out);

  std::size_t in_features() const { return weight_.dim(0); }
  std::size_t out_features() const { return weight_.dim(1); }

  const BasicTensor<T>& weight() const { return weight_; }
  const BasicTensor<T>& bias() const { return bias_; }
  BasicTensor<T>& weight() { return weight_; }
  BasicTensor<T>& bias() { return bias_; }

  /// Accepts x of shape [in] or [n x in].
  BasicTensor<T> forward(BasicTape<T>& tape, const BasicTensor<T>& x) const;

  void append_parameters(const std::string& prefix,
                         ParameterList<T>& out) const;

 private:
  BasicTensor<T> weight_;
  BasicTensor<T> bias_;
};

/// Inverted dropout: in training mode each entry is zeroed with probability
/// `rate` and survivors are scaled by 1 / (1 - rate). Eval mode returns `x`
/// itself. Throws ConfigError unless 0 <= rate < 1.
template <typename T>
BasicTensor<T> dropout(BasicTape<T>& tape, const BasicTensor<T>& x,
                       double rate, bool training, Rng& rng);

/// Sinusoidal encodings, PE[pos, 2i] = sin(pos / 10000^(2i/d)) and
/// PE[pos, 2i+1] = cos(pos / 10000^(2i/d)). For odd d the table is built for
/// d + 1 columns and the last one dropped.
template <typename T>
BasicTensor<T> positional_encoding(std::size_t n, std::size_t d);

/// Column-wise mean of z[n x d].
template <typename T>
BasicTensor<T> average_pool(BasicTape<T>& tape, const BasicTensor<T>& z) {
  return ops::mean_rows(tape, z);
}

extern template class DenseLayer<float>;
extern template class DenseLayer<double>;

}  // namespace adfusion::nn
