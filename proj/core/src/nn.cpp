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

#include "adfusion/nn.hpp"

#include <cmath>
#include <utility>

#include "adfusion/error.hpp"

namespace adfusion::nn {

template <typename T>
DenseLayer<T>::DenseLayer(BasicTensor<T> weight, BasicTensor<T> bias)
    : weight_(std::move(weight)), bias_(std::move(bias)) {
  if (weight_.rank() != 2 || bias_.rank() != 1 ||
      bias_.dim(0) != weight_.dim(1)) {
    throw ShapeError("dense layer: weight " + shape_str(weight_.shape()) +
                     " incompatible with bias " + shape_str(bias_.shape()));
  }
  weight_.set_requires_grad(true);
  bias_.set_requires_grad(true);
}

template <typename T>
DenseLayer<T> DenseLayer<T>::xavier(std::size_t in, std::size_t out,
                                    Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  std::vector<T> w(in * out);
  for (T& v : w) v = static_cast<T>(rng.uniform(-bound, bound));
  return DenseLayer(BasicTensor<T>({in, out}, std::move(w)),
                    BasicTensor<T>({out}));
}

template <typename T>
DenseLayer<T> DenseLayer<T>::zeros(std::size_t in, std::size_t out) {
  return DenseLayer(BasicTensor<T>({in, out}), BasicTensor<T>({out}));
}

template <typename T>
BasicTensor<T> DenseLayer<T>::forward(BasicTape<T>& tape,
                                      const BasicTensor<T>& x) const {
  const std::size_t in = in_features();
  if (x.rank() == 1) {
    if (x.dim(0) != in) {
      throw ShapeError("dense layer expects trailing dim " +
                       std::to_string(in) + ", got " + shape_str(x.shape()));
    }
    auto row = ops::reshape(tape, x, {1, in});
    auto y = ops::matmul(tape, row, weight_);
    return ops::add(tape, ops::reshape(tape, y, {out_features()}), bias_);
  }
  if (x.rank() != 2 || x.dim(1) != in) {
    throw ShapeError("dense layer expects trailing dim " + std::to_string(in) +
                     ", got " + shape_str(x.shape()));
  }
  return ops::add_row_bias(tape, ops::matmul(tape, x, weight_), bias_);
}

template <typename T>
void DenseLayer<T>::append_parameters(const std::string& prefix,
                                      ParameterList<T>& out) const {
  out.push_back({prefix + ".weight", weight_});
  out.push_back({prefix + ".bias", bias_});
}

template <typename T>
BasicTensor<T> dropout(BasicTape<T>& tape, const BasicTensor<T>& x,
                       double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must be in [0, 1), got " +
                      std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  std::vector<T> mask(x.numel());
  for (T& m : mask) m = rng.bernoulli(rate) ? T{0} : keep_scale;
  return ops::mul(tape, x, BasicTensor<T>(x.shape(), std::move(mask)));
}

template <typename T>
BasicTensor<T> positional_encoding(std::size_t n, std::size_t d) {
  const std::size_t width = d % 2 == 0 ? d : d + 1;
  std::vector<T> out(n * d);
  for (std::size_t pos = 0; pos < n; ++pos) {
    for (std::size_t i = 0; i < width / 2; ++i) {
      const double angle =
          static_cast<double>(pos) /
          std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(width));
      const std::size_t c = 2 * i;
      out[pos * d + c] = static_cast<T>(std::sin(angle));
      if (c + 1 < d) out[pos * d + c + 1] = static_cast<T>(std::cos(angle));
    }
  }
  return BasicTensor<T>({n, d}, std::move(out));
}

template class DenseLayer<float>;
template class DenseLayer<double>;

template BasicTensor<float> dropout(BasicTape<float>&, const BasicTensor<float>&,
                                    double, bool, Rng&);
template BasicTensor<double> dropout(BasicTape<double>&,
                                     const BasicTensor<double>&, double, bool,
                                     Rng&);
template BasicTensor<float> positional_encoding<float>(std::size_t, std::size_t);
template BasicTensor<double> positional_encoding<double>(std::size_t,
                                                         std::size_t);

}  // namespace adfusion::nn
