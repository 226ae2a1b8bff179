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

#include "adfusion/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "adfusion/error.hpp"

namespace adfusion {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

template <typename T>
BasicTensor<T>::BasicTensor() : BasicTensor(Shape{}, false) {}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, bool requires_grad)
    : impl_(std::make_shared<Storage>()) {
  impl_->data.assign(shape_numel(shape), T{0});
  impl_->shape = std::move(shape);
  impl_->requires_grad = requires_grad;
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data,
                            bool requires_grad)
    : impl_(std::make_shared<Storage>()) {
  if (shape_numel(shape) != data.size()) {
    throw ShapeError("tensor shape " + shape_str(shape) + " needs " +
                     std::to_string(shape_numel(shape)) + " values, got " +
                     std::to_string(data.size()));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

template <typename T>
BasicTensor<T> BasicTensor<T>::scalar(T value) {
  return BasicTensor(Shape{}, std::vector<T>{value});
}

template <typename T>
BasicTensor<T> BasicTensor<T>::vector(std::initializer_list<T> values) {
  return BasicTensor(Shape{values.size()}, std::vector<T>(values));
}

template <typename T>
BasicTensor<T> BasicTensor<T>::matrix(
    std::initializer_list<std::initializer_list<T>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m ? rows.begin()->size() : 0;
  std::vector<T> data;
  data.reserve(m * n);
  for (const auto& row : rows) {
    if (row.size() != n) throw ShapeError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return BasicTensor(Shape{m, n}, std::move(data));
}

template <typename T>
BasicTensor<T> BasicTensor<T>::filled(Shape shape, T value) {
  std::vector<T> data(shape_numel(shape), value);
  return BasicTensor(std::move(shape), std::move(data));
}

template <typename T>
T BasicTensor<T>::at(std::size_t i, std::size_t j) const {
  if (rank() != 2) throw ShapeError("at(i,j) on tensor " + shape_str(shape()));
  return impl_->data.at(i * impl_->shape[1] + j);
}

template <typename T>
T BasicTensor<T>::at(std::size_t i, std::size_t j, std::size_t k) const {
  if (rank() != 3) {
    throw ShapeError("at(i,j,k) on tensor " + shape_str(shape()));
  }
  const auto& s = impl_->shape;
  return impl_->data.at((i * s[1] + j) * s[2] + k);
}

template <typename T>
T BasicTensor<T>::item() const {
  if (numel() != 1) {
    throw ShapeError("item() on tensor " + shape_str(shape()));
  }
  return impl_->data[0];
}

template <typename T>
std::span<T> BasicTensor<T>::mutable_grad() const {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), T{0});
  return impl_->grad;
}

template <typename T>
void BasicTensor<T>::zero_grad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), T{0});
}

template <typename T>
BasicTensor<T> BasicTensor<T>::clone() const {
  BasicTensor out(impl_->shape, impl_->data, impl_->requires_grad);
  return out;
}

template <typename T>
bool BasicTensor<T>::all_finite() const {
  return std::all_of(impl_->data.begin(), impl_->data.end(),
                     [](T v) { return std::isfinite(v); });
}

template class BasicTensor<float>;
template class BasicTensor<double>;

}  // namespace adfusion
