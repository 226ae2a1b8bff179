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
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace adfusion {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Accumulator used for every reduction (dot products, row sums). Sums are
/// carried in a wider type and rounded once, which makes results insensitive
/// to summation order in all but pathological cases.
template <typename T>
using accum_t =
    std::conditional_t<std::is_same_v<T, float>, double, long double>;

/// Dense row-major tensor with optional gradient storage.
///
/// Copies are shallow: they share the underlying buffer, which is what lets a
/// computation tape refer back to the tensors it recorded. Use `clone()` for a
/// deep copy. Forward ops never mutate their inputs; only optimizers write to
/// parameter data through `mutable_data()`.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor();
  explicit BasicTensor(Shape shape, bool requires_grad = false);
  BasicTensor(Shape shape, std::vector<T> data, bool requires_grad = false);

  static BasicTensor scalar(T value);
  static BasicTensor vector(std::initializer_list<T> values);
  static BasicTensor matrix(std::initializer_list<std::initializer_list<T>> rows);
  static BasicTensor filled(Shape shape, T value);

  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return impl_->shape.at(axis); }
  std::size_t numel() const { return impl_->data.size(); }

  std::span<const T> data() const { return impl_->data; }
  std::span<T> mutable_data() { return impl_->data; }
  const std::vector<T>& values() const { return impl_->data; }

  T operator[](std::size_t flat) const { return impl_->data[flat]; }
  T at(std::size_t i, std::size_t j) const;
  T at(std::size_t i, std::size_t j, std::size_t k) const;
  T item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool on) { impl_->requires_grad = on; }

  bool has_grad() const { return !impl_->grad.empty(); }
  /// Gradient buffer; empty span until something has been accumulated.
  std::span<const T> grad() const { return impl_->grad; }
  /// Gradient buffer, zero-allocated on first access.
  std::span<T> mutable_grad() const;
  void zero_grad();

  bool same_storage(const BasicTensor& other) const {
    return impl_ == other.impl_;
  }

  BasicTensor clone() const;
  template <typename U>
  BasicTensor<U> cast() const;

  bool all_finite() const;

 private:
  struct Storage {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> impl_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

template <typename T>
template <typename U>
BasicTensor<U> BasicTensor<T>::cast() const {
  std::vector<U> out(impl_->data.begin(), impl_->data.end());
  return BasicTensor<U>(impl_->shape, std::move(out), impl_->requires_grad);
}

extern template class BasicTensor<float>;
extern template class BasicTensor<double>;

}  // namespace adfusion
