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

#include "adfusion/tape.hpp"

#include <utility>

#include "adfusion/error.hpp"

namespace adfusion {

template <typename T>
bool BasicTape<T>::wants(
    std::initializer_list<const BasicTensor<T>*> inputs) const {
  if (!enabled_) return false;
  for (const auto* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

template <typename T>
void BasicTape<T>::record(std::string op, std::vector<BasicTensor<T>> inputs,
                          BasicTensor<T> output, BackwardFn backward) {
  output.set_requires_grad(true);
  entries_.push_back(Entry{std::move(op), std::move(inputs), std::move(output),
                           std::move(backward)});
}

template <typename T>
void BasicTape<T>::backward(BasicTensor<T> loss) {
  if (loss.numel() != 1 || loss.rank() > 1) {
    throw ShapeError("backward needs a scalar loss, got " +
                     shape_str(loss.shape()));
  }
  loss.mutable_grad()[0] += T{1};
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    // Entries that do not lead to the loss never received a gradient.
    if (!it->output.has_grad()) continue;
    it->backward(it->output);
  }
}

template class BasicTape<float>;
template class BasicTape<double>;

}  // namespace adfusion
