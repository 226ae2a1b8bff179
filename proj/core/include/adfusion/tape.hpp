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
#include <functional>
#include <string>
#include <vector>

#include "adfusion/tensor.hpp"

namespace adfusion {

/// Ordered record of the differentiable operations executed during a forward
/// pass. Entries are appended in execution order, so every entry's inputs
/// were produced before it; `backward` walks the record once in reverse.
///
/// A disabled tape records nothing, which is how eval-mode forwards run.
/// A tape belongs to one thread.
template <typename T>
class BasicTape {
 public:
  /// Propagates `output.grad()` into the grads of the captured inputs.
  using BackwardFn = std::function<void(const BasicTensor<T>& output)>;

  struct Entry {
    std::string op;
    std::vector<BasicTensor<T>> inputs;
    BasicTensor<T> output;
    BackwardFn backward;
  };

  explicit BasicTape(bool enabled = true) : enabled_(enabled) {}

  static BasicTape disabled() { return BasicTape(false); }

  bool enabled() const { return enabled_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  /// True when an op over `inputs` must be recorded.
  bool wants(std::initializer_list<const BasicTensor<T>*> inputs) const;

  void record(std::string op, std::vector<BasicTensor<T>> inputs,
              BasicTensor<T> output, BackwardFn backward);

  /// Seeds d(loss)/d(loss) = 1 and accumulates (+=) gradients into every
  /// requires_grad tensor reachable from `loss`. Throws ShapeError when
  /// `loss` is not a scalar.
  void backward(BasicTensor<T> loss);

  void clear() { entries_.clear(); }

 private:
  bool enabled_;
  std::vector<Entry> entries_;
};

using Tape = BasicTape<float>;
using Tape64 = BasicTape<double>;

extern template class BasicTape<float>;
extern template class BasicTape<double>;

}  // namespace adfusion
