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

#include "adfusion/tape.hpp"
#include "adfusion/tensor.hpp"

namespace adfusion {

/// Builds the scalar loss on the given tape. Must be deterministic: dropout
/// off, no hidden state.
using LossClosure = std::function<Tensor64(Tape64&)>;

struct NamedParam {
  std::string name;
  Tensor64 tensor;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t entries_checked = 0;
};

/// Compares the tape's analytic gradient with central differences for every
/// entry of every parameter:
///
///   err = |g - (f(x+eps) - f(x-eps)) / (2 eps)| / max(1, |g|)
///
/// Throws NumericError if two evaluations at the unperturbed point differ.
/// Parameter values are restored on return.
GradCheckResult grad_check(const LossClosure& forward,
                           std::vector<NamedParam> params, double eps = 1e-5);

}  // namespace adfusion
