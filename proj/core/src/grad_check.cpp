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

#include "adfusion/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "adfusion/error.hpp"

namespace adfusion {
namespace {

double evaluate(const LossClosure& forward) {
  Tape64 tape = Tape64::disabled();
  return forward(tape).item();
}

}  // namespace

GradCheckResult grad_check(const LossClosure& forward,
                           std::vector<NamedParam> params, double eps) {
  for (auto& p : params) {
    p.tensor.set_requires_grad(true);
    p.tensor.zero_grad();
  }
  Tape64 tape;
  Tensor64 loss = forward(tape);
  tape.backward(loss);

  const double base = loss.item();
  if (evaluate(forward) != base) {
    throw NumericError("grad_check: forward is not deterministic");
  }

  GradCheckResult result;
  for (auto& p : params) {
    std::vector<double> analytic(p.tensor.numel(), 0.0);
    if (p.tensor.has_grad()) {
      std::copy(p.tensor.grad().begin(), p.tensor.grad().end(),
                analytic.begin());
    }
    auto values = p.tensor.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = evaluate(forward);
      values[i] = saved - eps;
      const double down = evaluate(forward);
      values[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double err =
          std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
      ++result.entries_checked;
      if (!(err <= result.max_relative_error) || result.entries_checked == 1) {
        result.max_relative_error = err;
        result.worst_param = p.name;
        result.worst_index = i;
        result.worst_analytic = analytic[i];
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace adfusion
