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

#include "adfusion/optim.hpp"

#include <cmath>
#include <utility>

namespace adfusion::optim {

template <typename T>
Adam<T>::Adam(std::vector<BasicTensor<T>> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.numel(), T{0});
    v_.emplace_back(p.numel(), T{0});
  }
}

template <typename T>
void Adam<T>::step() {
  ++t_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t p = 0; p < params_.size(); ++p) {
    auto& param = params_[p];
    if (!param.has_grad()) continue;
    const auto g = param.grad();
    auto x = param.mutable_data();
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double gi = g[i];
      const double mi = b1 * m[i] + (1.0 - b1) * gi;
      const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update =
          options_.lr * (mi / c1) / (std::sqrt(vi / c2) + options_.epsilon);
      x[i] = static_cast<T>(x[i] - update);
    }
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

bool PlateauScheduler::step(double val_loss) {
  if (val_loss < best - min_delta) {
    best = val_loss;
    epochs_since_improvement = 0;
    return false;
  }
  if (++epochs_since_improvement < patience) return false;
  current_lr *= factor;
  epochs_since_improvement = 0;
  ++reductions;
  return true;
}

bool EarlyStopping::step(double val_loss) {
  if (stopped) return true;
  if (val_loss < best - min_delta) {
    best = val_loss;
    epochs_since_improvement = 0;
  } else {
    ++epochs_since_improvement;
  }
  stopped = epochs_since_improvement >= patience;
  return stopped;
}

PlateauScheduler replay(PlateauScheduler initial,
                        std::span<const double> losses) {
  for (double l : losses) initial.step(l);
  return initial;
}

EarlyStopping replay(EarlyStopping initial, std::span<const double> losses) {
  for (double l : losses) initial.step(l);
  return initial;
}

template class Adam<float>;
template class Adam<double>;

}  // namespace adfusion::optim
