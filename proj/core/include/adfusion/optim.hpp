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
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "adfusion/tensor.hpp"

namespace adfusion::optim {

struct AdamOptions {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Moments are zero-initialised, one pair per
/// registered parameter, and the step counter advances once per `step()`.
template <typename T>
class Adam {
 public:
  Adam(std::vector<BasicTensor<T>> params, AdamOptions options = {});

  /// Applies one update from each parameter's current grad. Parameters that
  /// never received a gradient are treated as g = 0.
  void step();
  void zero_grad();

  double lr() const { return options_.lr; }
  void set_lr(double lr) { options_.lr = lr; }
  std::int64_t steps() const { return t_; }
  const AdamOptions& options() const { return options_; }

 private:
  std::vector<BasicTensor<T>> params_;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
  AdamOptions options_;
  std::int64_t t_ = 0;
};

/// Reduce-on-plateau: after `patience` consecutive epochs without a strict
/// improvement of the validation loss, lr <- lr * factor and the counter
/// restarts. Fires any number of times.
struct PlateauScheduler {
  double best = std::numeric_limits<double>::infinity();
  int epochs_since_improvement = 0;
  double current_lr = 1e-5;
  double factor = 0.1;
  int patience = 3;
  double min_delta = 0.0;
  int reductions = 0;

  /// Returns true when this step reduced the learning rate.
  bool step(double val_loss);
};

/// Early stopping: `stopped` latches true once `patience` consecutive epochs
/// pass without a strict improvement.
struct EarlyStopping {
  double best = std::numeric_limits<double>::infinity();
  int epochs_since_improvement = 0;
  int patience = 6;
  double min_delta = 0.0;
  bool stopped = false;

  /// Returns the (possibly updated) stopped flag.
  bool step(double val_loss);
};

/// Feeds a whole loss sequence through a fresh copy of `initial`.
PlateauScheduler replay(PlateauScheduler initial, std::span<const double> losses);
EarlyStopping replay(EarlyStopping initial, std::span<const double> losses);

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace adfusion::optim
