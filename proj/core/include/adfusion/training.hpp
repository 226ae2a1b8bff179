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
#include <functional>
#include <string>
#include <vector>

#include "adfusion/metrics.hpp"
#include "adfusion/model.hpp"

namespace adfusion::training {

using model::ModelConfig;
using model::MultimodalModel;
using model::SubjectSample;
using Dataset = std::vector<SubjectSample>;

struct TrainConfig {
  double lr = 1e-5;
  double plateau_factor = 0.1;
  int plateau_patience = 3;
  int early_stop_patience = 6;
  double train_fraction = 0.65;
  int runs = 5;
  int max_epochs = 100;
  std::uint64_t base_seed = 0;
  std::size_t batch_size = 1;
  /// Every run uses base_seed instead of base_seed + i.
  bool same_seed_every_run = false;

  void validate() const;
  std::uint64_t run_seed(int run) const {
    return same_seed_every_run ? base_seed
                               : base_seed + static_cast<std::uint64_t>(run);
  }
};

struct Split {
  Dataset train;
  Dataset val;
};

/// Stratified split: round(fraction * n) subjects go to train (half-up
/// rounding), allocated across classes by largest remainder. Deterministic
/// in `seed`; within each part subjects keep dataset order. Throws
/// ConfigError unless both classes are present.
Split split_train_val(const Dataset& data, double fraction, std::uint64_t seed);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0;
  double val_loss = 0;
  double val_accuracy = 0;  // percent
  double lr = 0;            // learning rate used during this epoch
  bool lr_reduced = false;  // plateau fired after this epoch
};

struct TrainResult {
  MultimodalModel<float> model;  // parameters from the best-val-loss epoch
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val_loss = 0;
  bool stopped_early = false;
};

/// Epoch loop: shuffle -> per-sample forward/backward -> Adam step (every
/// batch_size samples) -> validation loss -> plateau scheduler -> early
/// stopping. Throws NumericError on a non-finite training loss.
TrainResult train_one_run(const ModelConfig& model_cfg,
                          const TrainConfig& train_cfg, const Dataset& train,
                          const Dataset& val, std::uint64_t seed);

/// Mean cross-entropy in eval mode.
double mean_loss(const MultimodalModel<float>& model, const Dataset& data);
std::vector<int> predict_all(const MultimodalModel<float>& model,
                             const Dataset& data);
std::vector<int> labels_of(const Dataset& data);

struct RunOutcome {
  std::uint64_t seed = 0;
  TrainResult training;
  metrics::RunMetrics test_metrics;
};

struct ProtocolResult {
  std::vector<RunOutcome> runs;
  metrics::MetricsReport report;
};

/// For each run i: seed_i, split the training set, train, score the test
/// set; then aggregate mean and population std. Runs are independent and may
/// execute on up to `threads` threads without changing the result.
ProtocolResult run_protocol(const ModelConfig& model_cfg,
                            const TrainConfig& train_cfg,
                            const Dataset& train_set, const Dataset& test_set,
                            unsigned threads = 1);

}  // namespace adfusion::training
