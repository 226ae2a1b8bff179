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

#include "adfusion/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "adfusion/error.hpp"
#include "adfusion/ops.hpp"
#include "adfusion/optim.hpp"

namespace adfusion::training {

namespace {

// Stream tags for Rng::derive, one per consumer of randomness within a run.
constexpr std::uint64_t kSplitStream = 10;
constexpr std::uint64_t kShuffleStream = 11;
constexpr std::uint64_t kDropoutStream = 12;

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0)) throw ConfigError("learning rate must be positive");
  if (!(plateau_factor > 0 && plateau_factor < 1)) {
    throw ConfigError("plateau factor must be in (0, 1)");
  }
  if (plateau_patience < 1 || early_stop_patience < 1) {
    throw ConfigError("patience values must be at least 1");
  }
  if (!(train_fraction > 0 && train_fraction < 1)) {
    throw ConfigError("train fraction must be in (0, 1)");
  }
  if (runs < 1) throw ConfigError("runs must be at least 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
}

Split split_train_val(const Dataset& data, double fraction,
                      std::uint64_t seed) {
  if (!(fraction > 0 && fraction < 1)) {
    throw ConfigError("split fraction must be in (0, 1)");
  }
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = data[i].label;
    if (y != 0 && y != 1) {
      throw ConfigError("split: subject '" + data[i].subject_id +
                        "' has label outside {0, 1}");
    }
    by_class[y].push_back(i);
  }
  if (by_class[0].empty() || by_class[1].empty()) {
    throw ConfigError("split needs both classes present, got a single-class "
                      "dataset of " +
                      std::to_string(data.size()) + " subjects");
  }

  const auto n = static_cast<double>(data.size());
  const auto n_train = static_cast<std::size_t>(std::floor(fraction * n + 0.5));

  // Largest-remainder allocation of n_train across the two classes.
  std::size_t take[2];
  double remainder[2];
  for (int c = 0; c < 2; ++c) {
    const double ideal = fraction * static_cast<double>(by_class[c].size());
    take[c] = static_cast<std::size_t>(std::floor(ideal));
    remainder[c] = ideal - std::floor(ideal);
  }
  while (take[0] + take[1] < n_train) {
    const int c = remainder[1] > remainder[0] ? 1 : 0;
    const int pick = take[c] < by_class[c].size() ? c : 1 - c;
    ++take[pick];
    remainder[pick] = -1.0;
  }

  Rng rng = Rng::derive(seed, kSplitStream);
  std::vector<char> in_train(data.size(), 0);
  for (int c = 0; c < 2; ++c) {
    auto idx = by_class[c];
    rng.shuffle(idx);
    for (std::size_t i = 0; i < take[c]; ++i) in_train[idx[i]] = 1;
  }
  Split split;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (in_train[i] ? split.train : split.val).push_back(data[i]);
  }
  return split;
}

double mean_loss(const MultimodalModel<float>& model, const Dataset& data) {
  if (data.empty()) throw ConfigError("mean_loss on an empty dataset");
  double total = 0;
  for (const auto& s : data) {
    auto tape = Tape::disabled();
    auto loss = ops::cross_entropy(tape, model.logits(s),
                                   static_cast<std::size_t>(s.label));
    total += loss.item();
  }
  return total / static_cast<double>(data.size());
}

std::vector<int> predict_all(const MultimodalModel<float>& model,
                             const Dataset& data) {
  std::vector<int> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(model.predict(s));
  return out;
}

std::vector<int> labels_of(const Dataset& data) {
  std::vector<int> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(s.label);
  return out;
}

TrainResult train_one_run(const ModelConfig& model_cfg,
                          const TrainConfig& train_cfg, const Dataset& train,
                          const Dataset& val, std::uint64_t seed) {
  train_cfg.validate();
  if (train.empty() || val.empty()) {
    throw ConfigError("training needs non-empty train and validation sets");
  }
  for (const auto& s : train) model::validate_sample(model_cfg, s);
  for (const auto& s : val) model::validate_sample(model_cfg, s);

  TrainResult result;
  result.model = MultimodalModel<float>::init(model_cfg, seed);
  auto& model = result.model;

  std::vector<Tensor> params;
  for (const auto& p : model.parameters()) params.push_back(p.tensor);
  optim::Adam<float> adam(params, {.lr = train_cfg.lr});
  optim::PlateauScheduler plateau{.current_lr = train_cfg.lr,
                                  .factor = train_cfg.plateau_factor,
                                  .patience = train_cfg.plateau_patience};
  optim::EarlyStopping early{.patience = train_cfg.early_stop_patience};

  Rng shuffle_rng = Rng::derive(seed, kShuffleStream);
  Rng dropout_rng = Rng::derive(seed, kDropoutStream);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  auto best = model.snapshot();
  result.best_val_loss = std::numeric_limits<double>::infinity();
  const float batch_scale = 1.0f / static_cast<float>(train_cfg.batch_size);

  for (int epoch = 1; epoch <= train_cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    adam.set_lr(plateau.current_lr);
    adam.zero_grad();
    double train_total = 0;
    std::size_t pending = 0;
    for (std::size_t idx : order) {
      const auto& sample = train[idx];
      Tape tape;
      auto out = model.forward(tape, sample, true, dropout_rng);
      auto loss = ops::cross_entropy(tape, out.logits,
                                     static_cast<std::size_t>(sample.label));
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw NumericError("non-finite training loss at epoch " +
                           std::to_string(epoch) + " on subject '" +
                           sample.subject_id + "' (lr " +
                           std::to_string(plateau.current_lr) + ")");
      }
      train_total += value;
      if (train_cfg.batch_size > 1) loss = ops::scale(tape, loss, batch_scale);
      tape.backward(loss);
      if (++pending == train_cfg.batch_size) {
        adam.step();
        adam.zero_grad();
        pending = 0;
      }
    }
    if (pending > 0) {
      adam.step();
      adam.zero_grad();
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = plateau.current_lr;
    rec.train_loss = train_total / static_cast<double>(train.size());
    rec.val_loss = mean_loss(model, val);
    const auto preds = predict_all(model, val);
    rec.val_accuracy =
        metrics::compute_metrics(preds, labels_of(val)).accuracy;

    if (rec.val_loss < result.best_val_loss) {
      result.best_val_loss = rec.val_loss;
      result.best_epoch = epoch;
      best = model.snapshot();
    }
    rec.lr_reduced = plateau.step(rec.val_loss);
    const bool stop = early.step(rec.val_loss);
    result.history.push_back(rec);
    if (stop) {
      result.stopped_early = true;
      break;
    }
  }
  model.restore(best);
  return result;
}

ProtocolResult run_protocol(const ModelConfig& model_cfg,
                            const TrainConfig& train_cfg,
                            const Dataset& train_set, const Dataset& test_set,
                            unsigned threads) {
  train_cfg.validate();
  model_cfg.validate();
  if (test_set.empty()) throw ConfigError("protocol needs a test set");
  {
    std::set<std::string> train_ids;
    for (const auto& s : train_set) train_ids.insert(s.subject_id);
    for (const auto& s : test_set) {
      if (train_ids.count(s.subject_id)) {
        throw ConfigError("subject '" + s.subject_id +
                          "' appears in both train and test sets");
      }
    }
  }

  const auto n_runs = static_cast<std::size_t>(train_cfg.runs);
  ProtocolResult result;
  result.runs.resize(n_runs);

  auto do_run = [&](std::size_t i) {
    RunOutcome& run = result.runs[i];
    run.seed = train_cfg.run_seed(static_cast<int>(i));
    auto split = split_train_val(train_set, train_cfg.train_fraction, run.seed);
    run.training =
        train_one_run(model_cfg, train_cfg, split.train, split.val, run.seed);
    run.test_metrics = metrics::compute_metrics(
        predict_all(run.training.model, test_set), labels_of(test_set));
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_runs)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n_runs; ++i) do_run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n_runs; i = next++) {
          try {
            do_run(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  std::vector<metrics::RunMetrics> per_run;
  for (const auto& r : result.runs) per_run.push_back(r.test_metrics);
  result.report = metrics::aggregate(per_run);
  return result;
}

}  // namespace adfusion::training
