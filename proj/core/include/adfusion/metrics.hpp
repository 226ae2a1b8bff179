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

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace adfusion::metrics {

/// Counts with AD (label 1) as the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
};

/// Throws std::invalid_argument on empty input, length mismatch, or labels
/// outside {0, 1}.
ConfusionMatrix confusion(std::span<const int> predictions,
                          std::span<const int> labels);

/// Single-run metrics in percent. A zero denominator yields 0 and sets
/// `undefined` so callers can warn.
struct RunMetrics {
  double precision = 0, recall = 0, f1 = 0, accuracy = 0, specificity = 0;
  bool undefined = false;
};

RunMetrics compute_metrics(const ConfusionMatrix& cm);
RunMetrics compute_metrics(std::span<const int> predictions,
                           std::span<const int> labels);

inline constexpr std::array<const char*, 5> kMetricNames = {
    "precision", "recall", "f1", "accuracy", "specificity"};

struct MetricSummary {
  std::string name;
  double mean = 0;
  double std = 0;  // population standard deviation
  std::vector<double> per_run;
};

/// Mean and population std of each metric over runs.
struct MetricsReport {
  std::vector<MetricSummary> metrics;  // kMetricNames order
  std::size_t runs = 0;

  const MetricSummary& get(const std::string& name) const;

  /// One-row table in the layout Architecture, Prec, Rec, F1-score, Acc,
  /// Spec with "mean ±std" cells at 2 decimals; `title` names the row.
  std::string format_table(const std::string& title = "") const;
  /// One CSV record per metric: name,mean,std,run1,...
  std::string to_csv() const;
};

MetricsReport aggregate(std::span<const RunMetrics> runs);

/// "85.48 ±0.76"
std::string format_mean_std(double mean, double std);

}  // namespace adfusion::metrics
