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

#include "adfusion/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace adfusion::metrics {
namespace {

double ratio(std::size_t num, std::size_t den, bool& undefined) {
  if (den == 0) {
    undefined = true;
    return 0.0;
  }
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

constexpr std::size_t kCellWidth = 14;

// Pads to a display width, counting UTF-8 code points rather than bytes.
std::string pad(const std::string& s, std::size_t width) {
  std::size_t shown = 0;
  for (unsigned char c : s) shown += (c & 0xc0) != 0x80;
  return shown >= width ? s + ' ' : s + std::string(width - shown, ' ');
}

std::string fixed_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> predictions,
                          std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("metrics: " +
                                std::to_string(predictions.size()) +
                                " predictions vs " +
                                std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw std::invalid_argument("metrics: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int p = predictions[i], y = labels[i];
    if ((p != 0 && p != 1) || (y != 0 && y != 1)) {
      throw std::invalid_argument("metrics: labels must be 0 or 1");
    }
    if (p == 1 && y == 1) ++cm.tp;
    if (p == 1 && y == 0) ++cm.fp;
    if (p == 0 && y == 1) ++cm.fn;
    if (p == 0 && y == 0) ++cm.tn;
  }
  return cm;
}

RunMetrics compute_metrics(const ConfusionMatrix& cm) {
  RunMetrics m;
  m.precision = ratio(cm.tp, cm.tp + cm.fp, m.undefined);
  m.recall = ratio(cm.tp, cm.tp + cm.fn, m.undefined);
  m.accuracy = ratio(cm.tp + cm.tn, cm.total(), m.undefined);
  m.specificity = ratio(cm.tn, cm.tn + cm.fp, m.undefined);
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1 = 0.0;
    m.undefined = true;
  }
  return m;
}

RunMetrics compute_metrics(std::span<const int> predictions,
                           std::span<const int> labels) {
  return compute_metrics(confusion(predictions, labels));
}

const MetricSummary& MetricsReport::get(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m;
  }
  throw std::out_of_range("no metric named " + name);
}

MetricsReport aggregate(std::span<const RunMetrics> runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
  MetricsReport report;
  report.runs = runs.size();
  for (const char* name : kMetricNames) {
    MetricSummary s;
    s.name = name;
    for (const auto& r : runs) {
      const std::string n = name;
      const double v = n == "precision" ? r.precision
                       : n == "recall"  ? r.recall
                       : n == "f1"      ? r.f1
                       : n == "accuracy" ? r.accuracy
                                         : r.specificity;
      s.per_run.push_back(v);
    }
    double total = 0;
    for (double v : s.per_run) total += v;
    s.mean = total / static_cast<double>(s.per_run.size());
    double sq = 0;
    for (double v : s.per_run) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(s.per_run.size()));
    report.metrics.push_back(std::move(s));
  }
  return report;
}

std::string format_mean_std(double mean, double std) {
  return fixed2(mean) + " ±" + fixed2(std);
}

std::string MetricsReport::format_table(const std::string& title) const {
  static constexpr const char* kHeaders[] = {"Prec", "Rec", "F1-score", "Acc",
                                             "Spec"};
  const std::string name = title.empty() ? "Model" : title;
  const std::size_t first = std::max<std::size_t>(name.size(), 12) + 2;
  std::ostringstream os;
  os << pad("Architecture", first);
  for (const char* h : kHeaders) os << pad(h, kCellWidth);
  os << '\n' << pad(name, first);
  for (const auto& m : metrics) {
    os << pad(format_mean_std(m.mean, m.std), kCellWidth);
  }
  os << '\n' << "mean ±std over " << runs << (runs == 1 ? " run" : " runs")
     << ", percent\n";
  std::string text = os.str();
  for (auto pos = text.find(" \n"); pos != std::string::npos;
       pos = text.find(" \n")) {
    text.erase(pos, 1);
  }
  return text;
}

std::string MetricsReport::to_csv() const {
  std::ostringstream os;
  os << "metric,mean,std";
  for (std::size_t r = 0; r < runs; ++r) os << ",run" << (r + 1);
  os << '\n';
  for (const auto& m : metrics) {
    os << m.name << ',' << fixed_full(m.mean) << ',' << fixed_full(m.std);
    for (double v : m.per_run) os << ',' << fixed_full(v);
    os << '\n';
  }
  return os.str();
}

}  // namespace adfusion::metrics
