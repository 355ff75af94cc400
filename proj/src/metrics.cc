// Copyright 2026 The GuardNet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "guardnet/metrics.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "guardnet/errors.h"

namespace guardnet {
namespace {

double Ratio(int64_t num, int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void CheckLengths(size_t a, size_t b) {
  if (a != b) {
    throw DimensionError("length mismatch: " + std::to_string(a) + " vs " +
                         std::to_string(b));
  }
}

struct ClassTotals {
  int64_t positives = 0;
  int64_t negatives = 0;
};

ClassTotals CountClasses(std::span<const int> labels) {
  ClassTotals totals;
  for (int y : labels) (y == 1 ? totals.positives : totals.negatives)++;
  return totals;
}

// Indices sorted by descending score; equal scores are grouped by the
// sweeps below, so their relative order does not matter.
std::vector<size_t> DescendingOrder(std::span<const double> scores) {
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&scores](size_t a, size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

ConfusionCounts CountConfusion(std::span<const int> predictions,
                               std::span<const int> labels) {
  CheckLengths(predictions.size(), labels.size());
  ConfusionCounts counts;
  for (size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = predictions[i] == 1;
    const bool actual = labels[i] == 1;
    if (predicted && actual) {
      ++counts.tp;
    } else if (predicted) {
      ++counts.fp;
    } else if (actual) {
      ++counts.fn;
    } else {
      ++counts.tn;
    }
  }
  return counts;
}

ClassificationMetrics MetricsFromCounts(const ConfusionCounts& counts) {
  ClassificationMetrics m;
  m.accuracy = Ratio(counts.tp + counts.tn, counts.total());
  m.precision = Ratio(counts.tp, counts.tp + counts.fp);
  m.recall = Ratio(counts.tp, counts.tp + counts.fn);
  // 2PR/(P+R) written on counts; zero when there are no true positives.
  m.f1 = Ratio(2 * counts.tp, 2 * counts.tp + counts.fp + counts.fn);
  return m;
}

double IouFromCounts(const ConfusionCounts& counts) {
  const int64_t union_size = counts.tp + counts.fp + counts.fn;
  return union_size == 0 ? 1.0 : Ratio(counts.tp, union_size);
}

ClassificationMetrics PromptMetrics(std::span<const int> predictions,
                                    std::span<const int> labels) {
  if (labels.empty()) throw ValidationError("metrics over an empty set");
  return MetricsFromCounts(CountConfusion(predictions, labels));
}

TokenLevelMetrics TokenMetrics(std::span<const int> predicted_mask,
                               std::span<const int> label_mask) {
  const ConfusionCounts counts = CountConfusion(predicted_mask, label_mask);
  TokenLevelMetrics m;
  static_cast<ClassificationMetrics&>(m) = MetricsFromCounts(counts);
  m.iou = IouFromCounts(counts);
  return m;
}

std::vector<int> ApplyThreshold(std::span<const double> scores,
                                double threshold) {
  std::vector<int> predictions(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    predictions[i] = scores[i] > threshold ? 1 : 0;
  }
  return predictions;
}

RocCurve ComputeRoc(std::span<const double> scores,
                    std::span<const int> labels) {
  CheckLengths(scores.size(), labels.size());
  const ClassTotals totals = CountClasses(labels);
  if (totals.positives == 0 || totals.negatives == 0) {
    throw ValidationError("ROC needs both classes present");
  }
  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  const std::vector<size_t> order = DescendingOrder(scores);
  int64_t tp = 0;
  int64_t fp = 0;
  // Twice the trapezoid area in count units, kept integral.
  int64_t doubled_area = 0;
  for (size_t k = 0; k < order.size();) {
    const double threshold = scores[order[k]];
    const int64_t tp_before = tp;
    const int64_t fp_before = fp;
    while (k < order.size() && scores[order[k]] == threshold) {
      (labels[order[k]] == 1 ? tp : fp)++;
      ++k;
    }
    doubled_area += (fp - fp_before) * (tp + tp_before);
    curve.points.push_back({threshold, Ratio(fp, totals.negatives),
                            Ratio(tp, totals.positives)});
  }
  curve.auc = static_cast<double>(doubled_area) /
              (2.0 * static_cast<double>(totals.positives) *
               static_cast<double>(totals.negatives));
  return curve;
}

PrCurve ComputePr(std::span<const double> scores, std::span<const int> labels) {
  CheckLengths(scores.size(), labels.size());
  const ClassTotals totals = CountClasses(labels);
  if (totals.positives == 0) {
    throw ValidationError("precision-recall curve needs positive labels");
  }
  PrCurve curve;
  const std::vector<size_t> order = DescendingOrder(scores);
  int64_t tp = 0;
  int64_t fp = 0;
  // Sum of (new true positives) * precision, divided by P at the end.
  double weighted = 0.0;
  for (size_t k = 0; k < order.size();) {
    const double threshold = scores[order[k]];
    const int64_t tp_before = tp;
    while (k < order.size() && scores[order[k]] == threshold) {
      (labels[order[k]] == 1 ? tp : fp)++;
      ++k;
    }
    const PrPoint point = {threshold, Ratio(tp, tp + fp),
                           Ratio(tp, totals.positives)};
    weighted += static_cast<double>(tp - tp_before) * point.precision;
    curve.points.push_back(point);
  }
  curve.average_precision =
      weighted / static_cast<double>(totals.positives);
  return curve;
}

}  // namespace guardnet
