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

#ifndef GUARDNET_METRICS_H_
#define GUARDNET_METRICS_H_

#include <cstdint>
#include <span>
#include <vector>

namespace guardnet {

struct ConfusionCounts {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t tn = 0;
  int64_t fn = 0;

  int64_t total() const { return tp + fp + tn + fn; }
};

ConfusionCounts CountConfusion(std::span<const int> predictions,
                               std::span<const int> labels);

// Ratios with a zero denominator are reported as 0.
struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct TokenLevelMetrics : ClassificationMetrics {
  // |pred & truth| / |pred | truth| over positive indices; 1 when both sets
  // are empty.
  double iou = 0.0;
};

ClassificationMetrics MetricsFromCounts(const ConfusionCounts& counts);
double IouFromCounts(const ConfusionCounts& counts);

ClassificationMetrics PromptMetrics(std::span<const int> predictions,
                                    std::span<const int> labels);
TokenLevelMetrics TokenMetrics(std::span<const int> predicted_mask,
                               std::span<const int> label_mask);

// 1 where score > threshold.
std::vector<int> ApplyThreshold(std::span<const double> scores,
                                double threshold);

struct RocPoint {
  double threshold;  // +inf for the origin point
  double fpr;
  double tpr;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

// Sweeps thresholds over the sorted unique scores (score >= threshold is
// positive), starting from the origin; AUC by the trapezoidal rule.
RocCurve ComputeRoc(std::span<const double> scores,
                    std::span<const int> labels);

struct PrPoint {
  double threshold;
  double precision;
  double recall;
};

struct PrCurve {
  std::vector<PrPoint> points;
  double average_precision = 0.0;
};

// Step-wise average precision: sum over thresholds of
// (recall_n - recall_{n-1}) * precision_n.
PrCurve ComputePr(std::span<const double> scores, std::span<const int> labels);

}  // namespace guardnet

#endif  // GUARDNET_METRICS_H_
