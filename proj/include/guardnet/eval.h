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

#ifndef GUARDNET_EVAL_H_
#define GUARDNET_EVAL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "guardnet/detectors.h"
#include "guardnet/graph.h"
#include "guardnet/metrics.h"
#include "guardnet/model.h"

namespace guardnet {

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

Summary Summarize(std::span<const double> values);

// Metrics of one evaluation (a test fold, or a target-domain pass).
struct FoldMetrics {
  int fold = 0;
  int64_t population = 0;  // prompts or tokens scored
  double threshold = 0.5;
  TokenLevelMetrics metrics;  // iou unused at prompt level
  std::optional<double> auc;
  std::optional<double> ap;
};

struct EvalReport {
  DetectorLevel level = DetectorLevel::kPrompt;
  std::vector<FoldMetrics> folds;
  // acc, precision, recall, f1 (+ iou at token level), auc, ap.
  std::map<std::string, Summary> aggregate;
  // Pooled over every evaluation in the run.
  std::optional<RocCurve> roc;
  std::optional<PrCurve> pr;
};

// Scores plus ground truth for one level of one evaluation.
struct ScoredSet {
  std::vector<double> scores;
  std::vector<int> labels;
};

// Shared by internal detectors and external score files.
FoldMetrics EvaluateScores(const ScoredSet& set, double threshold,
                           DetectorLevel level, int fold);

// Fills aggregate and pooled curves from per-fold metrics and scores.
EvalReport BuildReport(DetectorLevel level, std::vector<FoldMetrics> folds,
                       std::span<const ScoredSet> pooled);

struct EvalOptions {
  int folds = 5;
  uint64_t seed = 0;
  int jobs = 1;
  TrainConfig train;
};

struct FoldTraining {
  int fold = 0;
  uint64_t seed = 0;
  std::vector<EpochRecord> prompt_history;
  std::vector<EpochRecord> token_history;
  double tau_prompt = 0.5;
  double tau_token = 0.5;
};

struct EvalOutcome {
  std::string mode;  // "cv" or "transfer"
  EvalReport prompt;
  EvalReport token;
  std::vector<FoldTraining> training;
  // Record id -> fold that evaluated it (cv mode).
  std::map<std::string, int> evaluated_in;
};

// Token-level ground truth and scores are taken over the adversarial prompts
// of the evaluated set.
ScoredSet PromptLevelSet(const DetectorModel& model,
                         std::span<const GraphSample* const> samples);
ScoredSet TokenLevelSet(const DetectorModel& model,
                        std::span<const GraphSample* const> samples);

EvalOutcome RunCrossval(std::span<const GraphSample> dataset,
                        const EvalOptions& options);

// Trains on the source with the k-fold protocol and evaluates every fold's
// models, with source-tuned thresholds, on the full target set.
EvalOutcome RunCrossDomain(std::span<const GraphSample> source,
                           std::span<const GraphSample> target,
                           const EvalOptions& options);

struct StageTiming {
  int64_t count = 0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double std_ms = 0.0;
};

struct LatencyReport {
  StageTiming graph_build;
  StageTiming prompt_pass;
  StageTiming token_pass;
  StageTiming end_to_end;
  std::optional<double> budget_ms;
  bool over_budget = false;
};

// Wall-clock timing of each pipeline stage over `repetitions` warm passes of
// the dataset.
LatencyReport MeasureLatency(const DetectorModel& prompt_model,
                             const DetectorModel& token_model,
                             std::span<const Example> examples,
                             const GraphConfig& graph_config, int repetitions,
                             std::optional<double> budget_ms = std::nullopt);

// Record id -> scores ("id score" or "id s1 ... sL" per line).
using ExternalScores = std::map<std::string, std::vector<double>>;

ExternalScores ParseExternalScores(std::istream& in);
ExternalScores IngestExternalScores(const std::string& path);

// Aligns external scores with the dataset; throws on a missing id or, at
// token level, a score list whose length differs from the token count.
ScoredSet ExternalScoredSet(const ExternalScores& scores,
                            std::span<const GraphSample* const> samples,
                            DetectorLevel level);

// A comparison row for the report tables (e.g. a baseline system).
struct SystemRow {
  std::string system;
  std::string dataset;
  EvalReport report;
};

struct ReportHeader {
  std::string mode;
  std::string system = "GuardNet";
  std::string dataset;
  std::string target;
  GraphConfig graph;
  EvalOptions options;
};

// JSON Lines report: run header, per-fold rows, aggregates, table rows and
// per-fold thresholds. Levels without folds are omitted.
void WriteReport(const ReportHeader& header, const EvalOutcome& outcome,
                 std::span<const SystemRow> extra_rows, std::ostream& out);

void WriteRocFile(const RocCurve& curve, std::ostream& out);
void WritePrFile(const PrCurve& curve, std::ostream& out);

// Minimal line plot of a curve for quick inspection.
std::string RenderCurveSvg(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           std::span<const std::pair<double, double>> points);

std::string FormatLatency(const LatencyReport& report);

std::string FormatTrainingLog(std::span<const EpochRecord> history,
                              std::string_view detector, int fold);

}  // namespace guardnet

#endif  // GUARDNET_EVAL_H_
