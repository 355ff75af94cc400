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

#ifndef GUARDNET_DETECTORS_H_
#define GUARDNET_DETECTORS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "guardnet/dataset.h"
#include "guardnet/gat.h"
#include "guardnet/graph.h"
#include "guardnet/loss.h"
#include "guardnet/model.h"

namespace guardnet {

struct TrainConfig {
  int epochs_prompt = 10;
  int epochs_token = 10;
  int batch_prompt = 8;
  int batch_token = 2;
  double learning_rate = 1e-3;
  int hidden = 128;
  LossConfig prompt_loss = LossConfig::CrossEntropy();
  LossConfig token_loss = LossConfig::WeightedPreset();
  uint64_t seed = 0;
  int early_stop_patience = 3;
  double val_fraction = 0.2;
  bool tune_thresholds = true;
  // Add an equal number of benign prompts (all-zero labels) to the token
  // detector's training set.
  bool token_benign_negatives = true;
  double dropout = 0.0;
  // Adds a linear skip term to every GAT layer of both detectors.
  bool residual = false;

  void Validate() const;
};

// A record with its hybrid graph, ready for the detectors.
struct GraphSample {
  std::string id;
  std::string domain;
  int prompt_label = 0;
  std::vector<std::string> tokens;
  std::vector<int> token_labels;  // always length L
  TokenGraph graph;
  NeighborIndex neighbors;
};

GraphSample MakeGraphSample(const Example& example, const GraphConfig& config);
std::vector<GraphSample> BuildGraphSamples(std::span<const Example> examples,
                                           const GraphConfig& config);

using SampleRefs = std::vector<const GraphSample*>;

SampleRefs AllRefs(std::span<const GraphSample> samples);

// Stratified by prompt label; at least one member of each class lands on
// each side.
struct SampleSplit {
  SampleRefs train;
  SampleRefs validation;
};
SampleSplit StratifiedSplit(std::span<const GraphSample* const> samples,
                            double validation_fraction, uint64_t seed);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_f1 = 0.0;
  double threshold = 0.5;
};

struct TrainResult {
  DetectorModel model;  // best-epoch parameters with tuned threshold
  std::vector<EpochRecord> history;
  int best_epoch = 0;
};

// Cross-entropy prompt detector with early stopping on validation F1.
TrainResult TrainPrompt(std::span<const GraphSample* const> samples,
                        const TrainConfig& config);

// Focal-loss token detector trained on adversarial prompts (plus sampled
// benign prompts when configured).
TrainResult TrainToken(std::span<const GraphSample* const> samples,
                       const TrainConfig& config);

std::vector<double> PromptScores(const DetectorModel& model,
                                 std::span<const GraphSample* const> samples);
// Per-sample token probabilities.
std::vector<std::vector<double>> TokenScores(
    const DetectorModel& model, std::span<const GraphSample* const> samples);

struct ThresholdChoice {
  double threshold = 0.5;
  double f1 = 0.0;
};

// {0, 1} plus midpoints of consecutive sorted unique scores, ascending.
std::vector<double> ThresholdCandidates(std::span<const double> scores);

// Candidate maximizing F1 of the rule score > threshold; ties go to the
// smallest threshold.
ThresholdChoice TuneThreshold(std::span<const double> scores,
                              std::span<const int> labels);

inline constexpr std::string_view kMaskToken = "[MASK]";

std::vector<std::string> MaskTokens(std::span<const std::string> tokens,
                                    std::span<const int> mask);

struct FilterResult {
  int prompt_decision = 0;
  std::optional<std::vector<int>> mask;
  std::vector<std::string> sanitized_tokens;
  double prompt_score = 0.0;
  std::optional<std::vector<double>> token_scores;
};

// Model evaluations performed by FilterPrompt.
struct FilterCounters {
  int64_t prompt_passes = 0;
  int64_t token_passes = 0;
};

// Two-stage run-time filter: the token detector only runs when the prompt
// score exceeds tau_prompt.
FilterResult FilterPrompt(const DetectorModel& prompt_model,
                          const DetectorModel& token_model,
                          const TokenGraph& graph,
                          const NeighborIndex& neighbors,
                          std::span<const std::string> tokens,
                          double tau_prompt, double tau_token,
                          FilterCounters* counters = nullptr);

}  // namespace guardnet

#endif  // GUARDNET_DETECTORS_H_
