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

#ifndef GUARDNET_TESTS_TEST_UTIL_H_
#define GUARDNET_TESTS_TEST_UTIL_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "guardnet/dataset.h"
#include "guardnet/gat.h"
#include "guardnet/graph.h"
#include "guardnet/loss.h"
#include "guardnet/model.h"
#include "guardnet/random.h"

namespace guardnet::testing {

// Hidden states in [-1, 1]. Attention rows are stochastic; with `sparse`
// some entries are left out, with `ties` values are drawn from a few levels.
EncoderOutput RandomEncoding(Rng& rng, int num_tokens, int dim, bool sparse,
                             bool ties);

std::vector<DependencyArc> RandomArcs(Rng& rng, int num_tokens, int count);

// Random directed edges without self loops.
std::vector<Edge> RandomEdges(Rng& rng, int num_nodes, double density);

TokenGraph RandomGraph(Rng& rng, int num_nodes, int dim, double density);

std::vector<int> RandomLabels(Rng& rng, int count, double positive_rate);

// Glorot init from `seed`, then every parameter (including the head bias)
// perturbed so no entry is exactly zero.
DetectorModel RandomModel(DetectorLevel level, int input_dim, int hidden,
                          uint64_t seed, bool residual = false);

// Every ordered pair tested against the sequential, top-k attention and
// dependency rules; ranks computed by counting, duplicates resolved by kind
// priority sequential > dependency > attention.
std::vector<Edge> BruteForceEdges(const EncoderOutput& encoding,
                                  const std::optional<std::vector<DependencyArc>>& deps,
                                  const GraphConfig& config);

// Materializes the full attention matrix per head.
Matrix DenseGatLayer(const GatLayerParams& params, const Matrix& features,
                     std::span<const Edge> edges);

Matrix DenseModelForward(const DetectorModel& model, const TokenGraph& graph);

// Fraction of (positive, negative) pairs ranked correctly, ties count 1/2.
double PairwiseAuc(std::span<const double> scores, std::span<const int> labels);

struct GradCheckResult {
  double max_relative_error = 0.0;
  int checked = 0;
  int skipped = 0;  // perturbations that moved an attention logit across 0
};

// Central differences on BatchLoss against ComputeGradients. The relative
// error is |a - n| / max(|a|, |n|, floor).
GradCheckResult CheckGradients(const DetectorModel& model,
                               std::span<const LabeledGraph> batch,
                               const LossConfig& loss, double epsilon = 1e-5,
                               double floor = 1e-6);

// Fresh directory under the system temp dir.
std::string TempDir(const std::string& tag);

}  // namespace guardnet::testing

#endif  // GUARDNET_TESTS_TEST_UTIL_H_
