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

#ifndef GUARDNET_MODEL_H_
#define GUARDNET_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "guardnet/gat.h"
#include "guardnet/graph.h"
#include "guardnet/loss.h"
#include "guardnet/matrix.h"
#include "guardnet/random.h"

namespace guardnet {

enum class DetectorLevel { kPrompt, kToken };

std::string_view LevelName(DetectorLevel level);
DetectorLevel ParseLevel(std::string_view name);

// Architecture of a detector. Every layer but the last concatenates its heads
// (per-head width hidden / heads) and applies ELU; the last layer has a
// single head of width `hidden` and no activation.
struct ArchSpec {
  DetectorLevel level = DetectorLevel::kPrompt;
  int input_dim = 0;
  int hidden = 128;
  std::vector<int> heads;
  double negative_slope = 0.2;
  // Linear skip term in every layer (off in the reference architecture).
  bool residual = false;

  // GAT(4) -> GAT(1) -> mean pool -> linear head.
  static ArchSpec Prompt(int input_dim, int hidden = 128);
  // GAT(8) -> GAT(4) -> GAT(1) -> per-node linear head.
  static ArchSpec Token(int input_dim, int hidden = 128);

  void Validate() const;
};

struct DetectorModel {
  DetectorLevel level = DetectorLevel::kPrompt;
  std::vector<GatLayerParams> layers;
  Matrix head_weight;  // 2 x final width
  Vector head_bias;    // 2
  double threshold = 0.5;

  int input_dim() const { return layers.empty() ? 0 : layers.front().in_dim; }
  void Validate() const;
};

DetectorModel InitModel(const ArchSpec& arch, uint64_t seed);

ArchSpec ArchOf(const DetectorModel& model);

// Same shapes, all parameters zero.
DetectorModel ZerosLike(const DetectorModel& model);

// Flat views of every parameter tensor in a fixed order: per layer the head
// weights, attn_src, attn_dst, skip projection; then head_weight and head_bias.
std::vector<std::span<double>> ParameterSpans(DetectorModel& model);
std::vector<std::span<const double>> ParameterSpans(const DetectorModel& model);
size_t ParameterCount(const DetectorModel& model);

// Logits: 1 x 2 for prompt level, L x 2 for token level.
Matrix ModelForward(const DetectorModel& model, const TokenGraph& graph,
                    const NeighborIndex& neighbors);
Matrix ModelForward(const DetectorModel& model, const TokenGraph& graph);

// softmax(row)[1] for each logit row.
std::vector<double> AdversarialProbabilities(const Matrix& logits);

// A graph with its supervision: one prompt label for prompt-level models,
// one label per node for token-level models.
struct LabeledGraph {
  const TokenGraph* graph = nullptr;
  const NeighborIndex* neighbors = nullptr;
  std::span<const int> labels;
};

// Inverted dropout on every layer input; only used during training.
struct DropoutSpec {
  double rate = 0.0;
  Rng* rng = nullptr;
};

// Mean loss over the batch.
double BatchLoss(const DetectorModel& model, std::span<const LabeledGraph> batch,
                 const LossConfig& loss);

// Overwrites `grads` with d(loss_scale * mean batch loss)/d(params) and
// returns the unscaled mean batch loss. Graphs are accumulated in batch
// order.
double ComputeGradients(const DetectorModel& model,
                        std::span<const LabeledGraph> batch,
                        const LossConfig& loss, DetectorModel* grads,
                        double loss_scale = 1.0,
                        const DropoutSpec* dropout = nullptr);

}  // namespace guardnet

#endif  // GUARDNET_MODEL_H_
