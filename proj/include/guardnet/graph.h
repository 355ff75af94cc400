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

#ifndef GUARDNET_GRAPH_H_
#define GUARDNET_GRAPH_H_

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "guardnet/dataset.h"
#include "guardnet/matrix.h"

namespace guardnet {

// Declaration order is dedupe priority: a pair produced by several rules
// keeps the kind listed first.
enum class EdgeKind { kSequential = 0, kDependency = 1, kAttention = 2 };

std::string_view EdgeKindName(EdgeKind kind);
EdgeKind ParseEdgeKind(std::string_view name);

struct Edge {
  int src = 0;
  int dst = 0;
  EdgeKind kind = EdgeKind::kSequential;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct GraphConfig {
  int top_k = 32;
  int window = 512;
  bool symmetrize_attention = true;
  bool symmetrize_dependency = true;

  void Validate() const;
};

// Hybrid token graph. Edges are sorted by (src, dst) with no duplicates and
// no self loops.
struct TokenGraph {
  Matrix node_features;
  std::vector<Edge> edges;

  int num_nodes() const { return static_cast<int>(node_features.rows()); }
  int feature_dim() const { return static_cast<int>(node_features.cols()); }
};

// Elementwise mean over per-head L x L attention maps.
Matrix MeanHeads(std::span<const Matrix> per_head);

// Indices of the k largest entries of `row`, skipping `self_index`, by
// descending value with ties going to the lower index.
std::vector<int> TopkNeighbors(std::span<const double> row, int self_index,
                               int k);

TokenGraph BuildHybridGraph(const EncoderOutput& encoding,
                            const std::optional<std::vector<DependencyArc>>& deps,
                            const GraphConfig& config);

// Debug dump, one "src dst kind" line per edge.
void WriteEdgeList(const TokenGraph& graph, std::ostream& out);

}  // namespace guardnet

#endif  // GUARDNET_GRAPH_H_
