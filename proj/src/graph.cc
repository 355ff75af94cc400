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

#include "guardnet/graph.h"

#include <algorithm>
#include <cstdlib>
#include <numeric>

#include "guardnet/errors.h"

namespace guardnet {

std::string_view EdgeKindName(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::kSequential:
      return "sequential";
    case EdgeKind::kDependency:
      return "dependency";
    case EdgeKind::kAttention:
      return "attention";
  }
  return "unknown";
}

EdgeKind ParseEdgeKind(std::string_view name) {
  if (name == "sequential") return EdgeKind::kSequential;
  if (name == "dependency") return EdgeKind::kDependency;
  if (name == "attention") return EdgeKind::kAttention;
  throw ValidationError("unknown edge kind '" + std::string(name) + "'");
}

void GraphConfig::Validate() const {
  if (top_k < 1) throw ValidationError("top_k must be >= 1");
  if (window < 1) throw ValidationError("attention window must be >= 1");
}

Matrix MeanHeads(std::span<const Matrix> per_head) {
  if (per_head.empty()) throw DimensionError("mean_heads: no heads given");
  const Eigen::Index n = per_head.front().rows();
  Matrix mean = Matrix::Zero(n, n);
  for (const Matrix& head : per_head) {
    if (head.rows() != n || head.cols() != n) {
      throw DimensionError("mean_heads: inconsistent head shapes");
    }
    mean += head;
  }
  return mean / static_cast<double>(per_head.size());
}

std::vector<int> TopkNeighbors(std::span<const double> row, int self_index,
                               int k) {
  std::vector<int> order;
  order.reserve(row.size());
  for (int j = 0; j < static_cast<int>(row.size()); ++j) {
    if (j != self_index) order.push_back(j);
  }
  const size_t keep = std::min<size_t>(std::max(k, 0), order.size());
  auto before = [&row](int a, int b) {
    return row[a] > row[b] || (row[a] == row[b] && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + keep, order.end(), before);
  order.resize(keep);
  return order;
}

TokenGraph BuildHybridGraph(const EncoderOutput& encoding,
                            const std::optional<std::vector<DependencyArc>>& deps,
                            const GraphConfig& config) {
  config.Validate();
  const int n = encoding.num_tokens();
  if (encoding.hidden.rows() != n) {
    throw DimensionError("hidden rows do not match token count");
  }
  std::vector<Edge> edges;
  auto add = [&edges](int src, int dst, EdgeKind kind) {
    if (src != dst) edges.push_back({src, dst, kind});
  };
  for (int i = 0; i + 1 < n; ++i) {
    add(i, i + 1, EdgeKind::kSequential);
    add(i + 1, i, EdgeKind::kSequential);
  }

  // Rows are densified one at a time; missing entries read as zero.
  std::vector<std::vector<const AttentionEntry*>> rows(n);
  for (const AttentionEntry& entry : encoding.attention) {
    if (entry.row < 0 || entry.row >= n || entry.col < 0 || entry.col >= n) {
      throw DimensionError("attention index outside the token range");
    }
    rows[entry.row].push_back(&entry);
  }
  std::vector<double> dense(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (const AttentionEntry* entry : rows[i]) dense[entry->col] = entry->value;
    for (int j : TopkNeighbors(dense, i, config.top_k)) {
      if (std::abs(i - j) <= config.window) {
        add(i, j, EdgeKind::kAttention);
        if (config.symmetrize_attention) add(j, i, EdgeKind::kAttention);
      }
    }
    for (const AttentionEntry* entry : rows[i]) dense[entry->col] = 0.0;
  }

  if (deps.has_value()) {
    for (const DependencyArc& arc : *deps) {
      if (arc.head < 0 || arc.head >= n || arc.dependent < 0 ||
          arc.dependent >= n) {
        throw ValidationError("dependency arc (" + std::to_string(arc.head) +
                              ", " + std::to_string(arc.dependent) +
                              ") outside [0, " + std::to_string(n) + ")");
      }
      add(arc.head, arc.dependent, EdgeKind::kDependency);
      if (config.symmetrize_dependency) {
        add(arc.dependent, arc.head, EdgeKind::kDependency);
      }
    }
  }

  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    if (a.src != b.src) return a.src < b.src;
    if (a.dst != b.dst) return a.dst < b.dst;
    return a.kind < b.kind;
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const Edge& a, const Edge& b) {
                            return a.src == b.src && a.dst == b.dst;
                          }),
              edges.end());

  TokenGraph graph;
  graph.node_features = encoding.hidden;
  graph.edges = std::move(edges);
  return graph;
}

void WriteEdgeList(const TokenGraph& graph, std::ostream& out) {
  for (const Edge& edge : graph.edges) {
    out << edge.src << ' ' << edge.dst << ' ' << EdgeKindName(edge.kind)
        << '\n';
  }
}

}  // namespace guardnet
