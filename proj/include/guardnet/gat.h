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

#ifndef GUARDNET_GAT_H_
#define GUARDNET_GAT_H_

#include <span>
#include <vector>

#include "guardnet/graph.h"
#include "guardnet/matrix.h"

namespace guardnet {

// CSR list of the nodes each node aggregates from: the sources of its
// incoming edges plus the node itself, deduplicated and sorted.
class NeighborIndex {
 public:
  NeighborIndex() = default;
  NeighborIndex(int num_nodes, std::span<const Edge> edges);
  explicit NeighborIndex(const TokenGraph& graph)
      : NeighborIndex(graph.num_nodes(), graph.edges) {}

  int num_nodes() const { return static_cast<int>(offsets_.size()) - 1; }
  int num_entries() const { return static_cast<int>(sources_.size()); }
  // Entries [begin(i), end(i)) belong to node i.
  int begin(int node) const { return offsets_[node]; }
  int end(int node) const { return offsets_[node + 1]; }
  int source(int entry) const { return sources_[entry]; }
  std::span<const int> Of(int node) const {
    return {sources_.data() + begin(node), sources_.data() + end(node)};
  }

 private:
  std::vector<int> offsets_ = {0};
  std::vector<int> sources_;
};

// One multi-head graph attention layer. For head h and node i:
//   e_ij  = LeakyReLU(attn_src[h] . z_i + attn_dst[h] . z_j),  z = x W[h]
//   a_ij  = softmax of e_ij over j in NeighborIndex::Of(i)
//   out_i = sum_j a_ij z_j
// Heads are concatenated or averaged, an optional linear skip term x R is
// added, then ELU is optionally applied.
struct GatLayerParams {
  int heads = 1;
  int in_dim = 0;
  int out_dim = 0;  // per head
  std::vector<Matrix> weight;  // heads x (in_dim x out_dim)
  Matrix attn_src;             // heads x out_dim, scores the aggregating node
  Matrix attn_dst;             // heads x out_dim, scores the neighbour
  // in_dim x output_width when present; empty disables the skip term.
  Matrix residual;
  double negative_slope = 0.2;
  bool concat_heads = true;
  bool elu = true;

  int output_width() const { return concat_heads ? heads * out_dim : out_dim; }
  bool has_residual() const { return residual.size() > 0; }
  void Validate() const;
};

GatLayerParams ZerosLike(const GatLayerParams& params);

// Intermediates kept by the forward pass for backpropagation.
struct GatLayerCache {
  Matrix input;
  std::vector<Matrix> projected;         // per head, L x out_dim
  std::vector<std::vector<double>> logit;  // per head, pre-LeakyReLU, CSR order
  std::vector<std::vector<double>> alpha;  // per head, CSR order
  Matrix combined;                       // before ELU
};

Matrix GatLayerForward(const GatLayerParams& params, const Matrix& features,
                       const NeighborIndex& neighbors,
                       GatLayerCache* cache = nullptr);

Matrix GatLayerForward(const GatLayerParams& params, const Matrix& features,
                       std::span<const Edge> edges);

// Accumulates parameter gradients into `grads` and returns the gradient with
// respect to the layer input.
Matrix GatLayerBackward(const GatLayerParams& params,
                        const NeighborIndex& neighbors,
                        const GatLayerCache& cache, const Matrix& grad_output,
                        GatLayerParams* grads);

}  // namespace guardnet

#endif  // GUARDNET_GAT_H_
