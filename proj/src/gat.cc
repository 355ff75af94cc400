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

#include "guardnet/gat.h"

#include <algorithm>
#include <cmath>

#include "guardnet/errors.h"

namespace guardnet {

NeighborIndex::NeighborIndex(int num_nodes, std::span<const Edge> edges) {
  std::vector<std::vector<int>> incoming(num_nodes);
  for (int i = 0; i < num_nodes; ++i) incoming[i].push_back(i);
  for (const Edge& edge : edges) {
    if (edge.src < 0 || edge.src >= num_nodes || edge.dst < 0 ||
        edge.dst >= num_nodes) {
      throw DimensionError("edge (" + std::to_string(edge.src) + ", " +
                           std::to_string(edge.dst) + ") outside " +
                           std::to_string(num_nodes) + " nodes");
    }
    incoming[edge.dst].push_back(edge.src);
  }
  offsets_.assign(1, 0);
  offsets_.reserve(num_nodes + 1);
  for (auto& sources : incoming) {
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    sources_.insert(sources_.end(), sources.begin(), sources.end());
    offsets_.push_back(static_cast<int>(sources_.size()));
  }
}

void GatLayerParams::Validate() const {
  if (heads < 1 || in_dim < 1 || out_dim < 1) {
    throw DimensionError("GAT layer needs positive heads and widths");
  }
  if (static_cast<int>(weight.size()) != heads) {
    throw DimensionError("GAT layer weight count differs from head count");
  }
  for (const Matrix& w : weight) {
    if (w.rows() != in_dim || w.cols() != out_dim) {
      throw DimensionError("GAT layer weight shape mismatch");
    }
  }
  if (attn_src.rows() != heads || attn_src.cols() != out_dim ||
      attn_dst.rows() != heads || attn_dst.cols() != out_dim) {
    throw DimensionError("GAT layer attention vector shape mismatch");
  }
  if (has_residual() &&
      (residual.rows() != in_dim || residual.cols() != output_width())) {
    throw DimensionError("GAT layer skip projection shape mismatch");
  }
}

GatLayerParams ZerosLike(const GatLayerParams& params) {
  GatLayerParams zeros = params;
  for (Matrix& w : zeros.weight) w.setZero();
  zeros.attn_src.setZero();
  zeros.attn_dst.setZero();
  zeros.residual.setZero();
  return zeros;
}

Matrix GatLayerForward(const GatLayerParams& params, const Matrix& features,
                       const NeighborIndex& neighbors, GatLayerCache* cache) {
  if (features.cols() != params.in_dim) {
    throw DimensionError("GAT layer expects width " +
                         std::to_string(params.in_dim) + ", got " +
                         std::to_string(features.cols()));
  }
  if (features.rows() != neighbors.num_nodes()) {
    throw DimensionError("feature rows differ from graph node count");
  }
  const int n = static_cast<int>(features.rows());
  const int width = params.out_dim;
  const double slope = params.negative_slope;
  Matrix combined = Matrix::Zero(n, params.output_width());
  if (cache != nullptr) {
    cache->input = features;
    cache->projected.assign(params.heads, Matrix());
    cache->logit.assign(params.heads, {});
    cache->alpha.assign(params.heads, {});
  }
  std::vector<double> logit(neighbors.num_entries());
  std::vector<double> alpha(neighbors.num_entries());
  for (int h = 0; h < params.heads; ++h) {
    Matrix projected = features * params.weight[h];
    const Vector self_score = projected * params.attn_src.row(h).transpose();
    const Vector neighbor_score =
        projected * params.attn_dst.row(h).transpose();
    Matrix aggregated = Matrix::Zero(n, width);
    for (int i = 0; i < n; ++i) {
      double peak = -INFINITY;
      for (int e = neighbors.begin(i); e < neighbors.end(i); ++e) {
        const double raw = self_score[i] + neighbor_score[neighbors.source(e)];
        logit[e] = raw;
        const double activated = raw > 0.0 ? raw : slope * raw;
        alpha[e] = activated;
        peak = std::max(peak, activated);
      }
      double total = 0.0;
      for (int e = neighbors.begin(i); e < neighbors.end(i); ++e) {
        alpha[e] = std::exp(alpha[e] - peak);
        total += alpha[e];
      }
      for (int e = neighbors.begin(i); e < neighbors.end(i); ++e) {
        alpha[e] /= total;
        aggregated.row(i) += alpha[e] * projected.row(neighbors.source(e));
      }
    }
    if (params.concat_heads) {
      combined.middleCols(h * width, width) = aggregated;
    } else {
      combined += aggregated / static_cast<double>(params.heads);
    }
    if (cache != nullptr) {
      cache->projected[h] = std::move(projected);
      cache->logit[h] = logit;
      cache->alpha[h] = alpha;
    }
  }
  if (params.has_residual()) combined += features * params.residual;
  if (cache != nullptr) cache->combined = combined;
  if (params.elu) {
    combined = combined.unaryExpr(
        [](double x) { return x > 0.0 ? x : std::expm1(x); });
  }
  return combined;
}

Matrix GatLayerForward(const GatLayerParams& params, const Matrix& features,
                       std::span<const Edge> edges) {
  return GatLayerForward(
      params, features,
      NeighborIndex(static_cast<int>(features.rows()), edges));
}

Matrix GatLayerBackward(const GatLayerParams& params,
                        const NeighborIndex& neighbors,
                        const GatLayerCache& cache, const Matrix& grad_output,
                        GatLayerParams* grads) {
  const int n = static_cast<int>(cache.input.rows());
  const int width = params.out_dim;
  const double slope = params.negative_slope;
  Matrix grad_combined = grad_output;
  if (params.elu) {
    grad_combined.array() *= cache.combined.unaryExpr([](double x) {
      return x > 0.0 ? 1.0 : std::exp(x);
    }).array();
  }
  Matrix grad_input = Matrix::Zero(n, params.in_dim);
  if (params.has_residual()) {
    grads->residual += cache.input.transpose() * grad_combined;
    grad_input += grad_combined * params.residual.transpose();
  }
  std::vector<double> grad_alpha;
  for (int h = 0; h < params.heads; ++h) {
    const Matrix& projected = cache.projected[h];
    const std::vector<double>& alpha = cache.alpha[h];
    const std::vector<double>& logit = cache.logit[h];
    const Matrix grad_aggregated =
        params.concat_heads
            ? Matrix(grad_combined.middleCols(h * width, width))
            : Matrix(grad_combined / static_cast<double>(params.heads));
    Matrix grad_projected = Matrix::Zero(n, width);
    Vector grad_self = Vector::Zero(n);
    Vector grad_neighbor = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      const int begin = neighbors.begin(i);
      const int end = neighbors.end(i);
      grad_alpha.assign(end - begin, 0.0);
      double weighted = 0.0;
      for (int e = begin; e < end; ++e) {
        const int j = neighbors.source(e);
        grad_alpha[e - begin] = grad_aggregated.row(i).dot(projected.row(j));
        weighted += alpha[e] * grad_alpha[e - begin];
        grad_projected.row(j) += alpha[e] * grad_aggregated.row(i);
      }
      for (int e = begin; e < end; ++e) {
        const double grad_activated =
            alpha[e] * (grad_alpha[e - begin] - weighted);
        const double grad_logit =
            grad_activated * (logit[e] > 0.0 ? 1.0 : slope);
        grad_self[i] += grad_logit;
        grad_neighbor[neighbors.source(e)] += grad_logit;
      }
    }
    grad_projected += grad_self * params.attn_src.row(h);
    grad_projected += grad_neighbor * params.attn_dst.row(h);
    grads->attn_src.row(h) += grad_self.transpose() * projected;
    grads->attn_dst.row(h) += grad_neighbor.transpose() * projected;
    grads->weight[h] += cache.input.transpose() * grad_projected;
    grad_input += grad_projected * params.weight[h].transpose();
  }
  return grad_input;
}

}  // namespace guardnet
