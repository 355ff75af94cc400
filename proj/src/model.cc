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

#include "guardnet/model.h"

#include <cmath>
#include <string>

#include "guardnet/errors.h"

namespace guardnet {
namespace {

void GlorotFill(Matrix& m, int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = rng.Uniform(-bound, bound);
  }
}

struct ForwardTrace {
  std::vector<GatLayerCache> layers;
  std::vector<Matrix> dropout_masks;  // empty when dropout is off
  Matrix final_features;
  Eigen::RowVectorXd pooled;
};

Matrix Forward(const DetectorModel& model, const TokenGraph& graph,
               const NeighborIndex& neighbors, ForwardTrace* trace,
               const DropoutSpec* dropout) {
  if (graph.feature_dim() != model.input_dim()) {
    throw DimensionError("graph feature width " +
                         std::to_string(graph.feature_dim()) +
                         " differs from model input width " +
                         std::to_string(model.input_dim()));
  }
  if (graph.num_nodes() < 1) throw DimensionError("graph has no nodes");
  const bool use_dropout =
      dropout != nullptr && dropout->rate > 0.0 && dropout->rng != nullptr;
  if (trace != nullptr) {
    trace->layers.assign(model.layers.size(), GatLayerCache());
    trace->dropout_masks.clear();
  }
  Matrix features = graph.node_features;
  for (size_t l = 0; l < model.layers.size(); ++l) {
    if (use_dropout) {
      const double keep = 1.0 - dropout->rate;
      Matrix mask(features.rows(), features.cols());
      for (Eigen::Index i = 0; i < mask.size(); ++i) {
        mask.data()[i] = dropout->rng->Uniform() < keep ? 1.0 / keep : 0.0;
      }
      features = features.cwiseProduct(mask);
      if (trace != nullptr) trace->dropout_masks.push_back(std::move(mask));
    }
    features = GatLayerForward(model.layers[l], features, neighbors,
                               trace != nullptr ? &trace->layers[l] : nullptr);
  }
  Matrix logits;
  if (model.level == DetectorLevel::kPrompt) {
    const Eigen::RowVectorXd pooled = features.colwise().mean();
    logits = Matrix(1, 2);
    logits.row(0) =
        pooled * model.head_weight.transpose() + model.head_bias.transpose();
    if (trace != nullptr) trace->pooled = pooled;
  } else {
    logits = features * model.head_weight.transpose();
    logits.rowwise() += model.head_bias.transpose();
  }
  if (trace != nullptr) trace->final_features = std::move(features);
  if (!logits.allFinite()) throw NumericError("non-finite logits");
  return logits;
}

void Backward(const DetectorModel& model, const NeighborIndex& neighbors,
              const ForwardTrace& trace, const Matrix& grad_logits,
              DetectorModel* grads) {
  const Eigen::Index n = trace.final_features.rows();
  Matrix grad_features;
  if (model.level == DetectorLevel::kPrompt) {
    grads->head_weight += grad_logits.transpose() * trace.pooled;
    grads->head_bias += grad_logits.row(0).transpose();
    const Eigen::RowVectorXd grad_pooled = grad_logits * model.head_weight;
    grad_features = grad_pooled.replicate(n, 1) / static_cast<double>(n);
  } else {
    grads->head_weight += grad_logits.transpose() * trace.final_features;
    grads->head_bias += grad_logits.colwise().sum().transpose();
    grad_features = grad_logits * model.head_weight;
  }
  for (size_t l = model.layers.size(); l-- > 0;) {
    grad_features = GatLayerBackward(model.layers[l], neighbors,
                                     trace.layers[l], grad_features,
                                     &grads->layers[l]);
    if (!trace.dropout_masks.empty()) {
      grad_features = grad_features.cwiseProduct(trace.dropout_masks[l]);
    }
  }
}

}  // namespace

std::string_view LevelName(DetectorLevel level) {
  return level == DetectorLevel::kPrompt ? "prompt" : "token";
}

DetectorLevel ParseLevel(std::string_view name) {
  if (name == "prompt") return DetectorLevel::kPrompt;
  if (name == "token") return DetectorLevel::kToken;
  throw ValidationError("unknown detector level '" + std::string(name) + "'");
}

ArchSpec ArchSpec::Prompt(int input_dim, int hidden) {
  return {DetectorLevel::kPrompt, input_dim, hidden, {4, 1}, 0.2, false};
}

ArchSpec ArchSpec::Token(int input_dim, int hidden) {
  return {DetectorLevel::kToken, input_dim, hidden, {8, 4, 1}, 0.2, false};
}

void ArchSpec::Validate() const {
  if (input_dim < 1) throw DimensionError("input width must be positive");
  if (hidden < 1) throw DimensionError("hidden width must be positive");
  if (heads.empty()) throw DimensionError("at least one GAT layer required");
  for (size_t l = 0; l < heads.size(); ++l) {
    if (heads[l] < 1) throw DimensionError("head counts must be positive");
    if (l + 1 < heads.size() && hidden % heads[l] != 0) {
      throw DimensionError("hidden width " + std::to_string(hidden) +
                           " not divisible by " + std::to_string(heads[l]) +
                           " heads");
    }
  }
}

void DetectorModel::Validate() const {
  if (layers.empty()) throw DimensionError("model has no layers");
  for (size_t l = 0; l < layers.size(); ++l) {
    layers[l].Validate();
    if (l > 0 && layers[l].in_dim != layers[l - 1].output_width()) {
      throw DimensionError("layer " + std::to_string(l) +
                           " input width does not match the previous layer");
    }
  }
  if (head_weight.rows() != 2 ||
      head_weight.cols() != layers.back().output_width()) {
    throw DimensionError("classification head shape mismatch");
  }
  if (head_bias.size() != 2) throw DimensionError("head bias must have 2 entries");
}

DetectorModel InitModel(const ArchSpec& arch, uint64_t seed) {
  arch.Validate();
  Rng rng(seed);
  DetectorModel model;
  model.level = arch.level;
  int in_dim = arch.input_dim;
  for (size_t l = 0; l < arch.heads.size(); ++l) {
    const bool last = l + 1 == arch.heads.size();
    GatLayerParams layer;
    layer.heads = arch.heads[l];
    layer.in_dim = in_dim;
    layer.out_dim = last ? arch.hidden : arch.hidden / arch.heads[l];
    layer.negative_slope = arch.negative_slope;
    layer.concat_heads = !last;
    layer.elu = !last;
    for (int h = 0; h < layer.heads; ++h) {
      Matrix w(layer.in_dim, layer.out_dim);
      GlorotFill(w, layer.in_dim, layer.out_dim, rng);
      layer.weight.push_back(std::move(w));
    }
    layer.attn_src.resize(layer.heads, layer.out_dim);
    layer.attn_dst.resize(layer.heads, layer.out_dim);
    GlorotFill(layer.attn_src, layer.out_dim, 1, rng);
    GlorotFill(layer.attn_dst, layer.out_dim, 1, rng);
    if (arch.residual) {
      layer.residual.resize(layer.in_dim, layer.output_width());
      GlorotFill(layer.residual, layer.in_dim, layer.output_width(), rng);
    }
    in_dim = layer.output_width();
    model.layers.push_back(std::move(layer));
  }
  model.head_weight.resize(2, in_dim);
  GlorotFill(model.head_weight, in_dim, 2, rng);
  model.head_bias = Vector::Zero(2);
  return model;
}

ArchSpec ArchOf(const DetectorModel& model) {
  ArchSpec arch;
  arch.level = model.level;
  arch.input_dim = model.input_dim();
  arch.hidden = model.layers.empty() ? 0 : model.layers.back().output_width();
  for (const GatLayerParams& layer : model.layers) arch.heads.push_back(layer.heads);
  if (!model.layers.empty()) {
    arch.negative_slope = model.layers[0].negative_slope;
    arch.residual = model.layers[0].has_residual();
  }
  return arch;
}

DetectorModel ZerosLike(const DetectorModel& model) {
  DetectorModel zeros = model;
  for (GatLayerParams& layer : zeros.layers) layer = ZerosLike(layer);
  zeros.head_weight.setZero();
  zeros.head_bias.setZero();
  return zeros;
}

std::vector<std::span<double>> ParameterSpans(DetectorModel& model) {
  std::vector<std::span<double>> spans;
  auto add = [&spans](auto& m) {
    spans.emplace_back(m.data(), static_cast<size_t>(m.size()));
  };
  for (GatLayerParams& layer : model.layers) {
    for (Matrix& w : layer.weight) add(w);
    add(layer.attn_src);
    add(layer.attn_dst);
    if (layer.has_residual()) add(layer.residual);
  }
  add(model.head_weight);
  add(model.head_bias);
  return spans;
}

std::vector<std::span<const double>> ParameterSpans(const DetectorModel& model) {
  std::vector<std::span<const double>> spans;
  for (std::span<double> s : ParameterSpans(const_cast<DetectorModel&>(model))) {
    spans.emplace_back(s.data(), s.size());
  }
  return spans;
}

size_t ParameterCount(const DetectorModel& model) {
  size_t count = 0;
  for (auto s : ParameterSpans(model)) count += s.size();
  return count;
}

Matrix ModelForward(const DetectorModel& model, const TokenGraph& graph,
                    const NeighborIndex& neighbors) {
  return Forward(model, graph, neighbors, nullptr, nullptr);
}

Matrix ModelForward(const DetectorModel& model, const TokenGraph& graph) {
  return ModelForward(model, graph, NeighborIndex(graph));
}

std::vector<double> AdversarialProbabilities(const Matrix& logits) {
  std::vector<double> probs(logits.rows());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    probs[r] = Softmax2({logits(r, 0), logits(r, 1)})[1];
  }
  return probs;
}

double BatchLoss(const DetectorModel& model, std::span<const LabeledGraph> batch,
                 const LossConfig& loss) {
  if (batch.empty()) throw ValidationError("empty batch");
  double total = 0.0;
  for (const LabeledGraph& item : batch) {
    const Matrix logits = Forward(model, *item.graph, *item.neighbors, nullptr,
                                  nullptr);
    total += LogitLoss(logits, item.labels, loss);
  }
  return total / static_cast<double>(batch.size());
}

double ComputeGradients(const DetectorModel& model,
                        std::span<const LabeledGraph> batch,
                        const LossConfig& loss, DetectorModel* grads,
                        double loss_scale, const DropoutSpec* dropout) {
  if (batch.empty()) throw ValidationError("empty batch");
  *grads = ZerosLike(model);
  const double scale = loss_scale / static_cast<double>(batch.size());
  double total = 0.0;
  ForwardTrace trace;
  Matrix grad_logits;
  for (const LabeledGraph& item : batch) {
    const Matrix logits =
        Forward(model, *item.graph, *item.neighbors, &trace, dropout);
    total += LogitLoss(logits, item.labels, loss, &grad_logits);
    grad_logits *= scale;
    Backward(model, *item.neighbors, trace, grad_logits, grads);
  }
  return total / static_cast<double>(batch.size());
}

}  // namespace guardnet
