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

#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "guardnet/errors.h"
#include "guardnet/gat.h"
#include "guardnet/model.h"
#include "guardnet/random.h"
#include "test_util.h"

namespace guardnet {
namespace {

GatLayerParams RandomLayer(Rng& rng, int heads, int in_dim, int out_dim,
                           bool concat, bool elu) {
  GatLayerParams p;
  p.heads = heads;
  p.in_dim = in_dim;
  p.out_dim = out_dim;
  p.concat_heads = concat;
  p.elu = elu;
  for (int h = 0; h < heads; ++h) {
    Matrix w(in_dim, out_dim);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = rng.Uniform(-1, 1);
    p.weight.push_back(w);
  }
  p.attn_src.resize(heads, out_dim);
  p.attn_dst.resize(heads, out_dim);
  for (Eigen::Index k = 0; k < p.attn_src.size(); ++k) {
    p.attn_src.data()[k] = rng.Uniform(-1, 1);
    p.attn_dst.data()[k] = rng.Uniform(-1, 1);
  }
  return p;
}

TEST(GatLayer, SingleIsolatedNodeIsIdentity) {
  GatLayerParams p;
  p.in_dim = p.out_dim = 3;
  p.weight = {Matrix::Identity(3, 3)};
  p.attn_src = Matrix::Constant(1, 3, 0.7);
  p.attn_dst = Matrix::Constant(1, 3, -0.2);
  Matrix h(1, 3);
  h << 0.5, 0.0, 2.0;
  EXPECT_EQ(GatLayerForward(p, h, std::vector<Edge>{}), h);
}

TEST(GatLayer, MatchesDenseOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const bool concat = trial % 2 == 0;
    GatLayerParams p = RandomLayer(rng, 2, 4, 3, concat, concat);
    if (trial % 3 == 0) {
      p.residual.resize(4, p.output_width());
      for (Eigen::Index k = 0; k < p.residual.size(); ++k) {
        p.residual.data()[k] = rng.Uniform(-1, 1);
      }
    }
    const TokenGraph g = testing::RandomGraph(rng, 5, 4, 0.4);
    const Matrix fast = GatLayerForward(p, g.node_features, g.edges);
    const Matrix dense = testing::DenseGatLayer(p, g.node_features, g.edges);
    EXPECT_LT((fast - dense).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GatLayer, AttentionSumsToOne) {
  Rng rng(5);
  const GatLayerParams p = RandomLayer(rng, 3, 4, 2, true, true);
  const TokenGraph g = testing::RandomGraph(rng, 9, 4, 0.3);
  const NeighborIndex index(g);
  GatLayerCache cache;
  GatLayerForward(p, g.node_features, index, &cache);
  for (const auto& alpha : cache.alpha) {
    for (int i = 0; i < index.num_nodes(); ++i) {
      double total = 0.0;
      for (int e = index.begin(i); e < index.end(i); ++e) total += alpha[e];
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(GatLayer, PermutationEquivariant) {
  Rng rng(6);
  const GatLayerParams p = RandomLayer(rng, 2, 3, 4, true, true);
  const TokenGraph g = testing::RandomGraph(rng, 7, 3, 0.35);
  std::vector<int> perm(7);
  std::iota(perm.begin(), perm.end(), 0);
  rng.Shuffle(std::span<int>(perm));
  Matrix permuted(7, 3);
  for (int i = 0; i < 7; ++i) permuted.row(perm[i]) = g.node_features.row(i);
  std::vector<Edge> edges;
  for (const Edge& e : g.edges) edges.push_back({perm[e.src], perm[e.dst], e.kind});
  const Matrix out = GatLayerForward(p, g.node_features, g.edges);
  const Matrix out_permuted = GatLayerForward(p, permuted, edges);
  for (int i = 0; i < 7; ++i) {
    EXPECT_LT((out.row(i) - out_permuted.row(perm[i])).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GatLayer, RejectsBadShapes) {
  Rng rng(7);
  const GatLayerParams p = RandomLayer(rng, 1, 3, 2, false, false);
  EXPECT_THROW(GatLayerForward(p, Matrix::Zero(2, 4), std::vector<Edge>{}), DimensionError);
  EXPECT_THROW(GatLayerForward(p, Matrix::Zero(2, 3), std::vector<Edge>{{0, 5}}),
               DimensionError);
  GatLayerParams broken = p;
  broken.attn_dst.resize(1, 5);
  EXPECT_THROW(broken.Validate(), DimensionError);
}

TEST(NeighborIndex, IncludesSelfAndDedupes) {
  const std::vector<Edge> edges = {{1, 0}, {1, 0, EdgeKind::kAttention}, {2, 0}};
  const NeighborIndex index(3, edges);
  EXPECT_EQ(std::vector<int>(index.Of(0).begin(), index.Of(0).end()),
            (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(index.Of(1).size(), 1u);
}

TEST(Model, ArchitecturesAndInit) {
  const DetectorModel prompt = InitModel(ArchSpec::Prompt(32), 1);
  ASSERT_EQ(prompt.layers.size(), 2u);
  EXPECT_EQ(prompt.layers[0].heads, 4);
  EXPECT_EQ(prompt.layers[0].output_width(), 128);
  EXPECT_EQ(prompt.layers[1].heads, 1);
  EXPECT_EQ(prompt.layers[1].output_width(), 128);
  const DetectorModel token = InitModel(ArchSpec::Token(32), 1);
  ASSERT_EQ(token.layers.size(), 3u);
  EXPECT_EQ(token.layers[0].heads, 8);
  EXPECT_EQ(token.layers[1].heads, 4);
  EXPECT_EQ(token.layers[2].heads, 1);
  EXPECT_FALSE(token.layers[2].elu);
  EXPECT_TRUE(token.layers[0].elu);
  EXPECT_EQ(ArchSpec::Token(8).hidden, 128);

  const DetectorModel again = InitModel(ArchSpec::Token(32), 1);
  const auto a = ParameterSpans(token);
  const auto b = ParameterSpans(again);
  for (size_t s = 0; s < a.size(); ++s) {
    EXPECT_TRUE(std::equal(a[s].begin(), a[s].end(), b[s].begin()));
  }
  for (const GatLayerParams& layer : token.layers) {
    const double bound = std::sqrt(6.0 / (layer.in_dim + layer.out_dim));
    for (const Matrix& w : layer.weight) {
      EXPECT_LE(w.cwiseAbs().maxCoeff(), bound);
    }
  }
  EXPECT_EQ(token.head_bias, Vector::Zero(2));
  EXPECT_THROW(InitModel(ArchSpec::Token(32, 12), 1), DimensionError);
}

TEST(Model, ZeroHeadGivesBias) {
  Rng rng(3);
  DetectorModel model = testing::RandomModel(DetectorLevel::kToken, 4, 8, 5);
  model.head_weight.setZero();
  model.head_bias << 0.3, -0.3;
  const TokenGraph g = testing::RandomGraph(rng, 6, 4, 0.3);
  const Matrix logits = ModelForward(model, g);
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(logits(i, 0), 0.3);
    EXPECT_EQ(logits(i, 1), -0.3);
  }
}

TEST(Model, MatchesDenseOracle) {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    for (DetectorLevel level : {DetectorLevel::kPrompt, DetectorLevel::kToken}) {
      const DetectorModel model =
          testing::RandomModel(level, 5, 16, 100 + trial, trial % 2 == 1);
      const TokenGraph g = testing::RandomGraph(rng, 7, 5, 0.3);
      const Matrix fast = ModelForward(model, g);
      const Matrix dense = testing::DenseModelForward(model, g);
      ASSERT_EQ(fast.rows(), level == DetectorLevel::kPrompt ? 1 : 7);
      EXPECT_LT((fast - dense).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Model, IdenticalNodesPoolToTokenLogits) {
  const DetectorModel token = testing::RandomModel(DetectorLevel::kToken, 3, 8, 1);
  DetectorModel prompt = token;
  prompt.level = DetectorLevel::kPrompt;
  TokenGraph g;
  g.node_features = Matrix::Constant(4, 3, 0.4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i != j) g.edges.push_back({i, j, EdgeKind::kAttention});
    }
  }
  const Matrix pooled = ModelForward(prompt, g);
  const Matrix per_node = ModelForward(token, g);
  EXPECT_LT((pooled.row(0) - per_node.row(2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Model, PromptOutputInvariantToRelabeling) {
  Rng rng(4);
  const DetectorModel model = testing::RandomModel(DetectorLevel::kPrompt, 3, 8, 2);
  TokenGraph g = testing::RandomGraph(rng, 6, 3, 0.4);
  TokenGraph h = g;
  const std::vector<int> perm = {3, 0, 5, 1, 4, 2};
  for (int i = 0; i < 6; ++i) h.node_features.row(perm[i]) = g.node_features.row(i);
  for (Edge& e : h.edges) e = {perm[e.src], perm[e.dst], e.kind};
  EXPECT_LT((ModelForward(model, g) - ModelForward(model, h)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Model, FiniteForLargeInputs) {
  Rng rng(8);
  const DetectorModel model = testing::RandomModel(DetectorLevel::kToken, 3, 8, 4);
  TokenGraph g = testing::RandomGraph(rng, 5, 3, 0.5);
  g.node_features *= 1e3;
  EXPECT_TRUE(ModelForward(model, g).allFinite());
}

}  // namespace
}  // namespace guardnet
