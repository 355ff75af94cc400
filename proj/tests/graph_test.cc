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
#include <sstream>

#include <gtest/gtest.h>

#include "guardnet/errors.h"
#include "guardnet/graph.h"
#include "guardnet/random.h"
#include "test_util.h"

namespace guardnet {
namespace {

EncoderOutput UniformEncoding(int n) {
  EncoderOutput enc;
  for (int i = 0; i < n; ++i) enc.tokens.push_back("t");
  enc.hidden = Matrix::Zero(n, 2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) enc.attention.push_back({i, j, 1.0 / n});
  }
  return enc;
}

TEST(MeanHeads, Examples) {
  Matrix a(2, 2), b(2, 2);
  a << 0, 1, 1, 0;
  b << 1, 0, 0, 1;
  const std::vector<Matrix> heads = {a, b};
  EXPECT_EQ(MeanHeads(heads), Matrix::Constant(2, 2, 0.5));
  const std::vector<Matrix> single = {a};
  EXPECT_EQ(MeanHeads(single), a);
  const std::vector<Matrix> bad = {a, Matrix::Zero(3, 3)};
  EXPECT_THROW(MeanHeads(bad), DimensionError);
}

TEST(MeanHeads, RandomStochasticHeads) {
  Rng rng(4);
  std::vector<Matrix> heads;
  for (int h = 0; h < 4; ++h) {
    Matrix m(6, 6);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) m(i, j) = rng.Uniform();
      m.row(i) /= m.row(i).sum();
    }
    heads.push_back(m);
  }
  const Matrix mean = MeanHeads(heads);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double expected =
          (heads[0](i, j) + heads[1](i, j) + heads[2](i, j) + heads[3](i, j)) / 4;
      EXPECT_NEAR(mean(i, j), expected, 1e-12);
    }
    EXPECT_NEAR(mean.row(i).sum(), 1.0, 1e-6);
  }
}

TEST(Topk, Examples) {
  const std::vector<double> a = {0.1, 0.5, 0.4};
  EXPECT_EQ(TopkNeighbors(a, 0, 1), (std::vector<int>{1}));
  const std::vector<double> b = {0.3, 0.3, 0.4};
  EXPECT_EQ(TopkNeighbors(b, 2, 2), (std::vector<int>{0, 1}));
  EXPECT_EQ(TopkNeighbors(b, 0, 10), (std::vector<int>{2, 1}));
}

TEST(Topk, MatchesFullSort) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> row(12);
    for (double& v : row) v = static_cast<double>(rng.Index(5));
    const int self = static_cast<int>(rng.Index(12));
    std::vector<int> order;
    for (int j = 0; j < 12; ++j) {
      if (j != self) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return row[x] > row[y]; });
    order.resize(5);
    EXPECT_EQ(TopkNeighbors(row, self, 5), order);
  }
}

TEST(HybridGraph, SingleTokenHasNoEdges) {
  EXPECT_TRUE(BuildHybridGraph(UniformEncoding(1), std::nullopt, {}).edges.empty());
}

TEST(HybridGraph, ThreeUniformTokens) {
  GraphConfig config;
  config.window = 2;
  const TokenGraph graph = BuildHybridGraph(UniformEncoding(3), std::nullopt, config);
  ASSERT_EQ(graph.edges.size(), 6u);
  int sequential = 0;
  for (const Edge& e : graph.edges) sequential += e.kind == EdgeKind::kSequential;
  EXPECT_EQ(sequential, 4);
  EXPECT_EQ(graph.edges[1], (Edge{0, 2, EdgeKind::kAttention}));
}

TEST(HybridGraph, SmallDependencyCase) {
  Rng rng(2);
  const EncoderOutput enc = testing::RandomEncoding(rng, 4, 3, false, false);
  GraphConfig config;
  config.top_k = 1;
  config.window = 1;
  const std::vector<DependencyArc> deps = {{3, 0}};
  const TokenGraph graph = BuildHybridGraph(enc, deps, config);
  EXPECT_EQ(graph.edges, testing::BruteForceEdges(enc, deps, config));
  EXPECT_NE(std::find(graph.edges.begin(), graph.edges.end(),
                      Edge{0, 3, EdgeKind::kDependency}),
            graph.edges.end());
}

TEST(HybridGraph, MatchesBruteForceOnRandomInstances) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.Index(12));
    const EncoderOutput enc =
        testing::RandomEncoding(rng, n, 2, rng.Uniform() < 0.5, rng.Uniform() < 0.5);
    GraphConfig config;
    config.top_k = 1 + static_cast<int>(rng.Index(4));
    config.window = 1 + static_cast<int>(rng.Index(4));
    config.symmetrize_attention = rng.Uniform() < 0.5;
    config.symmetrize_dependency = rng.Uniform() < 0.5;
    std::optional<std::vector<DependencyArc>> deps;
    if (rng.Uniform() < 0.7) deps = testing::RandomArcs(rng, n, static_cast<int>(rng.Index(n + 1)));
    EXPECT_EQ(BuildHybridGraph(enc, deps, config).edges,
              testing::BruteForceEdges(enc, deps, config))
        << "trial " << trial;
  }
}

TEST(HybridGraph, Invariants) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.Index(10));
    const EncoderOutput enc = testing::RandomEncoding(rng, n, 3, true, true);
    GraphConfig config;
    config.top_k = 1 + static_cast<int>(rng.Index(3));
    config.window = 1 + static_cast<int>(rng.Index(3));
    config.symmetrize_attention = false;
    const auto deps = testing::RandomArcs(rng, n, 3);
    const TokenGraph graph = BuildHybridGraph(enc, deps, config);
    std::vector<int> degree(n, 0);
    const Matrix a = enc.DenseAttention();
    for (size_t e = 0; e < graph.edges.size(); ++e) {
      const Edge& edge = graph.edges[e];
      EXPECT_NE(edge.src, edge.dst);
      if (e > 0) {
        const Edge& prev = graph.edges[e - 1];
        EXPECT_TRUE(prev.src < edge.src || (prev.src == edge.src && prev.dst < edge.dst));
      }
      ++degree[edge.src];
      if (edge.kind == EdgeKind::kAttention) {
        EXPECT_LE(std::abs(edge.src - edge.dst), config.window);
        std::vector<double> row(a.row(edge.src).data(), a.row(edge.src).data() + n);
        const auto top = TopkNeighbors(row, edge.src, config.top_k);
        EXPECT_NE(std::find(top.begin(), top.end(), edge.dst), top.end());
      }
    }
    for (int d : degree) EXPECT_GE(d, 1);
    // Monotone in k.
    GraphConfig wider = config;
    wider.top_k += 2;
    const TokenGraph bigger = BuildHybridGraph(enc, deps, wider);
    for (const Edge& edge : graph.edges) {
      EXPECT_TRUE(std::any_of(bigger.edges.begin(), bigger.edges.end(),
                              [&](const Edge& o) {
                                return o.src == edge.src && o.dst == edge.dst;
                              }));
    }
  }
}

TEST(HybridGraph, RejectsBadInputs) {
  const std::vector<DependencyArc> deps = {{0, 5}};
  EXPECT_THROW(BuildHybridGraph(UniformEncoding(3), deps, {}), ValidationError);
  GraphConfig bad;
  bad.top_k = 0;
  EXPECT_THROW(BuildHybridGraph(UniformEncoding(3), std::nullopt, bad), ValidationError);
}

TEST(HybridGraph, EdgeListDump) {
  const TokenGraph graph = BuildHybridGraph(UniformEncoding(2), std::nullopt, {});
  std::ostringstream out;
  WriteEdgeList(graph, out);
  EXPECT_EQ(out.str(), "0 1 sequential\n1 0 sequential\n");
  EXPECT_EQ(ParseEdgeKind("dependency"), EdgeKind::kDependency);
  EXPECT_THROW(ParseEdgeKind("bogus"), ValidationError);
}

}  // namespace
}  // namespace guardnet
