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

#include <gtest/gtest.h>

#include "guardnet/loss.h"
#include "guardnet/model.h"
#include "guardnet/random.h"
#include "test_util.h"

namespace guardnet {
namespace {

struct Batch {
  std::vector<TokenGraph> graphs;
  std::vector<NeighborIndex> indices;
  std::vector<std::vector<int>> labels;
  std::vector<LabeledGraph> items;
};

Batch MakeBatch(Rng& rng, DetectorLevel level, int dim, int count) {
  Batch batch;
  for (int g = 0; g < count; ++g) {
    const int n = 2 + static_cast<int>(rng.Index(7));
    batch.graphs.push_back(testing::RandomGraph(rng, n, dim, 0.35));
    batch.labels.push_back(
        testing::RandomLabels(rng, level == DetectorLevel::kPrompt ? 1 : n, 0.4));
  }
  for (int g = 0; g < count; ++g) batch.indices.emplace_back(batch.graphs[g]);
  for (int g = 0; g < count; ++g) {
    batch.items.push_back({&batch.graphs[g], &batch.indices[g], batch.labels[g]});
  }
  return batch;
}

class GradientCheck
    : public ::testing::TestWithParam<std::tuple<DetectorLevel, bool, bool>> {};

TEST_P(GradientCheck, MatchesFiniteDifferences) {
  const auto [level, focal, residual] = GetParam();
  const LossConfig loss =
      focal ? LossConfig::WeightedPreset() : LossConfig::CrossEntropy();
  for (uint64_t seed = 0; seed < 4; ++seed) {
    Rng rng(DeriveSeed(seed, 7));
    const DetectorModel model = testing::RandomModel(level, 4, 8, seed, residual);
    const Batch batch = MakeBatch(rng, level, 4, 2);
    const auto result = testing::CheckGradients(model, batch.items, loss);
    EXPECT_LT(result.max_relative_error, 1e-4) << "seed " << seed;
    EXPECT_GT(result.checked, 0.9 * (result.checked + result.skipped));
  }
}

INSTANTIATE_TEST_SUITE_P(
    AllVariants, GradientCheck,
    ::testing::Combine(::testing::Values(DetectorLevel::kPrompt, DetectorLevel::kToken),
                       ::testing::Bool(), ::testing::Bool()));

TEST(Gradients, ScaleDoublesExactly) {
  Rng rng(3);
  const DetectorModel model = testing::RandomModel(DetectorLevel::kToken, 4, 8, 9);
  const Batch batch = MakeBatch(rng, DetectorLevel::kToken, 4, 3);
  DetectorModel once = ZerosLike(model), twice = ZerosLike(model);
  const double a = ComputeGradients(model, batch.items, LossConfig::WeightedPreset(), &once);
  const double b =
      ComputeGradients(model, batch.items, LossConfig::WeightedPreset(), &twice, 2.0);
  EXPECT_EQ(a, b);
  const auto x = ParameterSpans(std::as_const(once));
  const auto y = ParameterSpans(std::as_const(twice));
  for (size_t s = 0; s < x.size(); ++s) {
    for (size_t k = 0; k < x[s].size(); ++k) EXPECT_EQ(2.0 * x[s][k], y[s][k]);
  }
}

TEST(Gradients, BalancedZeroHeadGivesZeroBiasGradient) {
  Rng rng(4);
  DetectorModel model = testing::RandomModel(DetectorLevel::kPrompt, 4, 8, 2);
  model.head_weight.setZero();
  model.head_bias.setZero();
  Batch batch = MakeBatch(rng, DetectorLevel::kPrompt, 4, 4);
  for (int g = 0; g < 4; ++g) batch.labels[g][0] = g % 2;
  DetectorModel grads = ZerosLike(model);
  ComputeGradients(model, batch.items, LossConfig::CrossEntropy(), &grads);
  EXPECT_NEAR(grads.head_bias[0], 0.0, 1e-15);
  EXPECT_NEAR(grads.head_bias[1], 0.0, 1e-15);
}

TEST(Gradients, OverwritesPreviousContents) {
  Rng rng(5);
  const DetectorModel model = testing::RandomModel(DetectorLevel::kToken, 4, 8, 1);
  const Batch batch = MakeBatch(rng, DetectorLevel::kToken, 4, 2);
  DetectorModel fresh = ZerosLike(model);
  DetectorModel dirty = model;
  ComputeGradients(model, batch.items, LossConfig::CrossEntropy(), &fresh);
  ComputeGradients(model, batch.items, LossConfig::CrossEntropy(), &dirty);
  const auto x = ParameterSpans(std::as_const(fresh));
  const auto y = ParameterSpans(std::as_const(dirty));
  for (size_t s = 0; s < x.size(); ++s) {
    EXPECT_TRUE(std::equal(x[s].begin(), x[s].end(), y[s].begin()));
  }
}

}  // namespace
}  // namespace guardnet
