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

#include <cmath>

#include <gtest/gtest.h>

#include "guardnet/errors.h"
#include "guardnet/loss.h"
#include "guardnet/random.h"

namespace guardnet {
namespace {

double MeanBce(const std::vector<double>& p, const std::vector<int>& y) {
  double total = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    total -= y[i] == 1 ? std::log(p[i]) : std::log(1.0 - p[i]);
  }
  return total / static_cast<double>(p.size());
}

TEST(Softmax2, Examples) {
  EXPECT_EQ(Softmax2({0, 0}), (std::array<double, 2>{0.5, 0.5}));
  const auto big = Softmax2({1000, 0});
  EXPECT_EQ(big[0], 1.0);
  EXPECT_GE(big[1], 0.0);
  EXPECT_LT(big[1], 1e-300);
  const auto p = Softmax2({1, 2});
  EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(1.0)), 1e-15);
  EXPECT_NEAR(p[1], std::exp(1.0) / (1.0 + std::exp(1.0)), 1e-15);
  EXPECT_NEAR(p[0], 0.2689, 1e-4);
}

TEST(CrossEntropy, Examples) {
  EXPECT_NEAR(CrossEntropy({0, 0}, 0), std::log(2.0), 1e-15);
  EXPECT_NEAR(CrossEntropy({0, 0}, 1), 0.693147, 1e-6);
  EXPECT_LT(CrossEntropy({-30, 30}, 1), 1e-20);
  EXPECT_NEAR(CrossEntropy({1, 2}, 0), -std::log(1.0 / (1.0 + std::exp(1.0))), 1e-14);
  EXPECT_NEAR(CrossEntropy({1, 2}, 0), 1.313262, 1e-6);
  EXPECT_TRUE(std::isfinite(CrossEntropy({1000, -1000}, 1)));
}

TEST(Focal, ReducesToHalfBce) {
  Rng rng(1);
  for (int batch = 0; batch < 100; ++batch) {
    const int n = 1 + static_cast<int>(rng.Index(40));
    std::vector<double> p(n);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      p[i] = rng.Uniform(0.01, 0.99);
      y[i] = static_cast<int>(rng.Index(2));
    }
    EXPECT_NEAR(FocalLoss(p, y, 0.5, 0.0), 0.5 * MeanBce(p, y), 1e-12);
  }
}

TEST(Focal, SingleTokenValue) {
  const std::vector<double> p = {0.5};
  const std::vector<int> y = {1};
  EXPECT_NEAR(FocalLoss(p, y, 0.95, 2.0), 0.95 * 0.25 * std::log(2.0), 1e-15);
  EXPECT_NEAR(FocalLoss(p, y, 0.95, 2.0), 0.164622, 1e-6);
  EXPECT_NEAR(FocalLoss(p, y, LossConfig::AlphaPreset()), 0.95 * 0.25 * std::log(2.0),
              1e-15);
  EXPECT_NEAR(FocalLoss(p, y, LossConfig::WeightedPreset()), 50 * 0.25 * std::log(2.0),
              1e-12);
}

TEST(Focal, LimitsAndClamping) {
  const std::vector<double> confident = {1.0, 1.0, 1.0};
  const std::vector<int> ones = {1, 1, 1};
  EXPECT_LT(FocalLoss(confident, ones, 0.95, 2.0), 1e-15);
  const std::vector<double> wrong = {0.0};
  const std::vector<int> one = {1};
  EXPECT_NEAR(FocalLoss(wrong, one, 1.0, 0.0), -std::log(kProbabilityClamp), 1e-9);
  EXPECT_THROW(FocalLoss(std::vector<double>{}, std::vector<int>{}, 0.5, 2.0),
               ValidationError);
  EXPECT_THROW(FocalLoss(wrong, one, 1.5, 2.0), ValidationError);
}

TEST(LogitLoss, AgreesWithProbabilityForms) {
  Rng rng(2);
  for (const LossConfig& config :
       {LossConfig::CrossEntropy(), LossConfig::WeightedPreset(),
        LossConfig::AlphaPreset(), LossConfig::FocalWeights(0.3, 2.0, 1.5)}) {
    Matrix logits(7, 2);
    std::vector<int> y(7);
    std::vector<double> p(7);
    double ce = 0.0;
    for (int r = 0; r < 7; ++r) {
      logits(r, 0) = rng.Uniform(-3, 3);
      logits(r, 1) = rng.Uniform(-3, 3);
      y[r] = static_cast<int>(rng.Index(2));
      p[r] = Softmax2({logits(r, 0), logits(r, 1)})[1];
      ce += CrossEntropy({logits(r, 0), logits(r, 1)}, y[r]);
    }
    const double expected = config.kind == LossKind::kFocal
                                ? FocalLoss(p, y, config)
                                : ce / 7.0;
    EXPECT_NEAR(LogitLoss(logits, y, config), expected, 1e-12);

    Matrix grad;
    LogitLoss(logits, y, config, &grad);
    for (int r = 0; r < 7; ++r) {
      for (int c = 0; c < 2; ++c) {
        Matrix plus = logits, minus = logits;
        plus(r, c) += 1e-6;
        minus(r, c) -= 1e-6;
        const double numeric =
            (LogitLoss(plus, y, config) - LogitLoss(minus, y, config)) / 2e-6;
        EXPECT_NEAR(grad(r, c), numeric, 1e-7 * std::max(1.0, std::abs(numeric)));
      }
    }
  }
}

TEST(LossConfig, PresetsAndValidation) {
  const LossConfig weighted = LossConfig::WeightedPreset();
  EXPECT_EQ(weighted.negative_weight, 1.0);
  EXPECT_EQ(weighted.positive_weight, 50.0);
  EXPECT_EQ(weighted.gamma, 2.0);
  const LossConfig alpha = LossConfig::AlphaPreset();
  EXPECT_NEAR(alpha.negative_weight, 0.05, 1e-15);
  EXPECT_EQ(alpha.positive_weight, 0.95);
  LossConfig bad = weighted;
  bad.gamma = -1;
  EXPECT_THROW(bad.Validate(), ValidationError);
  bad = weighted;
  bad.positive_weight = -2;
  EXPECT_THROW(bad.Validate(), ValidationError);
}

}  // namespace
}  // namespace guardnet
