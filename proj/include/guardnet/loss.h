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

#ifndef GUARDNET_LOSS_H_
#define GUARDNET_LOSS_H_

#include <array>
#include <span>

#include "guardnet/matrix.h"

namespace guardnet {

enum class LossKind { kCrossEntropy, kFocal };

// Class weights (negative_weight, positive_weight) apply to the focal loss
// only. The scalar alpha form maps to (1 - alpha, alpha).
struct LossConfig {
  LossKind kind = LossKind::kCrossEntropy;
  double negative_weight = 1.0;
  double positive_weight = 1.0;
  double gamma = 0.0;

  static LossConfig CrossEntropy() { return {}; }
  static LossConfig FocalAlpha(double alpha, double gamma) {
    return {LossKind::kFocal, 1.0 - alpha, alpha, gamma};
  }
  static LossConfig FocalWeights(double negative, double positive,
                                 double gamma) {
    return {LossKind::kFocal, negative, positive, gamma};
  }
  // Class weights (1, 50), gamma 2.
  static LossConfig WeightedPreset() { return FocalWeights(1.0, 50.0, 2.0); }
  // alpha 0.95, gamma 2.
  static LossConfig AlphaPreset() { return FocalAlpha(0.95, 2.0); }

  void Validate() const;
};

inline constexpr double kProbabilityClamp = 1e-7;

// Max-subtracted softmax over two logits.
std::array<double, 2> Softmax2(std::array<double, 2> logits);

// -log softmax(logits)[label] in log-sum-exp form.
double CrossEntropy(std::array<double, 2> logits, int label);

// Focal loss on adversarial probabilities, clamped to [1e-7, 1 - 1e-7]:
//   -(w1/N) sum_{y=1} (1-p)^g log p - (w0/N) sum_{y=0} p^g log(1-p)
double FocalLoss(std::span<const double> probs, std::span<const int> labels,
                 double alpha, double gamma);
double FocalLoss(std::span<const double> probs, std::span<const int> labels,
                 const LossConfig& config);

// Loss of an R x 2 logit matrix against R labels: mean cross entropy over
// rows, or the focal loss with N = R. When `grad_logits` is given it receives
// dLoss/dLogits.
double LogitLoss(const Matrix& logits, std::span<const int> labels,
                 const LossConfig& config, Matrix* grad_logits = nullptr);

}  // namespace guardnet

#endif  // GUARDNET_LOSS_H_
