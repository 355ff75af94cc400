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

#include "guardnet/loss.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "guardnet/errors.h"

namespace guardnet {
namespace {

// log(1 + exp(x)) without overflow.
double Softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void CheckLabels(std::span<const int> labels, size_t expected) {
  if (labels.size() != expected) {
    throw DimensionError("label count " + std::to_string(labels.size()) +
                         " differs from " + std::to_string(expected));
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
  }
}

}  // namespace

void LossConfig::Validate() const {
  if (negative_weight < 0.0 || positive_weight < 0.0) {
    throw ValidationError("class weights must be non-negative");
  }
  if (gamma < 0.0) throw ValidationError("focal gamma must be >= 0");
}

std::array<double, 2> Softmax2(std::array<double, 2> logits) {
  const double peak = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - peak);
  const double e1 = std::exp(logits[1] - peak);
  const double total = e0 + e1;
  return {e0 / total, e1 / total};
}

double CrossEntropy(std::array<double, 2> logits, int label) {
  const double peak = std::max(logits[0], logits[1]);
  const double log_total =
      peak + std::log(std::exp(logits[0] - peak) + std::exp(logits[1] - peak));
  return log_total - logits[label == 1 ? 1 : 0];
}

double FocalLoss(std::span<const double> probs, std::span<const int> labels,
                 double alpha, double gamma) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw ValidationError("focal alpha must lie in [0, 1]");
  }
  return FocalLoss(probs, labels, LossConfig::FocalAlpha(alpha, gamma));
}

double FocalLoss(std::span<const double> probs, std::span<const int> labels,
                 const LossConfig& config) {
  if (probs.empty()) throw ValidationError("focal loss of an empty token list");
  CheckLabels(labels, probs.size());
  double positive = 0.0;
  double negative = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    const double p =
        std::clamp(probs[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    if (labels[i] == 1) {
      positive += std::pow(1.0 - p, config.gamma) * std::log(p);
    } else {
      negative += std::pow(p, config.gamma) * std::log(1.0 - p);
    }
  }
  const double n = static_cast<double>(probs.size());
  return -(config.positive_weight / n) * positive -
         (config.negative_weight / n) * negative;
}

double LogitLoss(const Matrix& logits, std::span<const int> labels,
                 const LossConfig& config, Matrix* grad_logits) {
  if (logits.cols() != 2) throw DimensionError("expected two logit columns");
  const Eigen::Index rows = logits.rows();
  if (rows < 1) throw ValidationError("loss over zero rows");
  CheckLabels(labels, static_cast<size_t>(rows));
  if (grad_logits != nullptr) grad_logits->setZero(rows, 2);
  const double n = static_cast<double>(rows);
  double loss = 0.0;

  if (config.kind == LossKind::kCrossEntropy) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      const std::array<double, 2> z = {logits(r, 0), logits(r, 1)};
      loss += CrossEntropy(z, labels[r]);
      if (grad_logits != nullptr) {
        const auto p = Softmax2(z);
        (*grad_logits)(r, 0) = (p[0] - (labels[r] == 0 ? 1.0 : 0.0)) / n;
        (*grad_logits)(r, 1) = (p[1] - (labels[r] == 1 ? 1.0 : 0.0)) / n;
      }
    }
    return loss / n;
  }

  // Focal: p = sigmoid(d), q = 1 - p with d = z1 - z0.
  const double gamma = config.gamma;
  const double low = kProbabilityClamp;
  const double high = 1.0 - kProbabilityClamp;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double d = logits(r, 1) - logits(r, 0);
    double p = Sigmoid(d);
    double q = Sigmoid(-d);
    double log_p = -Softplus(-d);
    double log_q = -Softplus(d);
    const bool clamped = p < low || p > high;
    if (clamped) {
      p = std::clamp(p, low, high);
      q = 1.0 - p;
      log_p = std::log(p);
      log_q = std::log(q);
    }
    double grad_d = 0.0;
    if (labels[r] == 1) {
      const double modulation = std::pow(q, gamma);
      loss -= config.positive_weight * modulation * log_p;
      grad_d = -config.positive_weight *
               (modulation * q - gamma * p * modulation * log_p);
    } else {
      const double modulation = std::pow(p, gamma);
      loss -= config.negative_weight * modulation * log_q;
      grad_d = -config.negative_weight *
               (gamma * q * modulation * log_q - modulation * p);
    }
    if (grad_logits != nullptr && !clamped) {
      (*grad_logits)(r, 1) = grad_d / n;
      (*grad_logits)(r, 0) = -grad_d / n;
    }
  }
  return loss / n;
}

}  // namespace guardnet
