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

#include "guardnet/adam.h"

#include <cmath>

#include "guardnet/errors.h"

namespace guardnet {
namespace {

std::vector<size_t> SizesOf(const DetectorModel& model) {
  std::vector<size_t> sizes;
  for (auto span : ParameterSpans(model)) sizes.push_back(span.size());
  return sizes;
}

}  // namespace

AdamState::AdamState(const AdamOptions& options, std::span<const size_t> sizes)
    : options_(options) {
  for (size_t size : sizes) {
    first_moment_.emplace_back(size, 0.0);
    second_moment_.emplace_back(size, 0.0);
  }
}

AdamState::AdamState(const AdamOptions& options, const DetectorModel& model)
    : AdamState(options, SizesOf(model)) {}

void AdamState::Step(std::span<const std::span<double>> params,
                     std::span<const std::span<const double>> grads) {
  if (params.size() != first_moment_.size() || grads.size() != params.size()) {
    throw DimensionError("Adam: parameter list does not match state");
  }
  for (size_t t = 0; t < params.size(); ++t) {
    if (params[t].size() != first_moment_[t].size() ||
        grads[t].size() != params[t].size()) {
      throw DimensionError("Adam: tensor " + std::to_string(t) +
                           " shape mismatch");
    }
  }
  ++step_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (size_t t = 0; t < params.size(); ++t) {
    std::vector<double>& m = first_moment_[t];
    std::vector<double>& v = second_moment_[t];
    for (size_t i = 0; i < params[t].size(); ++i) {
      const double g = grads[t][i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      params[t][i] -=
          options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

void AdamState::Step(DetectorModel& model, const DetectorModel& grads) {
  const auto params = ParameterSpans(model);
  const auto grad_spans = ParameterSpans(grads);
  Step(params, grad_spans);
}

}  // namespace guardnet
