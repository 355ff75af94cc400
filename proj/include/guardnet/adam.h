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

#ifndef GUARDNET_ADAM_H_
#define GUARDNET_ADAM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "guardnet/model.h"

namespace guardnet {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moment buffers mirror the parameter spans they
// were created for.
class AdamState {
 public:
  AdamState(const AdamOptions& options, std::span<const size_t> sizes);
  AdamState(const AdamOptions& options, const DetectorModel& model);

  void Step(std::span<const std::span<double>> params,
            std::span<const std::span<const double>> grads);
  void Step(DetectorModel& model, const DetectorModel& grads);

  int64_t step() const { return step_; }
  const AdamOptions& options() const { return options_; }

 private:
  AdamOptions options_;
  int64_t step_ = 0;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
};

}  // namespace guardnet

#endif  // GUARDNET_ADAM_H_
