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

#ifndef GUARDNET_CONFIG_H_
#define GUARDNET_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>

#include "guardnet/detectors.h"
#include "guardnet/graph.h"
#include "guardnet/loss.h"
#include "json.hpp"

namespace guardnet {

using ConfigJson = nlohmann::ordered_json;

ConfigJson LossConfigToJson(const LossConfig& config);
ConfigJson GraphConfigToJson(const GraphConfig& config);
ConfigJson TrainConfigToJson(const TrainConfig& config);

// Partial updates: keys present in `object` override the matching fields.
// Unknown keys are rejected.
//
// A loss object is {"kind", "negative_weight", "positive_weight", "gamma"},
// or {"preset": "weighted" | "alpha" | "cross_entropy"}, or
// {"kind": "focal", "alpha", "gamma"}.
LossConfig LossConfigFromJson(const ConfigJson& object);
void ApplyGraphConfig(const ConfigJson& object, GraphConfig* config);
void ApplyTrainConfig(const ConfigJson& object, TrainConfig* config);

GraphConfig GraphConfigFromJson(const ConfigJson& object);

// Run configuration file: the "graph" and "train" objects plus optional
// "seed", "folds" and "jobs". The header line of an eval report is accepted
// as-is, so a report can seed a rerun.
struct RunConfig {
  GraphConfig graph;
  TrainConfig train;
  std::optional<uint64_t> seed;
  std::optional<int> folds;
  std::optional<int> jobs;
};

RunConfig ParseRunConfig(const std::string& text);
RunConfig LoadRunConfig(const std::string& path);

LossConfig ParseLossPreset(const std::string& name);

}  // namespace guardnet

#endif  // GUARDNET_CONFIG_H_
