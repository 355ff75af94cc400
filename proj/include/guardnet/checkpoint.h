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

#ifndef GUARDNET_CHECKPOINT_H_
#define GUARDNET_CHECKPOINT_H_

#include <cstdint>
#include <string>

#include "guardnet/graph.h"
#include "guardnet/model.h"

namespace guardnet {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointMetadata {
  uint64_t seed = 0;
  std::string config_hash;
  GraphConfig graph;
  int epochs_run = 0;
  int best_epoch = 0;
  std::string training_config;  // JSON text
};

struct Checkpoint {
  DetectorModel model;
  CheckpointMetadata metadata;
};

// Self-describing JSON container. Parameters are written as decimals that
// round-trip exactly.
std::string SerializeCheckpoint(const Checkpoint& checkpoint);
Checkpoint ParseCheckpoint(const std::string& text);

void SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path);
// Rejects files with a different format version.
Checkpoint LoadCheckpoint(const std::string& path);

// 16 hex digits of FNV-1a over `text`.
std::string ConfigHash(const std::string& text);

}  // namespace guardnet

#endif  // GUARDNET_CHECKPOINT_H_
