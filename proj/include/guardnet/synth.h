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

#ifndef GUARDNET_SYNTH_H_
#define GUARDNET_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "guardnet/dataset.h"

namespace guardnet {

// Synthetic corpus: benign prompts are random background tokens; adversarial
// prompts are benign prompts with planted trigger spans drawn from a shared
// trigger vocabulary. Each domain has its own background vocabulary.
struct SynthConfig {
  int size = 400;
  uint64_t seed = 1;
  // Frozen toy-encoder seed; shared by every corpus so token embeddings agree
  // across files.
  uint64_t encoder_seed = 0;
  int domain_count = 1;
  int dim = 128;
  int min_length = 40;
  int max_length = 56;
  int span_length = 3;
  int max_spans = 2;
  int trigger_vocab = 12;
  int background_vocab = 200;
  double adversarial_fraction = 0.5;

  void Validate() const;
};

std::string SynthDomainName(int domain);

struct SynthExample {
  Example example;
  // Positions where trigger tokens were planted (empty for benign).
  std::vector<int> planted;
  // The benign prompt the adversarial one was derived from.
  std::vector<std::string> base_tokens;
};

std::vector<SynthExample> GenerateSyntheticDetailed(const SynthConfig& config);
std::vector<Example> GenerateSynthetic(const SynthConfig& config);

}  // namespace guardnet

#endif  // GUARDNET_SYNTH_H_
