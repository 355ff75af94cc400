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

#include "guardnet/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "guardnet/errors.h"
#include "guardnet/random.h"

namespace guardnet {
namespace {

constexpr const char* kTriggerWords[] = {
    "ignore",    "previous", "instructions", "reveal",    "system",
    "prompt",    "override", "pretend",      "unfiltered", "developer",
    "jailbreak", "verbatim", "disregard",    "roleplay",  "uncensored",
    "bypass"};

std::vector<std::string> TriggerVocabulary(int size) {
  std::vector<std::string> words;
  for (int i = 0; i < size; ++i) {
    constexpr int kNamed = static_cast<int>(std::size(kTriggerWords));
    words.push_back(i < kNamed ? std::string(kTriggerWords[i])
                               : "trigger" + std::to_string(i));
  }
  return words;
}

std::vector<std::string> BackgroundVocabulary(int domain, int size) {
  std::vector<std::string> words;
  const std::string prefix = SynthDomainName(domain) + "/w";
  for (int i = 0; i < size; ++i) words.push_back(prefix + std::to_string(i));
  return words;
}

std::vector<std::string> Sample(const std::vector<std::string>& vocab,
                                int count, Rng& rng) {
  std::vector<std::string> tokens;
  tokens.reserve(count);
  for (int i = 0; i < count; ++i) tokens.push_back(vocab[rng.Index(vocab.size())]);
  return tokens;
}

int UniformInt(int lo, int hi, Rng& rng) {
  return lo + static_cast<int>(rng.Index(static_cast<size_t>(hi - lo + 1)));
}

// Random head in the three preceding tokens for every non-initial token.
std::vector<DependencyArc> LocalTree(int length, Rng& rng) {
  std::vector<DependencyArc> arcs;
  for (int i = 1; i < length; ++i) {
    const int reach = std::min(i, 3);
    arcs.push_back({i - 1 - static_cast<int>(rng.Index(reach)), i});
  }
  return arcs;
}

}  // namespace

void SynthConfig::Validate() const {
  if (size < 20) throw ValidationError("synthetic corpus size must be >= 20");
  if (domain_count < 1) throw ValidationError("domain count must be >= 1");
  if (span_length < 1 || max_spans < 1) {
    throw ValidationError("trigger spans must be non-empty");
  }
  if (min_length < max_spans * span_length + 1 || max_length < min_length) {
    throw ValidationError("prompt length range too small for trigger spans");
  }
  if (trigger_vocab < 1 || background_vocab < 1) {
    throw ValidationError("vocabularies must be non-empty");
  }
  if (!(adversarial_fraction > 0.0 && adversarial_fraction < 1.0)) {
    throw ValidationError("adversarial fraction must lie in (0, 1)");
  }
}

std::string SynthDomainName(int domain) {
  std::string name = "synth-";
  if (domain < 26) {
    name += static_cast<char>('a' + domain);
  } else {
    name += std::to_string(domain);
  }
  return name;
}

std::vector<SynthExample> GenerateSyntheticDetailed(const SynthConfig& config) {
  config.Validate();
  Rng rng(config.seed);
  const std::vector<std::string> triggers = TriggerVocabulary(config.trigger_vocab);
  std::vector<std::vector<std::string>> backgrounds;
  for (int d = 0; d < config.domain_count; ++d) {
    backgrounds.push_back(BackgroundVocabulary(d, config.background_vocab));
  }

  std::vector<SynthExample> out;
  out.reserve(config.size);
  for (int i = 0; i < config.size; ++i) {
    const int domain = i % config.domain_count;
    const int slot = i / config.domain_count;
    const double f = config.adversarial_fraction;
    const bool adversarial =
        std::floor((slot + 1) * f) > std::floor(slot * f);

    SynthExample item;
    PromptRecord& record = item.example.record;
    char id[64];
    std::snprintf(id, sizeof(id), "%s-%05d", SynthDomainName(domain).c_str(), i);
    record.id = id;
    record.domain = SynthDomainName(domain);
    record.prompt_label = adversarial ? 1 : 0;

    if (!adversarial) {
      record.tokens = Sample(backgrounds[domain],
                             UniformInt(config.min_length, config.max_length, rng),
                             rng);
    } else {
      const int spans = UniformInt(1, config.max_spans, rng);
      const int planted_total = spans * config.span_length;
      item.base_tokens = Sample(
          backgrounds[domain],
          UniformInt(config.min_length - planted_total,
                     config.max_length - planted_total, rng),
          rng);
      // Distinct insertion gaps in the base prompt, ascending.
      const int gaps = static_cast<int>(item.base_tokens.size()) + 1;
      std::vector<int> all_gaps(gaps);
      for (int g = 0; g < gaps; ++g) all_gaps[g] = g;
      rng.Shuffle(std::span<int>(all_gaps));
      std::vector<int> chosen(all_gaps.begin(), all_gaps.begin() + spans);
      std::sort(chosen.begin(), chosen.end());
      size_t next_gap = 0;
      for (int g = 0; g < gaps; ++g) {
        while (next_gap < chosen.size() && chosen[next_gap] == g) {
          for (const std::string& word :
               Sample(triggers, config.span_length, rng)) {
            item.planted.push_back(static_cast<int>(record.tokens.size()));
            record.tokens.push_back(word);
          }
          ++next_gap;
        }
        if (g < gaps - 1) record.tokens.push_back(item.base_tokens[g]);
      }
      record.token_labels = AlignTokenLabels(item.base_tokens, record.tokens);
      std::vector<int> expected(record.tokens.size(), 0);
      for (int position : item.planted) expected[position] = 1;
      if (*record.token_labels != expected) {
        throw Error("synthetic labels disagree with planted spans for " +
                    record.id);
      }
    }
    record.dep_edges =
        LocalTree(static_cast<int>(record.tokens.size()), rng);
    item.example.encoding =
        ToyEncode(record.tokens, config.dim, config.encoder_seed);
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<Example> GenerateSynthetic(const SynthConfig& config) {
  std::vector<Example> examples;
  for (SynthExample& item : GenerateSyntheticDetailed(config)) {
    examples.push_back(std::move(item.example));
  }
  return examples;
}

}  // namespace guardnet
