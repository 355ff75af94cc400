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

#ifndef GUARDNET_RANDOM_H_
#define GUARDNET_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace guardnet {

// Deterministic random source. Distributions are computed here rather than
// through <random> distribution classes so that streams are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Standard normal via Box-Muller.
  double Normal();

  // Uniform integer in [0, n). n must be positive.
  size_t Index(size_t n);

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[Index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

uint64_t SplitMix64(uint64_t x);

// FNV-1a over the bytes of `text`.
uint64_t Fnv1a64(std::string_view text);

// Seed for an independent sub-stream (fold, worker, token) of `master`.
inline uint64_t DeriveSeed(uint64_t master, uint64_t stream) {
  return SplitMix64(SplitMix64(master) ^ (stream * 0x9E3779B97F4A7C15ULL));
}

}  // namespace guardnet

#endif  // GUARDNET_RANDOM_H_
