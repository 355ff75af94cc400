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

#ifndef GUARDNET_DATASET_H_
#define GUARDNET_DATASET_H_

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "guardnet/matrix.h"

namespace guardnet {

// Directed syntactic arc between 0-based token positions.
struct DependencyArc {
  int head = 0;
  int dependent = 0;

  friend bool operator==(const DependencyArc&, const DependencyArc&) = default;
  friend auto operator<=>(const DependencyArc&, const DependencyArc&) = default;
};

// One dataset row. Tokens arrive pre-split; the library never tokenizes.
struct PromptRecord {
  std::string id;
  std::string domain;
  std::vector<std::string> tokens;
  int prompt_label = 0;  // 0 benign, 1 adversarial
  std::optional<std::vector<int>> token_labels;
  std::optional<std::vector<DependencyArc>> dep_edges;

  // Token labels with absent labels read as all-zero.
  std::vector<int> TokenLabelsOrZero() const;
};

struct AttentionEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

// Frozen-encoder output for one prompt: contextual embeddings plus the
// head-averaged self-attention map stored as COO triplets.
struct EncoderOutput {
  std::vector<std::string> tokens;
  Matrix hidden;  // L x d
  std::vector<AttentionEntry> attention;

  int num_tokens() const { return static_cast<int>(tokens.size()); }
  int dim() const { return static_cast<int>(hidden.cols()); }
  Matrix DenseAttention() const;
};

struct Example {
  PromptRecord record;
  EncoderOutput encoding;
};

// Throws ValidationError naming the record id and the offending field.
void ValidateRecord(const PromptRecord& record);
// Throws DimensionError on shape mismatches and ValidationError on bad
// attention values or rows that do not sum to 1 within 1e-3.
void ValidateEncoding(const std::string& id, const EncoderOutput& encoding);

// Streaming reader for the JSON Lines interchange format. Blank lines are
// skipped. Every record is validated before it is returned.
class InterchangeReader {
 public:
  explicit InterchangeReader(const std::string& path);
  explicit InterchangeReader(std::istream& in);

  std::optional<Example> Next();
  int64_t line_number() const { return line_number_; }

 private:
  std::ifstream file_;
  std::istream* in_;
  int64_t line_number_ = 0;
};

class InterchangeWriter {
 public:
  explicit InterchangeWriter(const std::string& path);
  explicit InterchangeWriter(std::ostream& out);

  void Write(const Example& example);

 private:
  std::ofstream file_;
  std::ostream* out_;
};

std::vector<Example> LoadInterchange(const std::string& path);
void WriteInterchange(std::span<const Example> examples,
                      const std::string& path);

// Parses / serializes a single interchange line.
Example ParseInterchangeLine(const std::string& line);
std::string FormatInterchangeLine(const Example& example);

// Labels every adversarial-side token that is not on a longest common
// subsequence of the two token lists with 1, all others with 0.
std::vector<int> AlignTokenLabels(std::span<const std::string> benign,
                                  std::span<const std::string> adversarial);

// Length of a longest common subsequence of the two token lists.
int LcsLength(std::span<const std::string> a, std::span<const std::string> b);

// Deterministic stand-in for the frozen encoder. Each token gets a
// hash-seeded unit-norm content vector plus a sinusoidal position term;
// attention is the row softmax of scaled embedding dot products.
EncoderOutput ToyEncode(std::span<const std::string> tokens, int dim,
                        uint64_t seed);

// Content component of ToyEncode for a single token string.
Vector ToyContentVector(const std::string& token, int dim, uint64_t seed);

struct ConlluSentence {
  std::string sent_id;  // from "# sent_id = ...", empty if absent
  int token_count = 0;  // integer-ID word lines
  std::vector<DependencyArc> arcs;  // root arcs excluded
};

std::vector<ConlluSentence> ParseConllu(std::istream& in);
std::vector<ConlluSentence> LoadConllu(const std::string& path);

// Copies arcs from sentences whose sent_id matches a record id into records
// that carry no dep_edges of their own. Returns the number attached.
int AttachDependencies(std::span<Example> examples,
                       std::span<const ConlluSentence> sentences);

struct FoldAssignment {
  int fold_count = 0;
  std::map<std::string, int> assignment;

  std::vector<std::string> Members(int fold) const;
};

// Stratified by prompt_label: each class is shuffled with `seed` and dealt
// round-robin, continuing the rotation across classes so fold sizes differ
// by at most one.
FoldAssignment StratifiedKFold(std::span<const PromptRecord> records, int k,
                               uint64_t seed);

}  // namespace guardnet

#endif  // GUARDNET_DATASET_H_
