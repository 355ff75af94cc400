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

#include "guardnet/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <set>
#include <sstream>
#include <string_view>

#include "guardnet/errors.h"
#include "guardnet/random.h"
#include "json.hpp"

namespace guardnet {
namespace {

using Json = nlohmann::json;

constexpr double kRowSumTolerance = 1e-3;

[[noreturn]] void FailField(const std::string& id, std::string_view field,
                            const std::string& what) {
  throw ValidationError("record '" + id + "': field '" + std::string(field) +
                        "': " + what);
}

// Rounds to 9 significant digits so the JSON writer (which emits the
// shortest round-tripping form) stores at most 9 digits.
double RoundSignificant(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return std::strtod(buffer, nullptr);
}

const Json& Require(const Json& object, const char* key,
                    const std::string& id) {
  auto it = object.find(key);
  if (it == object.end()) FailField(id, key, "missing");
  return *it;
}

int AsInt(const Json& value, const std::string& id, std::string_view field) {
  if (!value.is_number_integer()) FailField(id, field, "expected an integer");
  return value.get<int>();
}

double AsReal(const Json& value, const std::string& id,
              std::string_view field) {
  if (!value.is_number()) FailField(id, field, "expected a number");
  const double x = value.get<double>();
  if (!std::isfinite(x)) FailField(id, field, "non-finite value");
  return x;
}

std::vector<DependencyArc> ParseArcs(const Json& value, const std::string& id) {
  if (!value.is_array()) FailField(id, "dep_edges", "expected an array");
  std::vector<DependencyArc> arcs;
  arcs.reserve(value.size());
  for (const Json& pair : value) {
    if (!pair.is_array() || pair.size() != 2) {
      FailField(id, "dep_edges", "expected [head, dep] pairs");
    }
    arcs.push_back({AsInt(pair[0], id, "dep_edges"),
                    AsInt(pair[1], id, "dep_edges")});
  }
  return arcs;
}

}  // namespace

std::vector<int> PromptRecord::TokenLabelsOrZero() const {
  if (token_labels.has_value()) return *token_labels;
  return std::vector<int>(tokens.size(), 0);
}

Matrix EncoderOutput::DenseAttention() const {
  const int n = num_tokens();
  Matrix dense = Matrix::Zero(n, n);
  for (const AttentionEntry& entry : attention) {
    dense(entry.row, entry.col) = entry.value;
  }
  return dense;
}

void ValidateRecord(const PromptRecord& record) {
  const std::string& id = record.id;
  if (id.empty()) throw ValidationError("record with empty 'id'");
  const int n = static_cast<int>(record.tokens.size());
  if (n < 1) FailField(id, "tokens", "must contain at least one token");
  if (record.prompt_label != 0 && record.prompt_label != 1) {
    FailField(id, "prompt_label", "must be 0 or 1");
  }
  if (record.token_labels.has_value()) {
    const auto& labels = *record.token_labels;
    if (static_cast<int>(labels.size()) != n) {
      FailField(id, "token_labels",
                "length " + std::to_string(labels.size()) +
                    " != token count " + std::to_string(n));
    }
    for (int label : labels) {
      if (label != 0 && label != 1) {
        FailField(id, "token_labels", "labels must be 0 or 1");
      }
      if (record.prompt_label == 0 && label != 0) {
        FailField(id, "token_labels",
                  "benign prompt carries an adversarial token label");
      }
    }
  }
  if (record.dep_edges.has_value()) {
    for (const DependencyArc& arc : *record.dep_edges) {
      if (arc.head < 0 || arc.head >= n || arc.dependent < 0 ||
          arc.dependent >= n) {
        FailField(id, "dep_edges",
                  "arc (" + std::to_string(arc.head) + ", " +
                      std::to_string(arc.dependent) + ") out of range [0, " +
                      std::to_string(n) + ")");
      }
    }
  }
}

void ValidateEncoding(const std::string& id, const EncoderOutput& encoding) {
  const int n = encoding.num_tokens();
  if (encoding.hidden.rows() != n) {
    throw DimensionError("record '" + id + "': field 'hidden': " +
                         std::to_string(encoding.hidden.rows()) +
                         " rows for " + std::to_string(n) + " tokens");
  }
  if (encoding.hidden.cols() < 1) {
    throw DimensionError("record '" + id +
                         "': field 'hidden': zero-width embeddings");
  }
  if (!encoding.hidden.allFinite()) {
    FailField(id, "hidden", "non-finite value");
  }
  std::vector<double> row_sums(n, 0.0);
  std::set<std::pair<int, int>> seen;
  for (const AttentionEntry& entry : encoding.attention) {
    if (entry.row < 0 || entry.row >= n || entry.col < 0 || entry.col >= n) {
      throw DimensionError("record '" + id + "': field 'attn': index (" +
                           std::to_string(entry.row) + ", " +
                           std::to_string(entry.col) + ") outside " +
                           std::to_string(n) + "x" + std::to_string(n));
    }
    if (!(entry.value >= 0.0 && entry.value <= 1.0)) {
      FailField(id, "attn", "value outside [0, 1]");
    }
    if (!seen.emplace(entry.row, entry.col).second) {
      FailField(id, "attn",
                "duplicate entry (" + std::to_string(entry.row) + ", " +
                    std::to_string(entry.col) + ")");
    }
    row_sums[entry.row] += entry.value;
  }
  for (int i = 0; i < n; ++i) {
    if (std::abs(row_sums[i] - 1.0) > kRowSumTolerance) {
      char sum[32];
      std::snprintf(sum, sizeof(sum), "%.6g", row_sums[i]);
      FailField(id, "attn",
                "row " + std::to_string(i) + " sums to " + sum +
                    ", not normalized");
    }
  }
}

Example ParseInterchangeLine(const std::string& line) {
  Json object;
  try {
    object = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
  if (!object.is_object()) throw ValidationError("record is not an object");
  auto id_it = object.find("id");
  if (id_it == object.end() || !id_it->is_string()) {
    throw ValidationError("record without a string 'id'");
  }
  Example example;
  PromptRecord& record = example.record;
  record.id = id_it->get<std::string>();
  const std::string& id = record.id;

  const Json& domain = Require(object, "domain", id);
  if (!domain.is_string()) FailField(id, "domain", "expected a string");
  record.domain = domain.get<std::string>();

  const Json& tokens = Require(object, "tokens", id);
  if (!tokens.is_array()) FailField(id, "tokens", "expected an array");
  for (const Json& token : tokens) {
    if (!token.is_string()) FailField(id, "tokens", "expected strings");
    record.tokens.push_back(token.get<std::string>());
  }
  record.prompt_label =
      AsInt(Require(object, "prompt_label", id), id, "prompt_label");

  if (auto it = object.find("token_labels");
      it != object.end() && !it->is_null()) {
    if (!it->is_array()) FailField(id, "token_labels", "expected an array");
    std::vector<int> labels;
    for (const Json& label : *it) {
      labels.push_back(AsInt(label, id, "token_labels"));
    }
    record.token_labels = std::move(labels);
  }
  if (auto it = object.find("dep_edges");
      it != object.end() && !it->is_null()) {
    record.dep_edges = ParseArcs(*it, id);
  }
  ValidateRecord(record);

  EncoderOutput& encoding = example.encoding;
  encoding.tokens = record.tokens;
  const Json& hidden = Require(object, "hidden", id);
  if (!hidden.is_array()) FailField(id, "hidden", "expected an array");
  const int rows = static_cast<int>(hidden.size());
  if (rows != static_cast<int>(record.tokens.size())) {
    throw DimensionError("record '" + id + "': field 'hidden': " +
                         std::to_string(rows) + " rows for " +
                         std::to_string(record.tokens.size()) + " tokens");
  }
  const int cols = hidden[0].is_array() ? static_cast<int>(hidden[0].size()) : 0;
  encoding.hidden.resize(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const Json& row = hidden[i];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw DimensionError("record '" + id + "': field 'hidden': row " +
                           std::to_string(i) + " width differs from " +
                           std::to_string(cols));
    }
    for (int j = 0; j < cols; ++j) {
      encoding.hidden(i, j) = AsReal(row[j], id, "hidden");
    }
  }
  const Json& attn = Require(object, "attn", id);
  if (!attn.is_array()) FailField(id, "attn", "expected an array");
  encoding.attention.reserve(attn.size());
  for (const Json& triplet : attn) {
    if (!triplet.is_array() || triplet.size() != 3) {
      FailField(id, "attn", "expected [i, j, value] triplets");
    }
    encoding.attention.push_back({AsInt(triplet[0], id, "attn"),
                                  AsInt(triplet[1], id, "attn"),
                                  AsReal(triplet[2], id, "attn")});
  }
  ValidateEncoding(id, encoding);
  return example;
}

std::string FormatInterchangeLine(const Example& example) {
  const PromptRecord& record = example.record;
  const EncoderOutput& encoding = example.encoding;
  Json object = Json::object();
  object["id"] = record.id;
  object["domain"] = record.domain;
  object["tokens"] = record.tokens;
  object["prompt_label"] = record.prompt_label;
  if (record.token_labels.has_value()) {
    object["token_labels"] = *record.token_labels;
  }
  if (record.dep_edges.has_value()) {
    Json arcs = Json::array();
    for (const DependencyArc& arc : *record.dep_edges) {
      arcs.push_back({arc.head, arc.dependent});
    }
    object["dep_edges"] = std::move(arcs);
  }
  Json hidden = Json::array();
  for (Eigen::Index i = 0; i < encoding.hidden.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < encoding.hidden.cols(); ++j) {
      row.push_back(RoundSignificant(encoding.hidden(i, j)));
    }
    hidden.push_back(std::move(row));
  }
  object["hidden"] = std::move(hidden);
  Json attn = Json::array();
  for (const AttentionEntry& entry : encoding.attention) {
    attn.push_back({entry.row, entry.col, RoundSignificant(entry.value)});
  }
  object["attn"] = std::move(attn);
  return object.dump();
}

InterchangeReader::InterchangeReader(const std::string& path)
    : file_(path), in_(&file_) {
  if (!file_) throw ValidationError("cannot open interchange file " + path);
}

InterchangeReader::InterchangeReader(std::istream& in) : in_(&in) {}

std::optional<Example> InterchangeReader::Next() {
  std::string line;
  while (std::getline(*in_, line)) {
    ++line_number_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      return ParseInterchangeLine(line);
    } catch (const DimensionError& e) {
      throw DimensionError("line " + std::to_string(line_number_) + ": " +
                           e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_number_) + ": " +
                            e.what());
    }
  }
  return std::nullopt;
}

InterchangeWriter::InterchangeWriter(const std::string& path)
    : file_(path), out_(&file_) {
  if (!file_) throw ValidationError("cannot write interchange file " + path);
}

InterchangeWriter::InterchangeWriter(std::ostream& out) : out_(&out) {}

void InterchangeWriter::Write(const Example& example) {
  ValidateRecord(example.record);
  ValidateEncoding(example.record.id, example.encoding);
  *out_ << FormatInterchangeLine(example) << '\n';
  if (!*out_) throw ValidationError("write failed");
}

std::vector<Example> LoadInterchange(const std::string& path) {
  InterchangeReader reader(path);
  std::vector<Example> examples;
  while (auto example = reader.Next()) examples.push_back(std::move(*example));
  return examples;
}

void WriteInterchange(std::span<const Example> examples,
                      const std::string& path) {
  InterchangeWriter writer(path);
  for (const Example& example : examples) writer.Write(example);
}

namespace {

// Plain quadratic LCS table over the trimmed middle section.
std::vector<uint32_t> LcsTable(std::span<const std::string> a,
                               std::span<const std::string> b) {
  const size_t n = a.size();
  const size_t m = b.size();
  std::vector<uint32_t> table((n + 1) * (m + 1), 0);
  auto at = [m](size_t i, size_t j) { return i * (m + 1) + j; };
  for (size_t i = n; i-- > 0;) {
    for (size_t j = m; j-- > 0;) {
      table[at(i, j)] = a[i] == b[j]
                            ? table[at(i + 1, j + 1)] + 1
                            : std::max(table[at(i + 1, j)], table[at(i, j + 1)]);
    }
  }
  return table;
}

}  // namespace

std::vector<int> AlignTokenLabels(std::span<const std::string> benign,
                                  std::span<const std::string> adversarial) {
  std::vector<int> labels(adversarial.size(), 1);
  size_t prefix = 0;
  while (prefix < benign.size() && prefix < adversarial.size() &&
         benign[prefix] == adversarial[prefix]) {
    labels[prefix] = 0;
    ++prefix;
  }
  size_t suffix = 0;
  while (suffix < benign.size() - prefix &&
         suffix < adversarial.size() - prefix &&
         benign[benign.size() - 1 - suffix] ==
             adversarial[adversarial.size() - 1 - suffix]) {
    labels[adversarial.size() - 1 - suffix] = 0;
    ++suffix;
  }
  auto a = benign.subspan(prefix, benign.size() - prefix - suffix);
  auto b = adversarial.subspan(prefix, adversarial.size() - prefix - suffix);
  if (a.empty() || b.empty()) return labels;

  const std::vector<uint32_t> table = LcsTable(a, b);
  const size_t m = b.size();
  auto at = [m](size_t i, size_t j) { return i * (m + 1) + j; };
  size_t i = 0;
  size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      labels[prefix + j] = 0;
      ++i;
      ++j;
    } else if (table[at(i + 1, j)] > table[at(i, j + 1)]) {
      ++i;  // benign-side deletion, no label
    } else {
      ++j;  // adversarial-side insertion stays labeled 1
    }
  }
  return labels;
}

int LcsLength(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  return static_cast<int>(LcsTable(a, b)[0]);
}

Vector ToyContentVector(const std::string& token, int dim, uint64_t seed) {
  Rng rng(DeriveSeed(seed, Fnv1a64(token)));
  Vector content(dim);
  for (int j = 0; j < dim; ++j) content[j] = rng.Normal();
  return content / content.norm();
}

EncoderOutput ToyEncode(std::span<const std::string> tokens, int dim,
                        uint64_t seed) {
  if (dim < 4 || dim % 2 != 0) {
    throw ValidationError("toy encoder width must be even and >= 4, got " +
                          std::to_string(dim));
  }
  if (tokens.empty()) throw ValidationError("toy encoder needs >= 1 token");
  const int n = static_cast<int>(tokens.size());
  EncoderOutput out;
  out.tokens.assign(tokens.begin(), tokens.end());
  out.hidden.resize(n, dim);
  const double position_scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int i = 0; i < n; ++i) {
    out.hidden.row(i) = ToyContentVector(out.tokens[i], dim, seed).transpose();
    for (int m = 0; m < dim / 2; ++m) {
      const double rate =
          std::pow(10000.0, -2.0 * m / static_cast<double>(dim));
      out.hidden(i, 2 * m) += position_scale * std::sin(i * rate);
      out.hidden(i, 2 * m + 1) += position_scale * std::cos(i * rate);
    }
  }
  const Matrix logits =
      out.hidden * out.hidden.transpose() / std::sqrt(static_cast<double>(dim));
  out.attention.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const double peak = logits.row(i).maxCoeff();
    Eigen::RowVectorXd weights = (logits.row(i).array() - peak).exp();
    weights /= weights.sum();
    for (int j = 0; j < n; ++j) out.attention.push_back({i, j, weights[j]});
  }
  return out;
}

namespace {

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> columns;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    columns.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return columns;
}

bool ParseWholeInt(std::string_view text, int* value) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, *value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::vector<ConlluSentence> ParseConllu(std::istream& in) {
  std::vector<ConlluSentence> sentences;
  ConlluSentence current;
  std::vector<std::pair<int, int64_t>> heads;  // (head, line number)
  bool open = false;
  int64_t line_number = 0;

  auto finish = [&]() {
    if (!open) return;
    for (size_t k = 0; k < heads.size(); ++k) {
      const auto [head, where] = heads[k];
      if (head < 0 || head > current.token_count) {
        throw ValidationError("CoNLL-U line " + std::to_string(where) +
                              ": HEAD " + std::to_string(head) +
                              " out of range for a sentence of " +
                              std::to_string(current.token_count) + " tokens");
      }
      if (head != 0) {
        current.arcs.push_back({head - 1, static_cast<int>(k)});
      }
    }
    sentences.push_back(std::move(current));
    current = ConlluSentence();
    heads.clear();
    open = false;
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish();
      continue;
    }
    if (line[0] == '#') {
      constexpr std::string_view kSentId = "# sent_id =";
      if (line.rfind(kSentId, 0) == 0) {
        std::string id = line.substr(kSentId.size());
        id.erase(0, id.find_first_not_of(' '));
        id.erase(id.find_last_not_of(' ') + 1);
        current.sent_id = id;
      }
      open = true;
      continue;
    }
    open = true;
    const auto columns = SplitTabs(line);
    if (columns.size() != 10) {
      throw ValidationError("CoNLL-U line " + std::to_string(line_number) +
                            ": expected 10 columns, got " +
                            std::to_string(columns.size()));
    }
    const std::string_view id_column = columns[0];
    // Multiword ranges (1-2) and empty nodes (1.1) carry no basic arc.
    if (id_column.find_first_of("-.") != std::string_view::npos) continue;
    int id = 0;
    if (!ParseWholeInt(id_column, &id) || id != current.token_count + 1) {
      throw ValidationError("CoNLL-U line " + std::to_string(line_number) +
                            ": unexpected ID '" + std::string(id_column) +
                            "'");
    }
    int head = 0;
    if (!ParseWholeInt(columns[6], &head)) {
      throw ValidationError("CoNLL-U line " + std::to_string(line_number) +
                            ": non-integer HEAD '" + std::string(columns[6]) +
                            "'");
    }
    ++current.token_count;
    heads.emplace_back(head, line_number);
  }
  finish();
  return sentences;
}

std::vector<ConlluSentence> LoadConllu(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open CoNLL-U file " + path);
  return ParseConllu(in);
}

int AttachDependencies(std::span<Example> examples,
                       std::span<const ConlluSentence> sentences) {
  std::map<std::string, const ConlluSentence*> by_id;
  for (const ConlluSentence& sentence : sentences) {
    if (!sentence.sent_id.empty()) by_id[sentence.sent_id] = &sentence;
  }
  int attached = 0;
  for (Example& example : examples) {
    PromptRecord& record = example.record;
    if (record.dep_edges.has_value()) continue;
    auto it = by_id.find(record.id);
    if (it == by_id.end()) continue;
    if (it->second->token_count != static_cast<int>(record.tokens.size())) {
      FailField(record.id, "dep_edges",
                "CoNLL-U sentence has " +
                    std::to_string(it->second->token_count) +
                    " words but the record has " +
                    std::to_string(record.tokens.size()) + " tokens");
    }
    record.dep_edges = it->second->arcs;
    ++attached;
  }
  return attached;
}

std::vector<std::string> FoldAssignment::Members(int fold) const {
  std::vector<std::string> ids;
  for (const auto& [id, f] : assignment) {
    if (f == fold) ids.push_back(id);
  }
  return ids;
}

FoldAssignment StratifiedKFold(std::span<const PromptRecord> records, int k,
                               uint64_t seed) {
  if (k < 2) throw ValidationError("fold count must be >= 2");
  std::vector<std::string> by_class[2];
  std::set<std::string> ids;
  for (const PromptRecord& record : records) {
    if (!ids.insert(record.id).second) {
      throw ValidationError("duplicate record id '" + record.id + "'");
    }
    by_class[record.prompt_label == 1 ? 1 : 0].push_back(record.id);
  }
  for (int c = 0; c < 2; ++c) {
    if (static_cast<int>(by_class[c].size()) < k) {
      throw ValidationError("class " + std::to_string(c) + " has " +
                            std::to_string(by_class[c].size()) +
                            " records, fewer than " + std::to_string(k) +
                            " folds");
    }
  }
  FoldAssignment folds;
  folds.fold_count = k;
  Rng rng(seed);
  size_t rotation = 0;
  for (auto& members : by_class) {
    rng.Shuffle(std::span<std::string>(members));
    for (const std::string& id : members) {
      folds.assignment[id] = static_cast<int>(rotation % k);
      ++rotation;
    }
  }
  return folds;
}

}  // namespace guardnet
