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

#include "guardnet/detectors.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "guardnet/adam.h"
#include "guardnet/errors.h"
#include "guardnet/metrics.h"
#include "guardnet/random.h"

namespace guardnet {
namespace {

// Sub-stream identifiers for DeriveSeed.
enum SeedStream : uint64_t {
  kSplitStream = 1,
  kInitStream = 2,
  kShuffleStream = 3,
  kNegativeStream = 4,
  kDropoutStream = 5,
};

struct LevelData {
  std::vector<double> scores;
  std::vector<int> labels;
};

LevelData Score(const DetectorModel& model,
                std::span<const GraphSample* const> samples) {
  LevelData data;
  for (const GraphSample* sample : samples) {
    const Matrix logits = ModelForward(model, sample->graph, sample->neighbors);
    const std::vector<double> probs = AdversarialProbabilities(logits);
    if (model.level == DetectorLevel::kPrompt) {
      data.scores.push_back(probs[0]);
      data.labels.push_back(sample->prompt_label);
    } else {
      data.scores.insert(data.scores.end(), probs.begin(), probs.end());
      data.labels.insert(data.labels.end(), sample->token_labels.begin(),
                         sample->token_labels.end());
    }
  }
  return data;
}

std::vector<LabeledGraph> Labeled(std::span<const GraphSample* const> samples,
                                  DetectorLevel level) {
  std::vector<LabeledGraph> batch;
  batch.reserve(samples.size());
  for (const GraphSample* sample : samples) {
    batch.push_back({&sample->graph, &sample->neighbors,
                     level == DetectorLevel::kPrompt
                         ? std::span<const int>(&sample->prompt_label, 1)
                         : std::span<const int>(sample->token_labels)});
  }
  return batch;
}

bool BothClasses(std::span<const int> labels) {
  bool has[2] = {false, false};
  for (int y : labels) has[y == 1 ? 1 : 0] = true;
  return has[0] && has[1];
}

TrainResult TrainDetector(DetectorLevel level, const SampleRefs& pool,
                          const TrainConfig& config) {
  const bool prompt = level == DetectorLevel::kPrompt;
  const int epochs = prompt ? config.epochs_prompt : config.epochs_token;
  const int batch_size = prompt ? config.batch_prompt : config.batch_token;
  const LossConfig& loss = prompt ? config.prompt_loss : config.token_loss;
  const uint64_t seed = DeriveSeed(config.seed, prompt ? 100 : 200);

  const SampleSplit split =
      StratifiedSplit(pool, config.val_fraction, DeriveSeed(seed, kSplitStream));
  const int input_dim = split.train.front()->graph.feature_dim();
  ArchSpec arch = prompt ? ArchSpec::Prompt(input_dim, config.hidden)
                         : ArchSpec::Token(input_dim, config.hidden);
  arch.residual = config.residual;
  DetectorModel model = InitModel(arch, DeriveSeed(seed, kInitStream));
  AdamOptions adam_options;
  adam_options.learning_rate = config.learning_rate;
  AdamState adam(adam_options, model);
  Rng shuffle_rng(DeriveSeed(seed, kShuffleStream));
  Rng dropout_rng(DeriveSeed(seed, kDropoutStream));
  const DropoutSpec dropout{config.dropout, &dropout_rng};

  const std::vector<LabeledGraph> train = Labeled(split.train, level);
  const std::vector<LabeledGraph> validation = Labeled(split.validation, level);
  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result;
  DetectorModel best = model;
  double best_f1 = -1.0;
  double best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;
  DetectorModel grads;
  std::vector<LabeledGraph> batch;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    shuffle_rng.Shuffle(std::span<size_t>(order));
    double loss_sum = 0.0;
    for (size_t start = 0; start < order.size(); start += batch_size) {
      const size_t stop = std::min(order.size(), start + batch_size);
      batch.clear();
      for (size_t k = start; k < stop; ++k) batch.push_back(train[order[k]]);
      const double batch_loss =
          ComputeGradients(model, batch, loss, &grads, 1.0, &dropout);
      loss_sum += batch_loss * static_cast<double>(batch.size());
      adam.Step(model, grads);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(order.size());
    record.val_loss = BatchLoss(model, validation, loss);
    const LevelData val = Score(model, split.validation);
    record.threshold = 0.5;
    if (config.tune_thresholds && BothClasses(val.labels)) {
      record.threshold = TuneThreshold(val.scores, val.labels).threshold;
    }
    record.val_f1 =
        MetricsFromCounts(
            CountConfusion(ApplyThreshold(val.scores, record.threshold),
                           val.labels))
            .f1;
    if (!std::isfinite(record.train_loss) || !std::isfinite(record.val_loss)) {
      throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
    }
    result.history.push_back(record);

    if (record.val_f1 > best_f1 ||
        (record.val_f1 == best_f1 && record.val_loss < best_loss)) {
      best_f1 = record.val_f1;
      best_loss = record.val_loss;
      best = model;
      best.threshold = record.threshold;
      result.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.early_stop_patience) {
      break;
    }
  }
  result.model = std::move(best);
  return result;
}

}  // namespace

void TrainConfig::Validate() const {
  if (epochs_prompt < 1 || epochs_token < 1) {
    throw ValidationError("epochs must be >= 1");
  }
  if (batch_prompt < 1 || batch_token < 1) {
    throw ValidationError("batch sizes must be >= 1");
  }
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be > 0");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ValidationError("validation fraction must lie in (0, 1)");
  }
  if (early_stop_patience < 1) throw ValidationError("patience must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) {
    throw ValidationError("dropout must lie in [0, 1)");
  }
  prompt_loss.Validate();
  token_loss.Validate();
}

GraphSample MakeGraphSample(const Example& example, const GraphConfig& config) {
  GraphSample sample;
  sample.id = example.record.id;
  sample.domain = example.record.domain;
  sample.prompt_label = example.record.prompt_label;
  sample.tokens = example.record.tokens;
  sample.token_labels = example.record.TokenLabelsOrZero();
  sample.graph =
      BuildHybridGraph(example.encoding, example.record.dep_edges, config);
  sample.neighbors = NeighborIndex(sample.graph);
  return sample;
}

std::vector<GraphSample> BuildGraphSamples(std::span<const Example> examples,
                                           const GraphConfig& config) {
  std::vector<GraphSample> samples;
  samples.reserve(examples.size());
  for (const Example& example : examples) {
    samples.push_back(MakeGraphSample(example, config));
  }
  return samples;
}

SampleRefs AllRefs(std::span<const GraphSample> samples) {
  SampleRefs refs;
  refs.reserve(samples.size());
  for (const GraphSample& sample : samples) refs.push_back(&sample);
  return refs;
}

SampleSplit StratifiedSplit(std::span<const GraphSample* const> samples,
                            double validation_fraction, uint64_t seed) {
  SampleRefs by_class[2];
  for (const GraphSample* sample : samples) {
    by_class[sample->prompt_label == 1 ? 1 : 0].push_back(sample);
  }
  Rng rng(seed);
  SampleSplit split;
  for (SampleRefs& members : by_class) {
    if (members.empty()) continue;
    rng.Shuffle(std::span<const GraphSample*>(members));
    size_t held = static_cast<size_t>(
        std::llround(validation_fraction * static_cast<double>(members.size())));
    if (members.size() >= 2) {
      held = std::clamp<size_t>(held, 1, members.size() - 1);
    } else {
      held = 0;
    }
    split.validation.insert(split.validation.end(), members.begin(),
                            members.begin() + held);
    split.train.insert(split.train.end(), members.begin() + held, members.end());
  }
  if (split.train.empty() || split.validation.empty()) {
    throw ValidationError("too few samples for a train/validation split");
  }
  return split;
}

TrainResult TrainPrompt(std::span<const GraphSample* const> samples,
                        const TrainConfig& config) {
  config.Validate();
  int counts[2] = {0, 0};
  for (const GraphSample* sample : samples) counts[sample->prompt_label]++;
  if (counts[0] < 2 || counts[1] < 2) {
    throw ValidationError(
        "prompt detector needs at least 2 records of each class (got " +
        std::to_string(counts[0]) + " benign, " + std::to_string(counts[1]) +
        " adversarial)");
  }
  return TrainDetector(DetectorLevel::kPrompt,
                       SampleRefs(samples.begin(), samples.end()), config);
}

TrainResult TrainToken(std::span<const GraphSample* const> samples,
                       const TrainConfig& config) {
  config.Validate();
  SampleRefs adversarial;
  SampleRefs benign;
  for (const GraphSample* sample : samples) {
    (sample->prompt_label == 1 ? adversarial : benign).push_back(sample);
  }
  bool any_positive = false;
  for (const GraphSample* sample : adversarial) {
    for (int y : sample->token_labels) any_positive |= y == 1;
  }
  if (!any_positive) {
    throw ValidationError("token detector needs at least one adversarial token");
  }
  SampleRefs pool = adversarial;
  if (config.token_benign_negatives && !benign.empty()) {
    Rng rng(DeriveSeed(config.seed, kNegativeStream));
    rng.Shuffle(std::span<const GraphSample*>(benign));
    const size_t take = std::min(benign.size(), adversarial.size());
    pool.insert(pool.end(), benign.begin(), benign.begin() + take);
  }
  return TrainDetector(DetectorLevel::kToken, pool, config);
}

std::vector<double> PromptScores(const DetectorModel& model,
                                 std::span<const GraphSample* const> samples) {
  std::vector<double> scores;
  scores.reserve(samples.size());
  for (const GraphSample* sample : samples) {
    scores.push_back(AdversarialProbabilities(
        ModelForward(model, sample->graph, sample->neighbors))[0]);
  }
  return scores;
}

std::vector<std::vector<double>> TokenScores(
    const DetectorModel& model, std::span<const GraphSample* const> samples) {
  std::vector<std::vector<double>> scores;
  scores.reserve(samples.size());
  for (const GraphSample* sample : samples) {
    scores.push_back(AdversarialProbabilities(
        ModelForward(model, sample->graph, sample->neighbors)));
  }
  return scores;
}

std::vector<double> ThresholdCandidates(std::span<const double> scores) {
  std::vector<double> unique(scores.begin(), scores.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<double> candidates = {0.0, 1.0};
  for (size_t i = 0; i + 1 < unique.size(); ++i) {
    candidates.push_back(unique[i] + (unique[i + 1] - unique[i]) / 2.0);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  return candidates;
}

ThresholdChoice TuneThreshold(std::span<const double> scores,
                              std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError("threshold tuning: score/label length mismatch");
  }
  if (!BothClasses(labels)) {
    throw ValidationError("threshold tuning needs both classes");
  }
  // Sweep candidates upward while a pointer walks the ascending scores;
  // everything at or below the candidate is predicted negative.
  std::vector<std::pair<double, int>> sorted;
  sorted.reserve(scores.size());
  int64_t positives = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    sorted.emplace_back(scores[i], labels[i]);
    positives += labels[i] == 1;
  }
  std::sort(sorted.begin(), sorted.end());
  const int64_t total = static_cast<int64_t>(sorted.size());
  ThresholdChoice best{0.0, -1.0};
  size_t below = 0;
  int64_t positives_below = 0;
  for (double candidate : ThresholdCandidates(scores)) {
    while (below < sorted.size() && sorted[below].first <= candidate) {
      positives_below += sorted[below].second == 1;
      ++below;
    }
    ConfusionCounts counts;
    counts.tp = positives - positives_below;
    counts.fp = (total - static_cast<int64_t>(below)) - counts.tp;
    counts.fn = positives_below;
    counts.tn = static_cast<int64_t>(below) - positives_below;
    const double f1 = MetricsFromCounts(counts).f1;
    if (f1 > best.f1) best = {candidate, f1};
  }
  return best;
}

std::vector<std::string> MaskTokens(std::span<const std::string> tokens,
                                    std::span<const int> mask) {
  if (tokens.size() != mask.size()) {
    throw DimensionError("mask length " + std::to_string(mask.size()) +
                         " differs from token count " +
                         std::to_string(tokens.size()));
  }
  std::vector<std::string> sanitized(tokens.begin(), tokens.end());
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 1) sanitized[i] = std::string(kMaskToken);
  }
  return sanitized;
}

FilterResult FilterPrompt(const DetectorModel& prompt_model,
                          const DetectorModel& token_model,
                          const TokenGraph& graph,
                          const NeighborIndex& neighbors,
                          std::span<const std::string> tokens,
                          double tau_prompt, double tau_token,
                          FilterCounters* counters) {
  if (static_cast<int>(tokens.size()) != graph.num_nodes()) {
    throw DimensionError("token count differs from graph node count");
  }
  FilterResult result;
  result.prompt_score = AdversarialProbabilities(
      ModelForward(prompt_model, graph, neighbors))[0];
  if (counters != nullptr) ++counters->prompt_passes;
  if (result.prompt_score <= tau_prompt) {
    result.prompt_decision = 0;
    result.sanitized_tokens.assign(tokens.begin(), tokens.end());
    return result;
  }
  std::vector<double> token_scores =
      AdversarialProbabilities(ModelForward(token_model, graph, neighbors));
  if (counters != nullptr) ++counters->token_passes;
  std::vector<int> mask = ApplyThreshold(token_scores, tau_token);
  result.prompt_decision = 1;
  result.sanitized_tokens = MaskTokens(tokens, mask);
  result.mask = std::move(mask);
  result.token_scores = std::move(token_scores);
  return result;
}

}  // namespace guardnet
