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

#include "guardnet/eval.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "guardnet/config.h"
#include "guardnet/errors.h"
#include "guardnet/random.h"
#include "json.hpp"

namespace guardnet {
namespace {

using OrderedJson = ConfigJson;

constexpr uint64_t kFoldSplitStream = 11;

std::vector<PromptRecord> RecordsOf(std::span<const GraphSample> samples) {
  std::vector<PromptRecord> records;
  records.reserve(samples.size());
  for (const GraphSample& sample : samples) {
    PromptRecord record;
    record.id = sample.id;
    record.prompt_label = sample.prompt_label;
    records.push_back(std::move(record));
  }
  return records;
}

ScoredSet Concatenate(std::span<const ScoredSet> sets) {
  ScoredSet all;
  for (const ScoredSet& set : sets) {
    all.scores.insert(all.scores.end(), set.scores.begin(), set.scores.end());
    all.labels.insert(all.labels.end(), set.labels.begin(), set.labels.end());
  }
  return all;
}

bool HasClass(std::span<const int> labels, int c) {
  return std::find(labels.begin(), labels.end(), c) != labels.end();
}

struct FoldJob {
  FoldTraining training;
  FoldMetrics prompt;
  FoldMetrics token;
  ScoredSet prompt_set;
  ScoredSet token_set;
};

// Runs `work(i)` for i in [0, count) on up to `jobs` threads. Results are
// written by index, so the outcome does not depend on scheduling.
template <typename Work>
void RunParallel(int count, int jobs, Work work) {
  jobs = std::clamp(jobs, 1, std::max(count, 1));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  for (int t = 0; t < jobs; ++t) {
    threads.emplace_back([&]() {
      for (int i = next++; i < count; i = next++) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& thread : threads) thread.join();
  if (failure) std::rethrow_exception(failure);
}

FoldJob TrainAndEvaluate(int fold, const SampleRefs& train,
                         const SampleRefs& test, const EvalOptions& options) {
  FoldJob job;
  TrainConfig config = options.train;
  config.seed = DeriveSeed(options.seed, static_cast<uint64_t>(fold));
  const TrainResult prompt = TrainPrompt(train, config);
  const TrainResult token = TrainToken(train, config);
  job.training = {fold,
                  config.seed,
                  prompt.history,
                  token.history,
                  prompt.model.threshold,
                  token.model.threshold};
  job.prompt_set = PromptLevelSet(prompt.model, test);
  job.token_set = TokenLevelSet(token.model, test);
  job.prompt = EvaluateScores(job.prompt_set, prompt.model.threshold,
                              DetectorLevel::kPrompt, fold);
  job.token = EvaluateScores(job.token_set, token.model.threshold,
                             DetectorLevel::kToken, fold);
  return job;
}

EvalOutcome Collect(std::string mode, std::vector<FoldJob>& jobs) {
  EvalOutcome outcome;
  outcome.mode = std::move(mode);
  std::vector<FoldMetrics> prompt_folds;
  std::vector<FoldMetrics> token_folds;
  std::vector<ScoredSet> prompt_sets;
  std::vector<ScoredSet> token_sets;
  for (FoldJob& job : jobs) {
    prompt_folds.push_back(job.prompt);
    token_folds.push_back(job.token);
    prompt_sets.push_back(std::move(job.prompt_set));
    token_sets.push_back(std::move(job.token_set));
    outcome.training.push_back(std::move(job.training));
  }
  outcome.prompt =
      BuildReport(DetectorLevel::kPrompt, std::move(prompt_folds), prompt_sets);
  outcome.token =
      BuildReport(DetectorLevel::kToken, std::move(token_folds), token_sets);
  return outcome;
}

StageTiming Stats(std::vector<double> samples_ms) {
  StageTiming timing;
  timing.count = static_cast<int64_t>(samples_ms.size());
  if (samples_ms.empty()) return timing;
  const Summary summary = Summarize(samples_ms);
  timing.mean_ms = summary.mean;
  timing.std_ms = summary.std;
  const size_t mid = samples_ms.size() / 2;
  std::nth_element(samples_ms.begin(), samples_ms.begin() + mid,
                   samples_ms.end());
  timing.median_ms = samples_ms[mid];
  if (samples_ms.size() % 2 == 0) {
    const double lower =
        *std::max_element(samples_ms.begin(), samples_ms.begin() + mid);
    timing.median_ms = (timing.median_ms + lower) / 2.0;
  }
  return timing;
}

OrderedJson SummaryJson(const Summary& s) {
  return {{"mean", s.mean}, {"std", s.std}};
}

std::string PercentCell(const Summary& s) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.2f \xC2\xB1 %.2f", 100.0 * s.mean,
                100.0 * s.std);
  return buffer;
}

OrderedJson OptionalNumber(const std::optional<double>& value) {
  return value.has_value() ? OrderedJson(*value) : OrderedJson(nullptr);
}

OrderedJson FoldJson(const FoldMetrics& fold, DetectorLevel level) {
  OrderedJson row = {{"section", "fold"},
                     {"level", LevelName(level)},
                     {"fold", fold.fold},
                     {"population", fold.population},
                     {"threshold", fold.threshold},
                     {"acc", fold.metrics.accuracy},
                     {"precision", fold.metrics.precision},
                     {"recall", fold.metrics.recall},
                     {"f1", fold.metrics.f1}};
  if (level == DetectorLevel::kToken) row["iou"] = fold.metrics.iou;
  row["auc"] = OptionalNumber(fold.auc);
  row["ap"] = OptionalNumber(fold.ap);
  return row;
}

std::vector<std::string> TableColumns(DetectorLevel level) {
  std::vector<std::string> columns = {"acc", "precision", "recall", "f1"};
  if (level == DetectorLevel::kToken) columns.push_back("iou");
  return columns;
}

OrderedJson TableRow(const std::string& table, const std::string& system,
                     const std::string& dataset, const EvalReport& report) {
  OrderedJson row = {{"section", "table"},
                     {"table", table},
                     {"system", system},
                     {"dataset", dataset}};
  for (const std::string& column : TableColumns(report.level)) {
    auto it = report.aggregate.find(column);
    if (it != report.aggregate.end()) row[column] = PercentCell(it->second);
  }
  return row;
}

}  // namespace

Summary Summarize(std::span<const double> values) {
  Summary summary;
  if (values.empty()) return summary;
  const double n = static_cast<double>(values.size());
  summary.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double squares = 0.0;
  for (double v : values) squares += (v - summary.mean) * (v - summary.mean);
  summary.std = std::sqrt(squares / n);
  return summary;
}

FoldMetrics EvaluateScores(const ScoredSet& set, double threshold,
                           DetectorLevel level, int fold) {
  if (set.scores.size() != set.labels.size()) {
    throw DimensionError("score/label length mismatch");
  }
  FoldMetrics result;
  result.fold = fold;
  result.population = static_cast<int64_t>(set.scores.size());
  result.threshold = threshold;
  if (set.scores.empty()) return result;
  result.metrics = TokenMetrics(ApplyThreshold(set.scores, threshold), set.labels);
  if (level == DetectorLevel::kPrompt) result.metrics.iou = 0.0;
  if (HasClass(set.labels, 1) && HasClass(set.labels, 0)) {
    result.auc = ComputeRoc(set.scores, set.labels).auc;
  }
  if (HasClass(set.labels, 1)) {
    result.ap = ComputePr(set.scores, set.labels).average_precision;
  }
  return result;
}

EvalReport BuildReport(DetectorLevel level, std::vector<FoldMetrics> folds,
                       std::span<const ScoredSet> pooled) {
  EvalReport report;
  report.level = level;
  report.folds = std::move(folds);
  std::map<std::string, std::vector<double>> columns;
  for (const FoldMetrics& fold : report.folds) {
    columns["acc"].push_back(fold.metrics.accuracy);
    columns["precision"].push_back(fold.metrics.precision);
    columns["recall"].push_back(fold.metrics.recall);
    columns["f1"].push_back(fold.metrics.f1);
    if (level == DetectorLevel::kToken) {
      columns["iou"].push_back(fold.metrics.iou);
    }
    if (fold.auc) columns["auc"].push_back(*fold.auc);
    if (fold.ap) columns["ap"].push_back(*fold.ap);
  }
  for (const auto& [name, values] : columns) {
    report.aggregate[name] = Summarize(values);
  }
  const ScoredSet all = Concatenate(pooled);
  if (HasClass(all.labels, 1)) {
    report.pr = ComputePr(all.scores, all.labels);
    if (HasClass(all.labels, 0)) report.roc = ComputeRoc(all.scores, all.labels);
  }
  return report;
}

ScoredSet PromptLevelSet(const DetectorModel& model,
                         std::span<const GraphSample* const> samples) {
  ScoredSet set;
  set.scores = PromptScores(model, samples);
  for (const GraphSample* sample : samples) {
    set.labels.push_back(sample->prompt_label);
  }
  return set;
}

ScoredSet TokenLevelSet(const DetectorModel& model,
                        std::span<const GraphSample* const> samples) {
  SampleRefs adversarial;
  for (const GraphSample* sample : samples) {
    if (sample->prompt_label == 1) adversarial.push_back(sample);
  }
  ScoredSet set;
  const auto scores = TokenScores(model, adversarial);
  for (size_t s = 0; s < adversarial.size(); ++s) {
    set.scores.insert(set.scores.end(), scores[s].begin(), scores[s].end());
    set.labels.insert(set.labels.end(), adversarial[s]->token_labels.begin(),
                      adversarial[s]->token_labels.end());
  }
  return set;
}

EvalOutcome RunCrossval(std::span<const GraphSample> dataset,
                        const EvalOptions& options) {
  options.train.Validate();
  const std::vector<PromptRecord> records = RecordsOf(dataset);
  const FoldAssignment folds = StratifiedKFold(
      records, options.folds, DeriveSeed(options.seed, kFoldSplitStream));
  std::vector<SampleRefs> test(options.folds);
  std::vector<SampleRefs> train(options.folds);
  for (const GraphSample& sample : dataset) {
    const int fold = folds.assignment.at(sample.id);
    for (int f = 0; f < options.folds; ++f) {
      (f == fold ? test[f] : train[f]).push_back(&sample);
    }
  }
  std::vector<FoldJob> jobs(options.folds);
  RunParallel(options.folds, options.jobs, [&](int f) {
    jobs[f] = TrainAndEvaluate(f, train[f], test[f], options);
  });
  EvalOutcome outcome = Collect("cv", jobs);
  outcome.evaluated_in = folds.assignment;
  return outcome;
}

EvalOutcome RunCrossDomain(std::span<const GraphSample> source,
                           std::span<const GraphSample> target,
                           const EvalOptions& options) {
  options.train.Validate();
  if (target.empty()) throw ValidationError("empty target dataset");
  const std::vector<PromptRecord> records = RecordsOf(source);
  const FoldAssignment folds = StratifiedKFold(
      records, options.folds, DeriveSeed(options.seed, kFoldSplitStream));
  std::vector<SampleRefs> train(options.folds);
  for (const GraphSample& sample : source) {
    const int fold = folds.assignment.at(sample.id);
    for (int f = 0; f < options.folds; ++f) {
      if (f != fold) train[f].push_back(&sample);
    }
  }
  const SampleRefs everything = AllRefs(target);
  std::vector<FoldJob> jobs(options.folds);
  RunParallel(options.folds, options.jobs, [&](int f) {
    jobs[f] = TrainAndEvaluate(f, train[f], everything, options);
  });
  return Collect("transfer", jobs);
}

LatencyReport MeasureLatency(const DetectorModel& prompt_model,
                             const DetectorModel& token_model,
                             std::span<const Example> examples,
                             const GraphConfig& graph_config, int repetitions,
                             std::optional<double> budget_ms) {
  if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
  if (examples.empty()) throw ValidationError("latency over an empty dataset");
  using Clock = std::chrono::steady_clock;
  auto ms = [](Clock::duration d) {
    return std::chrono::duration<double, std::milli>(d).count();
  };
  std::vector<double> build_ms;
  std::vector<double> prompt_ms;
  std::vector<double> token_ms;
  std::vector<double> total_ms;
  // Pass 0 warms caches and is not recorded.
  for (int rep = 0; rep <= repetitions; ++rep) {
    for (const Example& example : examples) {
      const auto t0 = Clock::now();
      const TokenGraph graph = BuildHybridGraph(
          example.encoding, example.record.dep_edges, graph_config);
      const NeighborIndex neighbors(graph);
      const auto t1 = Clock::now();
      const double score = AdversarialProbabilities(
          ModelForward(prompt_model, graph, neighbors))[0];
      const auto t2 = Clock::now();
      bool token_ran = false;
      if (score > prompt_model.threshold) {
        const auto probs = AdversarialProbabilities(
            ModelForward(token_model, graph, neighbors));
        token_ran = !probs.empty();
      }
      const auto t3 = Clock::now();
      if (rep == 0) continue;
      build_ms.push_back(ms(t1 - t0));
      prompt_ms.push_back(ms(t2 - t1));
      if (token_ran) token_ms.push_back(ms(t3 - t2));
      total_ms.push_back(ms(t3 - t0));
    }
  }
  LatencyReport report;
  report.graph_build = Stats(build_ms);
  report.prompt_pass = Stats(prompt_ms);
  report.token_pass = Stats(token_ms);
  report.end_to_end = Stats(total_ms);
  report.budget_ms = budget_ms;
  if (budget_ms) report.over_budget = report.end_to_end.mean_ms > *budget_ms;
  return report;
}

ExternalScores ParseExternalScores(std::istream& in) {
  ExternalScores scores;
  std::string line;
  int64_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream fields(line);
    std::string id;
    if (!(fields >> id) || id[0] == '#') continue;
    std::vector<double> values;
    std::string text;
    while (fields >> text) {
      char* end = nullptr;
      const double value = std::strtod(text.c_str(), &end);
      if (end != text.c_str() + text.size() || !std::isfinite(value)) {
        throw ValidationError("score file line " + std::to_string(line_number) +
                              ": bad score '" + text + "'");
      }
      values.push_back(value);
    }
    if (values.empty()) {
      throw ValidationError("score file line " + std::to_string(line_number) +
                            ": no scores for id '" + id + "'");
    }
    if (!scores.emplace(id, std::move(values)).second) {
      throw ValidationError("score file: duplicate id '" + id + "'");
    }
  }
  return scores;
}

ExternalScores IngestExternalScores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open score file " + path);
  return ParseExternalScores(in);
}

ScoredSet ExternalScoredSet(const ExternalScores& scores,
                            std::span<const GraphSample* const> samples,
                            DetectorLevel level) {
  ScoredSet set;
  for (const GraphSample* sample : samples) {
    if (level == DetectorLevel::kToken && sample->prompt_label != 1) continue;
    auto it = scores.find(sample->id);
    if (it == scores.end()) {
      throw ValidationError("external scores: missing id '" + sample->id + "'");
    }
    const std::vector<double>& values = it->second;
    if (level == DetectorLevel::kPrompt) {
      if (values.size() != 1) {
        throw DimensionError("external scores: id '" + sample->id +
                             "' needs exactly one prompt score");
      }
      set.scores.push_back(values[0]);
      set.labels.push_back(sample->prompt_label);
    } else {
      if (values.size() != sample->tokens.size()) {
        throw DimensionError("external scores: id '" + sample->id + "' has " +
                             std::to_string(values.size()) +
                             " token scores for " +
                             std::to_string(sample->tokens.size()) + " tokens");
      }
      set.scores.insert(set.scores.end(), values.begin(), values.end());
      set.labels.insert(set.labels.end(), sample->token_labels.begin(),
                        sample->token_labels.end());
    }
  }
  return set;
}

void WriteReport(const ReportHeader& header, const EvalOutcome& outcome,
                 std::span<const SystemRow> extra_rows, std::ostream& out) {
  OrderedJson run = {{"section", "run"},
                     {"mode", header.mode},
                     {"dataset", header.dataset}};
  if (!header.target.empty()) run["target"] = header.target;
  run["folds"] = header.options.folds;
  run["seed"] = header.options.seed;
  run["graph"] = GraphConfigToJson(header.graph);
  run["train"] = TrainConfigToJson(header.options.train);
  out << run.dump() << '\n';

  const bool transfer = outcome.mode == "transfer";
  const std::string dataset =
      transfer ? header.dataset + " -> " + header.target : header.dataset;
  for (const EvalReport* report : {&outcome.prompt, &outcome.token}) {
    if (report->folds.empty()) continue;
    for (const FoldMetrics& fold : report->folds) {
      out << FoldJson(fold, report->level).dump() << '\n';
    }
    OrderedJson aggregate = {{"section", "aggregate"},
                             {"level", LevelName(report->level)},
                             {"folds", report->folds.size()}};
    for (const auto& [name, summary] : report->aggregate) {
      aggregate[name] = SummaryJson(summary);
    }
    out << aggregate.dump() << '\n';
    OrderedJson curve = {{"section", "curve"},
                         {"level", LevelName(report->level)}};
    curve["pooled_auc"] =
        report->roc ? OrderedJson(report->roc->auc) : OrderedJson(nullptr);
    curve["pooled_ap"] = report->pr ? OrderedJson(report->pr->average_precision)
                                    : OrderedJson(nullptr);
    out << curve.dump() << '\n';
  }
  const std::string prompt_table =
      transfer ? "prompt_cross_domain" : "prompt_level";
  const std::string token_table = transfer ? "token_cross_domain" : "token_level";
  for (const EvalReport* report : {&outcome.prompt, &outcome.token}) {
    if (report->folds.empty()) continue;
    const bool prompt = report->level == DetectorLevel::kPrompt;
    out << TableRow(prompt ? prompt_table : token_table, header.system,
                    dataset, *report)
               .dump()
        << '\n';
  }
  for (const SystemRow& row : extra_rows) {
    const bool prompt = row.report.level == DetectorLevel::kPrompt;
    out << TableRow(prompt ? prompt_table : token_table, row.system,
                    row.dataset, row.report)
               .dump()
        << '\n';
  }
  for (const FoldTraining& training : outcome.training) {
    out << OrderedJson({{"section", "thresholds"},
                        {"fold", training.fold},
                        {"seed", training.seed},
                        {"tau_prompt", training.tau_prompt},
                        {"tau_token", training.tau_token}})
               .dump()
        << '\n';
  }
}

namespace {

std::string FormatReal(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value);
  return buffer;
}

std::string XmlEscape(const std::string& text) {
  std::string escaped;
  for (char c : text) {
    switch (c) {
      case '<': escaped += "&lt;"; break;
      case '>': escaped += "&gt;"; break;
      case '&': escaped += "&amp;"; break;
      case '"': escaped += "&quot;"; break;
      default: escaped += c;
    }
  }
  return escaped;
}

}  // namespace

void WriteRocFile(const RocCurve& curve, std::ostream& out) {
  out << "# threshold fpr tpr (auc " << FormatReal(curve.auc) << ")\n";
  for (const RocPoint& p : curve.points) {
    out << FormatReal(p.threshold) << ' ' << FormatReal(p.fpr) << ' '
        << FormatReal(p.tpr) << '\n';
  }
}

void WritePrFile(const PrCurve& curve, std::ostream& out) {
  out << "# threshold precision recall (ap "
      << FormatReal(curve.average_precision) << ")\n";
  for (const PrPoint& p : curve.points) {
    out << FormatReal(p.threshold) << ' ' << FormatReal(p.precision) << ' '
        << FormatReal(p.recall) << '\n';
  }
}

std::string RenderCurveSvg(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           std::span<const std::pair<double, double>> points) {
  constexpr double kSize = 360.0;
  constexpr double kMargin = 50.0;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << kSize + 2 * kMargin << "\" height=\"" << kSize + 2 * kMargin
      << "\">\n";
  svg << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\""
      << kSize << "\" height=\"" << kSize
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << kMargin + kSize / 2 << "\" y=\"" << kMargin / 2
      << "\" text-anchor=\"middle\">" << XmlEscape(title) << "</text>\n";
  svg << "<text x=\"" << kMargin + kSize / 2 << "\" y=\""
      << kSize + 1.7 * kMargin << "\" text-anchor=\"middle\">" << XmlEscape(x_label)
      << "</text>\n";
  svg << "<text x=\"" << kMargin / 3 << "\" y=\"" << kMargin + kSize / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 " << kMargin / 3
      << ' ' << kMargin + kSize / 2 << ")\">" << XmlEscape(y_label) << "</text>\n";
  svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" "
         "points=\"";
  for (const auto& [x, y] : points) {
    svg << FormatReal(kMargin + std::clamp(x, 0.0, 1.0) * kSize) << ','
        << FormatReal(kMargin + (1.0 - std::clamp(y, 0.0, 1.0)) * kSize)
        << ' ';
  }
  svg << "\"/>\n</svg>\n";
  return svg.str();
}

std::string FormatLatency(const LatencyReport& report) {
  auto stage = [](const StageTiming& t) {
    return OrderedJson{{"count", t.count},
                       {"mean_ms", t.mean_ms},
                       {"median_ms", t.median_ms},
                       {"std_ms", t.std_ms}};
  };
  OrderedJson row = {{"section", "latency"},
                     {"graph_build", stage(report.graph_build)},
                     {"prompt_pass", stage(report.prompt_pass)},
                     {"token_pass", stage(report.token_pass)},
                     {"end_to_end", stage(report.end_to_end)}};
  if (report.budget_ms) {
    row["budget_ms"] = *report.budget_ms;
    row["over_budget"] = report.over_budget;
  }
  return row.dump();
}

std::string FormatTrainingLog(std::span<const EpochRecord> history,
                              std::string_view detector, int fold) {
  std::string text;
  for (const EpochRecord& record : history) {
    OrderedJson row = {{"detector", detector},
                       {"fold", fold},
                       {"epoch", record.epoch},
                       {"train_loss", record.train_loss},
                       {"val_loss", record.val_loss},
                       {"val_f1", record.val_f1},
                       {"threshold", record.threshold}};
    text += row.dump() + "\n";
  }
  return text;
}

}  // namespace guardnet
