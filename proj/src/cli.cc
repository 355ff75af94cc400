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

#include "guardnet/cli.h"

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "guardnet/checkpoint.h"
#include "guardnet/config.h"
#include "guardnet/dataset.h"
#include "guardnet/detectors.h"
#include "guardnet/errors.h"
#include "guardnet/eval.h"
#include "guardnet/synth.h"

namespace guardnet {
namespace {

namespace fs = std::filesystem;

constexpr char kSeedVariable[] = "GUARDNET_SEED";

std::optional<uint64_t> SeedFromEnvironment() {
  const char* text = std::getenv(kSeedVariable);
  if (text == nullptr || *text == '\0') return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const unsigned long long value = std::strtoull(text, &end, 10);
  if (*end != '\0' || errno != 0 || text[0] == '-') {
    throw UsageError(std::string(kSeedVariable) + " is not an unsigned integer: '" +
                     text + "'");
  }
  return value;
}

uint64_t ResolveSeed(const std::optional<uint64_t>& flag,
                     const std::optional<uint64_t>& file, uint64_t fallback) {
  if (flag) return *flag;
  if (file) return *file;
  if (auto env = SeedFromEnvironment()) return *env;
  return fallback;
}

// Training and graph flags shared by train and eval.
struct ModelFlags {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<int> top_k;
  std::optional<int> window;
  bool no_sym_attention = false;
  bool no_sym_dependency = false;
  std::optional<int> epochs_prompt;
  std::optional<int> epochs_token;
  std::optional<int> batch_prompt;
  std::optional<int> batch_token;
  std::optional<double> learning_rate;
  std::optional<int> hidden;
  std::optional<std::string> token_loss;
  std::optional<double> gamma;
  std::optional<int> patience;
  std::optional<double> val_fraction;
  std::optional<double> dropout;
  bool no_tune = false;
  bool no_benign = false;
  bool residual = false;
};

void AddModelFlags(CLI::App* app, ModelFlags* flags) {
  app->add_option("--config", flags->config_path,
                  "JSON run config (flags take precedence)")
      ->check(CLI::ExistingFile);
  app->add_option("--seed", flags->seed, "master seed");
  app->add_option("--top-k", flags->top_k, "attention neighbours per token");
  app->add_option("--window", flags->window, "attention window");
  app->add_flag("--no-sym-attn", flags->no_sym_attention,
                "keep attention edges directed");
  app->add_flag("--no-sym-dep", flags->no_sym_dependency,
                "keep dependency edges directed");
  app->add_option("--epochs-prompt", flags->epochs_prompt);
  app->add_option("--epochs-token", flags->epochs_token);
  app->add_option("--batch-prompt", flags->batch_prompt);
  app->add_option("--batch-token", flags->batch_token);
  app->add_option("--lr", flags->learning_rate, "Adam learning rate");
  app->add_option("--hidden", flags->hidden, "GNN hidden width");
  app->add_option("--token-loss", flags->token_loss,
                  "weighted | alpha | cross_entropy");
  app->add_option("--gamma", flags->gamma, "focal gamma for the token loss");
  app->add_option("--patience", flags->patience, "early-stopping patience");
  app->add_option("--val-fraction", flags->val_fraction);
  app->add_option("--dropout", flags->dropout);
  app->add_flag("--no-tune-thresholds", flags->no_tune,
                "keep thresholds at 0.5");
  app->add_flag("--no-benign-negatives", flags->no_benign,
                "train the token detector on adversarial prompts only");
  app->add_flag("--residual", flags->residual,
                "add a linear skip term to every GAT layer");
}

RunConfig ResolveModelFlags(const ModelFlags& flags) {
  RunConfig config;
  if (!flags.config_path.empty()) config = LoadRunConfig(flags.config_path);
  GraphConfig& graph = config.graph;
  TrainConfig& train = config.train;
  if (flags.top_k) graph.top_k = *flags.top_k;
  if (flags.window) graph.window = *flags.window;
  if (flags.no_sym_attention) graph.symmetrize_attention = false;
  if (flags.no_sym_dependency) graph.symmetrize_dependency = false;
  if (flags.epochs_prompt) train.epochs_prompt = *flags.epochs_prompt;
  if (flags.epochs_token) train.epochs_token = *flags.epochs_token;
  if (flags.batch_prompt) train.batch_prompt = *flags.batch_prompt;
  if (flags.batch_token) train.batch_token = *flags.batch_token;
  if (flags.learning_rate) train.learning_rate = *flags.learning_rate;
  if (flags.hidden) train.hidden = *flags.hidden;
  if (flags.token_loss) train.token_loss = ParseLossPreset(*flags.token_loss);
  if (flags.gamma) train.token_loss.gamma = *flags.gamma;
  if (flags.patience) train.early_stop_patience = *flags.patience;
  if (flags.val_fraction) train.val_fraction = *flags.val_fraction;
  if (flags.dropout) train.dropout = *flags.dropout;
  if (flags.no_tune) train.tune_thresholds = false;
  if (flags.no_benign) train.token_benign_negatives = false;
  if (flags.residual) train.residual = true;
  train.seed = ResolveSeed(flags.seed, config.seed, 0);
  config.seed = train.seed;
  graph.Validate();
  train.Validate();
  return config;
}

std::vector<Example> LoadExamples(const std::string& path,
                                  const std::string& conllu_path) {
  std::vector<Example> examples = LoadInterchange(path);
  if (!conllu_path.empty()) {
    AttachDependencies(examples, LoadConllu(conllu_path));
  }
  return examples;
}

std::vector<Example> FilterDomain(std::vector<Example> examples,
                                  const std::string& domain) {
  if (domain.empty()) return examples;
  std::vector<Example> kept;
  for (Example& example : examples) {
    if (example.record.domain == domain) kept.push_back(std::move(example));
  }
  if (kept.empty()) {
    throw ValidationError("no records with domain '" + domain + "'");
  }
  return kept;
}

std::string DatasetName(const std::string& path, const std::string& domain) {
  std::string name = fs::path(path).filename().string();
  if (!domain.empty()) name += "[" + domain + "]";
  return name;
}

std::ofstream OpenOutput(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  return out;
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out = OpenOutput(path);
  out << text;
  if (!out) throw ValidationError("write failed for " + path);
}

void RequireInputDim(const DetectorModel& model, const Example& example) {
  if (model.input_dim() != example.encoding.dim()) {
    throw DimensionError("record '" + example.record.id + "' has width " +
                         std::to_string(example.encoding.dim()) +
                         " but the checkpoint expects " +
                         std::to_string(model.input_dim()));
  }
}

struct ModelPair {
  Checkpoint prompt;
  Checkpoint token;
};

ModelPair LoadModelPair(const std::string& prompt_path,
                        const std::string& token_path) {
  ModelPair pair{LoadCheckpoint(prompt_path), LoadCheckpoint(token_path)};
  if (pair.prompt.model.level != DetectorLevel::kPrompt) {
    throw ValidationError(prompt_path + " is not a prompt-level checkpoint");
  }
  if (pair.token.model.level != DetectorLevel::kToken) {
    throw ValidationError(token_path + " is not a token-level checkpoint");
  }
  const GraphConfig& a = pair.prompt.metadata.graph;
  const GraphConfig& b = pair.token.metadata.graph;
  if (a.top_k != b.top_k || a.window != b.window ||
      a.symmetrize_attention != b.symmetrize_attention ||
      a.symmetrize_dependency != b.symmetrize_dependency) {
    throw ValidationError("checkpoints were trained with different graph configs");
  }
  if (pair.prompt.model.input_dim() != pair.token.model.input_dim()) {
    throw DimensionError("checkpoints disagree on input width");
  }
  return pair;
}

void WriteCurveFiles(const std::string& dir, DetectorLevel level,
                     const RocCurve* roc, const PrCurve* pr, bool svg) {
  fs::create_directories(dir);
  const std::string stem = (fs::path(dir) / LevelName(level)).string();
  if (roc != nullptr) {
    std::ofstream out = OpenOutput(stem + "_roc.txt");
    WriteRocFile(*roc, out);
    if (svg) {
      std::vector<std::pair<double, double>> points;
      for (const RocPoint& p : roc->points) points.emplace_back(p.fpr, p.tpr);
      WriteText(stem + "_roc.svg",
                RenderCurveSvg(std::string(LevelName(level)) + " ROC", "FPR",
                               "TPR", points));
    }
  }
  if (pr != nullptr) {
    std::ofstream out = OpenOutput(stem + "_pr.txt");
    WritePrFile(*pr, out);
    if (svg) {
      std::vector<std::pair<double, double>> points;
      for (const PrPoint& p : pr->points) {
        points.emplace_back(p.recall, p.precision);
      }
      WriteText(stem + "_pr.svg",
                RenderCurveSvg(std::string(LevelName(level)) + " PR", "recall",
                               "precision", points));
    }
  }
}

// ---------------------------------------------------------------- synth

struct SynthFlags {
  std::string out;
  SynthConfig config;
  std::optional<uint64_t> seed;
};

int RunSynth(const SynthFlags& flags, std::ostream& out) {
  SynthConfig config = flags.config;
  config.seed = ResolveSeed(flags.seed, std::nullopt, config.seed);
  config.Validate();
  const std::vector<Example> examples = GenerateSynthetic(config);
  WriteInterchange(examples, flags.out);
  int adversarial = 0;
  for (const Example& e : examples) adversarial += e.record.prompt_label;
  out << "synth: " << examples.size() << " records (" << adversarial
      << " adversarial, " << config.domain_count << " domain"
      << (config.domain_count == 1 ? "" : "s") << ") -> " << flags.out
      << '\n';
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainFlags {
  std::string data;
  std::string conllu;
  std::string out_dir;
  std::string log;
  ModelFlags model;
};

Checkpoint MakeCheckpoint(const TrainResult& result, const RunConfig& config) {
  Checkpoint checkpoint;
  checkpoint.model = result.model;
  CheckpointMetadata& meta = checkpoint.metadata;
  meta.seed = config.train.seed;
  meta.graph = config.graph;
  meta.training_config = TrainConfigToJson(config.train).dump();
  meta.config_hash = ConfigHash(meta.training_config +
                                GraphConfigToJson(config.graph).dump());
  meta.epochs_run = static_cast<int>(result.history.size());
  meta.best_epoch = result.best_epoch;
  return checkpoint;
}

int RunTrain(const TrainFlags& flags, std::ostream& out) {
  const RunConfig config = ResolveModelFlags(flags.model);
  const std::vector<Example> examples = LoadExamples(flags.data, flags.conllu);
  const std::vector<GraphSample> samples =
      BuildGraphSamples(examples, config.graph);
  const SampleRefs refs = AllRefs(samples);
  const TrainResult prompt = TrainPrompt(refs, config.train);
  const TrainResult token = TrainToken(refs, config.train);
  fs::create_directories(flags.out_dir);
  const fs::path dir(flags.out_dir);
  SaveCheckpoint(MakeCheckpoint(prompt, config),
                 (dir / "prompt.ckpt.json").string());
  SaveCheckpoint(MakeCheckpoint(token, config),
                 (dir / "token.ckpt.json").string());
  const std::string log_path =
      flags.log.empty() ? (dir / "train_log.jsonl").string() : flags.log;
  WriteText(log_path, FormatTrainingLog(prompt.history, "prompt", -1) +
                          FormatTrainingLog(token.history, "token", -1));
  out << "train: " << samples.size() << " prompts; tau_prompt "
      << prompt.model.threshold << " (epoch " << prompt.best_epoch
      << "), tau_token " << token.model.threshold << " (epoch "
      << token.best_epoch << ") -> " << flags.out_dir << '\n';
  return 0;
}

// ----------------------------------------------------------------- eval

struct EvalFlags {
  std::string data;
  std::string conllu;
  std::optional<int> cv;
  std::vector<std::string> transfer;
  std::string source_domain;
  std::string target_domain;
  std::string scores;
  std::string level = "prompt";
  double threshold = 0.5;
  std::string system = "external";
  std::string report;
  std::string curves_dir;
  bool svg = false;
  std::string log;
  std::optional<int> jobs;
  ModelFlags model;
};

int RunEval(const EvalFlags& flags, std::ostream& out) {
  const bool transfer = !flags.transfer.empty() ||
                        !flags.source_domain.empty() ||
                        !flags.target_domain.empty();
  if (transfer && flags.cv) {
    throw UsageError("--cv and cross-domain options are exclusive");
  }
  if (!transfer && !flags.cv && flags.scores.empty()) {
    throw UsageError("eval needs --cv, --transfer, domains or --scores");
  }
  if (flags.transfer.empty() && flags.data.empty()) {
    throw UsageError("eval needs --data or --transfer SRC TGT");
  }
  const RunConfig config = ResolveModelFlags(flags.model);
  EvalOptions options;
  options.folds = flags.cv.value_or(config.folds.value_or(5));
  options.jobs = flags.jobs.value_or(config.jobs.value_or(1));
  options.seed = config.train.seed;
  options.train = config.train;
  if (options.folds < 2) throw UsageError("--cv needs at least 2 folds");
  if (options.jobs < 1) throw UsageError("--jobs must be >= 1");

  const std::string source_path =
      flags.transfer.empty() ? flags.data : flags.transfer[0];
  const std::string target_path =
      flags.transfer.empty() ? flags.data : flags.transfer[1];

  ReportHeader header;
  header.graph = config.graph;
  header.options = options;
  header.dataset = DatasetName(source_path, flags.source_domain);

  const std::vector<Example> source_examples = FilterDomain(
      LoadExamples(source_path, flags.conllu), flags.source_domain);
  const std::vector<GraphSample> source =
      BuildGraphSamples(source_examples, config.graph);
  std::vector<GraphSample> target;
  if (transfer) {
    header.target = DatasetName(target_path, flags.target_domain);
    const std::vector<Example> target_examples = FilterDomain(
        LoadExamples(target_path, flags.conllu), flags.target_domain);
    target = BuildGraphSamples(target_examples, config.graph);
  }
  const std::vector<GraphSample>& evaluated = transfer ? target : source;

  EvalOutcome outcome;
  std::vector<SystemRow> extra_rows;
  if (transfer) {
    header.mode = "transfer";
    outcome = RunCrossDomain(source, target, options);
  } else if (flags.cv) {
    header.mode = "cv";
    outcome = RunCrossval(source, options);
  }
  if (!flags.scores.empty()) {
    const DetectorLevel level = ParseLevel(flags.level);
    const ScoredSet set = ExternalScoredSet(
        IngestExternalScores(flags.scores), AllRefs(evaluated), level);
    std::vector<ScoredSet> pooled = {set};
    EvalReport report = BuildReport(
        level, {EvaluateScores(set, flags.threshold, level, 0)}, pooled);
    if (header.mode.empty()) {
      header.mode = "scores";
      header.system = flags.system;
      outcome.mode = "scores";
      (level == DetectorLevel::kPrompt ? outcome.prompt : outcome.token) =
          std::move(report);
      outcome.token.level = DetectorLevel::kToken;
    } else {
      const std::string dataset =
          transfer ? header.dataset + " -> " + header.target : header.dataset;
      extra_rows.push_back({flags.system, dataset, std::move(report)});
    }
  }

  if (flags.report.empty()) {
    WriteReport(header, outcome, extra_rows, out);
  } else {
    std::ofstream file = OpenOutput(flags.report);
    WriteReport(header, outcome, extra_rows, file);
    if (!file) throw ValidationError("write failed for " + flags.report);
  }
  if (!flags.curves_dir.empty()) {
    for (const EvalReport* report : {&outcome.prompt, &outcome.token}) {
      WriteCurveFiles(flags.curves_dir, report->level,
                      report->roc ? &*report->roc : nullptr,
                      report->pr ? &*report->pr : nullptr, flags.svg);
    }
  }
  if (!flags.log.empty()) {
    std::string text;
    for (const FoldTraining& training : outcome.training) {
      text += FormatTrainingLog(training.prompt_history, "prompt",
                                training.fold);
      text += FormatTrainingLog(training.token_history, "token", training.fold);
    }
    WriteText(flags.log, text);
  }
  return 0;
}

// --------------------------------------------------------------- filter

struct FilterFlags {
  std::string prompt_model;
  std::string token_model;
  std::string data;
  std::string conllu;
  std::string out;
  std::optional<double> tau_prompt;
  std::optional<double> tau_token;
};

int RunFilter(const FilterFlags& flags, std::ostream& out) {
  const ModelPair models = LoadModelPair(flags.prompt_model, flags.token_model);
  const double tau_prompt =
      flags.tau_prompt.value_or(models.prompt.model.threshold);
  const double tau_token = flags.tau_token.value_or(models.token.model.threshold);
  const GraphConfig& graph_config = models.prompt.metadata.graph;

  std::ofstream file;
  if (!flags.out.empty()) file = OpenOutput(flags.out);
  std::ostream& sink = flags.out.empty() ? out : file;

  std::vector<ConlluSentence> sentences;
  if (!flags.conllu.empty()) sentences = LoadConllu(flags.conllu);
  InterchangeReader reader(flags.data);
  while (std::optional<Example> example = reader.Next()) {
    if (!sentences.empty()) {
      AttachDependencies(std::span<Example>(&*example, 1), sentences);
    }
    RequireInputDim(models.prompt.model, *example);
    const TokenGraph graph = BuildHybridGraph(
        example->encoding, example->record.dep_edges, graph_config);
    const NeighborIndex neighbors(graph);
    const FilterResult result =
        FilterPrompt(models.prompt.model, models.token.model, graph, neighbors,
                     example->record.tokens, tau_prompt, tau_token);
    ConfigJson line = {{"id", example->record.id},
                       {"decision", result.prompt_decision},
                       {"score", result.prompt_score}};
    if (result.mask) line["mask"] = *result.mask;
    line["tokens"] = result.sanitized_tokens;
    sink << line.dump() << '\n';
  }
  if (!sink) throw ValidationError("write failed for filter output");
  return 0;
}

// --------------------------------------------------------------- curves

struct CurvesFlags {
  std::string data;
  std::string conllu;
  std::string prompt_model;
  std::string token_model;
  std::string scores;
  std::string level = "prompt";
  std::string out_dir;
  bool svg = false;
};

void WriteCurvesFor(const ScoredSet& set, DetectorLevel level,
                    const CurvesFlags& flags, std::ostream& out) {
  int positives = 0;
  for (int label : set.labels) positives += label;
  if (positives == 0 || positives == static_cast<int>(set.labels.size())) {
    throw ValidationError(std::string(LevelName(level)) +
                          " curves need both classes in the data");
  }
  const RocCurve roc = ComputeRoc(set.scores, set.labels);
  const PrCurve pr = ComputePr(set.scores, set.labels);
  WriteCurveFiles(flags.out_dir, level, &roc, &pr, flags.svg);
  out << "curves: " << LevelName(level) << " auc " << roc.auc << " ap "
      << pr.average_precision << '\n';
}

int RunCurves(const CurvesFlags& flags, std::ostream& out) {
  const bool have_models =
      !flags.prompt_model.empty() || !flags.token_model.empty();
  if (have_models == !flags.scores.empty()) {
    throw UsageError("curves needs either both checkpoints or --scores");
  }
  if (have_models &&
      (flags.prompt_model.empty() || flags.token_model.empty())) {
    throw UsageError("curves needs both --prompt-model and --token-model");
  }
  const std::vector<Example> examples = LoadExamples(flags.data, flags.conllu);
  if (!have_models) {
    const DetectorLevel level = ParseLevel(flags.level);
    const std::vector<GraphSample> samples =
        BuildGraphSamples(examples, GraphConfig{});
    WriteCurvesFor(ExternalScoredSet(IngestExternalScores(flags.scores),
                                     AllRefs(samples), level),
                   level, flags, out);
    return 0;
  }
  const ModelPair models = LoadModelPair(flags.prompt_model, flags.token_model);
  for (const Example& example : examples) {
    RequireInputDim(models.prompt.model, example);
  }
  const std::vector<GraphSample> samples =
      BuildGraphSamples(examples, models.prompt.metadata.graph);
  const SampleRefs refs = AllRefs(samples);
  WriteCurvesFor(PromptLevelSet(models.prompt.model, refs),
                 DetectorLevel::kPrompt, flags, out);
  WriteCurvesFor(TokenLevelSet(models.token.model, refs), DetectorLevel::kToken,
                 flags, out);
  return 0;
}

// -------------------------------------------------------------- latency

struct LatencyFlags {
  std::string data;
  std::string conllu;
  std::string prompt_model;
  std::string token_model;
  int repetitions = 3;
  std::optional<double> budget_ms;
  std::string out;
};

int RunLatency(const LatencyFlags& flags, std::ostream& out) {
  const ModelPair models = LoadModelPair(flags.prompt_model, flags.token_model);
  const std::vector<Example> examples = LoadExamples(flags.data, flags.conllu);
  for (const Example& example : examples) {
    RequireInputDim(models.prompt.model, example);
  }
  const LatencyReport report = MeasureLatency(
      models.prompt.model, models.token.model, examples,
      models.prompt.metadata.graph, flags.repetitions, flags.budget_ms);
  const std::string line = FormatLatency(report) + "\n";
  if (flags.out.empty()) {
    out << line;
  } else {
    WriteText(flags.out, line);
  }
  return 0;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"GuardNet: graph-based prompt and token injection detection"};
  app.name("guardnet");
  app.require_subcommand(1, 1);

  SynthFlags synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "write a synthetic corpus");
  synth_cmd->add_option("--out", synth.out, "output interchange file")
      ->required();
  synth_cmd->add_option("--size", synth.config.size, "number of prompts");
  synth_cmd->add_option("--seed", synth.seed, "generator seed");
  synth_cmd->add_option("--domains", synth.config.domain_count,
                        "number of background domains");
  synth_cmd->add_option("--dim", synth.config.dim, "toy encoder width");
  synth_cmd->add_option("--encoder-seed", synth.config.encoder_seed);
  synth_cmd->add_option("--min-length", synth.config.min_length);
  synth_cmd->add_option("--max-length", synth.config.max_length);
  synth_cmd->add_option("--adversarial-fraction",
                        synth.config.adversarial_fraction);

  TrainFlags train;
  CLI::App* train_cmd =
      app.add_subcommand("train", "train both detectors on a dataset");
  train_cmd->add_option("--data", train.data, "interchange file")->required();
  train_cmd->add_option("--conllu", train.conllu, "dependency parses");
  train_cmd->add_option("--out-dir", train.out_dir, "checkpoint directory")
      ->required();
  train_cmd->add_option("--log", train.log, "training log path");
  AddModelFlags(train_cmd, &train.model);

  EvalFlags eval;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "cross-validation or cross-domain evaluation");
  eval_cmd->add_option("--data", eval.data, "interchange file");
  eval_cmd->add_option("--conllu", eval.conllu, "dependency parses");
  eval_cmd->add_option("--cv", eval.cv, "number of folds");
  eval_cmd->add_option("--transfer", eval.transfer, "SOURCE TARGET files")
      ->expected(2);
  eval_cmd->add_option("--source-domain", eval.source_domain);
  eval_cmd->add_option("--target-domain", eval.target_domain);
  eval_cmd->add_option("--scores", eval.scores, "external score file");
  eval_cmd->add_option("--level", eval.level, "level of --scores")
      ->check(CLI::IsMember({"prompt", "token"}));
  eval_cmd->add_option("--threshold", eval.threshold,
                       "decision threshold for --scores");
  eval_cmd->add_option("--system", eval.system, "name for --scores rows");
  eval_cmd->add_option("--report", eval.report, "report path (default stdout)");
  eval_cmd->add_option("--curves-dir", eval.curves_dir,
                       "write pooled ROC/PR curves here");
  eval_cmd->add_flag("--svg", eval.svg, "also render curves as SVG");
  eval_cmd->add_option("--log", eval.log, "per-fold training log");
  eval_cmd->add_option("--jobs", eval.jobs, "folds trained in parallel");
  AddModelFlags(eval_cmd, &eval.model);

  FilterFlags filter;
  CLI::App* filter_cmd =
      app.add_subcommand("filter", "run the two-stage filter over prompts");
  filter_cmd->add_option("--prompt-model", filter.prompt_model)->required();
  filter_cmd->add_option("--token-model", filter.token_model)->required();
  filter_cmd->add_option("--data", filter.data, "interchange file")->required();
  filter_cmd->add_option("--conllu", filter.conllu, "dependency parses");
  filter_cmd->add_option("--out", filter.out, "output path (default stdout)");
  filter_cmd->add_option("--tau-prompt", filter.tau_prompt);
  filter_cmd->add_option("--tau-token", filter.tau_token);

  CurvesFlags curves;
  CLI::App* curves_cmd =
      app.add_subcommand("curves", "export ROC and precision-recall curves");
  curves_cmd->add_option("--data", curves.data, "interchange file")->required();
  curves_cmd->add_option("--conllu", curves.conllu, "dependency parses");
  curves_cmd->add_option("--prompt-model", curves.prompt_model);
  curves_cmd->add_option("--token-model", curves.token_model);
  curves_cmd->add_option("--scores", curves.scores, "external score file");
  curves_cmd->add_option("--level", curves.level, "level of --scores")
      ->check(CLI::IsMember({"prompt", "token"}));
  curves_cmd->add_option("--out-dir", curves.out_dir)->required();
  curves_cmd->add_flag("--svg", curves.svg, "also render SVG plots");

  LatencyFlags latency;
  CLI::App* latency_cmd =
      app.add_subcommand("latency", "time each pipeline stage");
  latency_cmd->add_option("--data", latency.data, "interchange file")
      ->required();
  latency_cmd->add_option("--conllu", latency.conllu, "dependency parses");
  latency_cmd->add_option("--prompt-model", latency.prompt_model)->required();
  latency_cmd->add_option("--token-model", latency.token_model)->required();
  latency_cmd->add_option("--reps", latency.repetitions, "timed passes");
  latency_cmd->add_option("--budget-ms", latency.budget_ms,
                          "flag runs whose mean exceeds this");
  latency_cmd->add_option("--out", latency.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (*synth_cmd) return RunSynth(synth, out);
    if (*train_cmd) return RunTrain(train, out);
    if (*eval_cmd) return RunEval(eval, out);
    if (*filter_cmd) return RunFilter(filter, out);
    if (*curves_cmd) return RunCurves(curves, out);
    if (*latency_cmd) return RunLatency(latency, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace guardnet
