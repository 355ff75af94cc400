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

// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when any
// criterion fails. Criteria can be selected by name on the command line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "guardnet/cli.h"
#include "guardnet/detectors.h"
#include "guardnet/graph.h"
#include "guardnet/loss.h"
#include "guardnet/metrics.h"
#include "guardnet/model.h"
#include "guardnet/random.h"
#include "test_util.h"

namespace guardnet {
namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string Fixed(double v, int digits = 4) {
  std::ostringstream out;
  out.precision(digits);
  out << std::fixed << v;
  return out.str();
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// ------------------------------------------------------------ gradients

Verdict GradientCorrectness() {
  const auto start = Clock::now();
  const std::vector<std::pair<std::string, LossConfig>> losses = {
      {"cross_entropy", LossConfig::CrossEntropy()},
      {"focal", LossConfig::WeightedPreset()}};
  double worst = 0.0;
  int checked = 0, skipped = 0, runs = 0;
  for (DetectorLevel level : {DetectorLevel::kPrompt, DetectorLevel::kToken}) {
    for (const auto& [name, loss] : losses) {
      for (uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(DeriveSeed(seed, 101));
        const int dim = 3 + static_cast<int>(rng.Index(3));
        std::vector<TokenGraph> graphs;
        std::vector<std::vector<int>> labels;
        for (int g = 0; g < 2; ++g) {
          const int n = 1 + static_cast<int>(rng.Index(8));
          graphs.push_back(testing::RandomGraph(rng, n, dim, 0.4));
          labels.push_back(testing::RandomLabels(
              rng, level == DetectorLevel::kPrompt ? 1 : n, 0.4));
        }
        std::vector<NeighborIndex> indices;
        for (const auto& g : graphs) indices.emplace_back(g);
        std::vector<LabeledGraph> batch;
        for (size_t g = 0; g < graphs.size(); ++g) {
          batch.push_back({&graphs[g], &indices[g], labels[g]});
        }
        const DetectorModel model = testing::RandomModel(level, dim, 8, seed);
        const auto result = testing::CheckGradients(model, batch, loss);
        worst = std::max(worst, result.max_relative_error);
        checked += result.checked;
        skipped += result.skipped;
        ++runs;
      }
    }
  }
  const double elapsed = Seconds(start);
  std::ostringstream detail;
  detail << runs << " runs, " << checked << " parameters checked (" << skipped
         << " skipped at attention kinks), max relative error " << worst
         << ", " << Fixed(elapsed, 1) << " s";
  return {worst < 1e-4 && elapsed < 60.0 && checked > 0, detail.str()};
}

// ---------------------------------------------------------------- graph

Verdict GraphOracle() {
  const auto start = Clock::now();
  Rng rng(2024);
  int mismatches = 0;
  int64_t edges = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.Index(12));
    const EncoderOutput enc = testing::RandomEncoding(
        rng, n, 3, rng.Uniform() < 0.5, rng.Uniform() < 0.5);
    GraphConfig config;
    config.top_k = 1 + static_cast<int>(rng.Index(4));
    config.window = 1 + static_cast<int>(rng.Index(4));
    config.symmetrize_attention = rng.Uniform() < 0.5;
    config.symmetrize_dependency = rng.Uniform() < 0.5;
    std::optional<std::vector<DependencyArc>> deps;
    if (rng.Uniform() < 0.8) {
      deps = testing::RandomArcs(rng, n, static_cast<int>(rng.Index(n + 1)));
    }
    const TokenGraph graph = BuildHybridGraph(enc, deps, config);
    edges += static_cast<int64_t>(graph.edges.size());
    if (graph.edges != testing::BruteForceEdges(enc, deps, config)) ++mismatches;
  }
  const double elapsed = Seconds(start);
  std::ostringstream detail;
  detail << "200 instances, " << edges << " edges, " << mismatches
         << " mismatches, " << Fixed(elapsed, 2) << " s";
  return {mismatches == 0 && elapsed < 10.0, detail.str()};
}

// ----------------------------------------------------------------- loss

Verdict LossIdentities() {
  Rng rng(7);
  double worst = 0.0;
  for (int b = 0; b < 100; ++b) {
    const int n = 1 + static_cast<int>(rng.Index(64));
    std::vector<double> p(n);
    std::vector<int> y(n);
    double bce = 0.0;
    for (int i = 0; i < n; ++i) {
      p[i] = rng.Uniform(0.001, 0.999);
      y[i] = static_cast<int>(rng.Index(2));
      bce -= y[i] == 1 ? std::log(p[i]) : std::log(1.0 - p[i]);
    }
    bce /= n;
    worst = std::max(worst, std::abs(FocalLoss(p, y, 0.5, 0.0) - 0.5 * bce));
  }
  const std::vector<double> half = {0.5};
  const std::vector<int> one = {1};
  const double single = FocalLoss(half, one, 0.95, 2.0);
  const double single_error = std::abs(single - 0.164622);
  std::ostringstream detail;
  detail << "focal(g=0,a=0.5) vs 0.5*BCE max error " << worst
         << "; single-token focal " << Fixed(single, 9) << " (|diff| "
         << single_error << " vs 0.164622)";
  // Closed form to 1e-9; the rounded constant to its printed precision.
  const double closed_form_error = std::abs(single - 0.95 * 0.25 * std::log(2.0));
  return {worst < 1e-12 && closed_form_error < 1e-9 && single_error < 5e-7,
          detail.str()};
}

// -------------------------------------------------------------- metrics

Verdict MetricIdentities() {
  Rng rng(11);
  double worst_iou = 0.0, worst_f1 = 0.0;
  for (int t = 0; t < 500; ++t) {
    const int n = 1 + static_cast<int>(rng.Index(64));
    const auto pred = testing::RandomLabels(rng, n, rng.Uniform());
    const auto gold = testing::RandomLabels(rng, n, rng.Uniform());
    const TokenLevelMetrics m = TokenMetrics(pred, gold);
    const ConfusionCounts c = CountConfusion(pred, gold);
    if (c.tp + c.fp + c.fn > 0) {
      worst_iou = std::max(worst_iou, std::abs(m.iou - m.f1 / (2.0 - m.f1)));
    }
    if (m.precision + m.recall > 0) {
      worst_f1 = std::max(worst_f1,
                          std::abs(m.f1 - 2 * m.precision * m.recall /
                                              (m.precision + m.recall)));
    }
  }
  double worst_auc = 0.0;
  int auc_inputs = 0;
  for (int t = 0; t < 2000; ++t) {
    const int n = 2 + static_cast<int>(rng.Index(11));
    const auto y = testing::RandomLabels(rng, n, rng.Uniform());
    int positives = 0;
    for (int v : y) positives += v;
    if (positives == 0 || positives == n) continue;
    std::vector<double> s(n);
    const int levels = 1 + static_cast<int>(rng.Index(6));
    for (double& v : s) v = static_cast<double>(rng.Index(levels));
    worst_auc = std::max(
        worst_auc, std::abs(ComputeRoc(s, y).auc - testing::PairwiseAuc(s, y)));
    ++auc_inputs;
  }
  const std::vector<double> ranked = {0.05, 0.2, 0.3, 0.7, 0.8, 0.99};
  const std::vector<int> ranked_labels = {0, 0, 0, 1, 1, 1};
  const double perfect_auc = ComputeRoc(ranked, ranked_labels).auc;
  const double perfect_ap = ComputePr(ranked, ranked_labels).average_precision;
  const std::vector<double> flat(6, 0.42);
  const double uniform_auc = ComputeRoc(flat, ranked_labels).auc;
  std::ostringstream detail;
  detail << "IoU identity err " << worst_iou << ", F1 identity err " << worst_f1
         << ", AUC vs pairwise err " << worst_auc << " over " << auc_inputs
         << " inputs, perfect AUC/AP " << perfect_auc << "/" << perfect_ap
         << ", uniform AUC " << uniform_auc;
  return {worst_iou < 1e-12 && worst_f1 < 1e-12 && worst_auc < 1e-12 &&
              perfect_auc == 1.0 && perfect_ap == 1.0 && uniform_auc == 0.5,
          detail.str()};
}

// ---------------------------------------------------------- end to end

struct CliRun {
  int code = 0;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "guardnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, err.str()};
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Mean of an aggregate metric for a level, or NaN when absent.
double AggregateMean(const std::string& report, const std::string& level,
                     const std::string& metric) {
  std::istringstream lines(report);
  std::string line;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j.value("section", "") == "aggregate" && j.value("level", "") == level &&
        j.contains(metric)) {
      return j.at(metric).at("mean").get<double>();
    }
  }
  return std::nan("");
}

struct Workspace {
  std::string dir = testing::TempDir("acceptance");
  std::string cv_report;  // first full cross-validation report
};

Workspace& Shared() {
  static Workspace workspace;
  return workspace;
}

std::string CvReportPath(int run) {
  return Shared().dir + "/cv_report_" + std::to_string(run) + ".jsonl";
}

CliRun FullCrossval(int run) {
  return Cli({"eval", "--data", Shared().dir + "/synth400.jsonl", "--cv", "5",
              "--seed", "1", "--report", CvReportPath(run)});
}

Verdict EndToEnd() {
  const auto start = Clock::now();
  const std::string dir = Shared().dir;
  std::ostringstream detail;
  bool ok = true;

  const std::string corpus = dir + "/synth400.jsonl";
  CliRun r = Cli({"synth", "--out", corpus, "--size", "400", "--seed", "1"});
  if (r.code != 0) return {false, "synth failed: " + r.err};
  r = FullCrossval(1);
  if (r.code != 0) return {false, "eval --cv 5 failed: " + r.err};
  Shared().cv_report = ReadFile(CvReportPath(1));
  const double prompt_f1 = AggregateMean(Shared().cv_report, "prompt", "f1");
  const double token_iou = AggregateMean(Shared().cv_report, "token", "iou");
  const double cv_seconds = Seconds(start);
  ok = ok && prompt_f1 >= 0.95 && token_iou >= 0.80;
  detail << "cv: prompt F1 " << Fixed(prompt_f1) << " (>= 0.95), token IoU "
         << Fixed(token_iou) << " (>= 0.80), " << Fixed(cv_seconds, 0) << " s";

  const auto transfer_start = Clock::now();
  const std::string domains = dir + "/synth_domains.jsonl";
  r = Cli({"synth", "--out", domains, "--size", "400", "--seed", "2", "--domains",
           "2"});
  if (r.code != 0) return {false, detail.str() + "; synth --domains failed: " + r.err};
  const std::string transfer_report = dir + "/transfer_report.jsonl";
  r = Cli({"eval", "--data", domains, "--source-domain", "synth-a",
           "--target-domain", "synth-b", "--seed", "1", "--report",
           transfer_report});
  if (r.code != 0) return {false, detail.str() + "; transfer eval failed: " + r.err};
  const double target_f1 = AggregateMean(ReadFile(transfer_report), "prompt", "f1");
  ok = ok && target_f1 >= 0.90;
  const double elapsed = Seconds(start);
  detail << "; transfer synth-a -> synth-b: target prompt F1 " << Fixed(target_f1)
         << " (>= 0.90), " << Fixed(Seconds(transfer_start), 0) << " s; total "
         << Fixed(elapsed, 0) << " s (< 600)";
  return {ok && elapsed < 600.0, detail.str()};
}

// ------------------------------------------------------------- pipeline

Verdict PipelineContract() {
  Rng rng(99);
  int violations = 0, token_runs = 0;
  std::string first_violation;
  auto fail = [&](int pair, const std::string& what) {
    if (violations++ == 0) first_violation = "pair " + std::to_string(pair) + ": " + what;
  };
  for (int pair = 0; pair < 1000; ++pair) {
    const int dim = 2 + static_cast<int>(rng.Index(5));
    const int n = 1 + static_cast<int>(rng.Index(12));
    const TokenGraph graph = testing::RandomGraph(rng, n, dim, rng.Uniform(0.0, 0.6));
    const NeighborIndex neighbors(graph);
    const DetectorModel prompt =
        testing::RandomModel(DetectorLevel::kPrompt, dim, 8, rng.NextU64());
    const DetectorModel token =
        testing::RandomModel(DetectorLevel::kToken, dim, 8, rng.NextU64());
    std::vector<std::string> tokens(n);
    for (int i = 0; i < n; ++i) tokens[i] = "tok" + std::to_string(i);
    const double tau_prompt = rng.Uniform();
    const double tau_token = rng.Uniform();

    FilterCounters counters;
    const FilterResult r = FilterPrompt(prompt, token, graph, neighbors, tokens,
                                        tau_prompt, tau_token, &counters);
    if (static_cast<int>(r.sanitized_tokens.size()) != n) fail(pair, "sanitized length");
    if (!(r.prompt_score >= 0.0 && r.prompt_score <= 1.0)) fail(pair, "score range");
    const bool flagged = r.prompt_score > tau_prompt;
    if (r.prompt_decision != (flagged ? 1 : 0)) fail(pair, "decision");
    if (counters.prompt_passes != 1) fail(pair, "prompt pass count");
    if (counters.token_passes != (flagged ? 1 : 0)) fail(pair, "token model use");
    if (!flagged) {
      if (r.mask || r.token_scores) fail(pair, "mask on benign prompt");
      if (r.sanitized_tokens != tokens) fail(pair, "benign prompt altered");
    } else {
      ++token_runs;
      if (!r.mask || static_cast<int>(r.mask->size()) != n) {
        fail(pair, "mask length");
        continue;
      }
      for (int i = 0; i < n; ++i) {
        const bool above = (*r.token_scores)[i] > tau_token;
        if ((*r.mask)[i] != (above ? 1 : 0)) fail(pair, "mask rule");
        if ((r.sanitized_tokens[i] == kMaskToken) != above) fail(pair, "masking");
      }
    }

    // Masks shrink as tau_token grows (prompt stage forced open).
    std::vector<int> previous(n, 1);
    for (double t : {-0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
      const FilterResult forced =
          FilterPrompt(prompt, token, graph, neighbors, tokens, -1.0, t);
      if (!forced.mask) {
        fail(pair, "forced mask missing");
        break;
      }
      for (int i = 0; i < n; ++i) {
        if ((*forced.mask)[i] > previous[i]) fail(pair, "mask not monotone");
      }
      if (static_cast<int>(forced.sanitized_tokens.size()) != n) {
        fail(pair, "sanitized length (forced)");
      }
      previous = *forced.mask;
    }
  }
  std::ostringstream detail;
  detail << "1000 pairs, " << token_runs << " reached the token stage, "
         << violations << " violations";
  if (violations > 0) detail << " (first: " << first_violation << ")";
  return {violations == 0, detail.str()};
}

// ---------------------------------------------------------- determinism

Verdict Determinism() {
  const auto start = Clock::now();
  if (Shared().cv_report.empty()) {
    const std::string corpus = Shared().dir + "/synth400.jsonl";
    CliRun r = Cli({"synth", "--out", corpus, "--size", "400", "--seed", "1"});
    if (r.code != 0) return {false, "synth failed: " + r.err};
    r = FullCrossval(1);
    if (r.code != 0) return {false, "first eval failed: " + r.err};
    Shared().cv_report = ReadFile(CvReportPath(1));
  }
  const CliRun r = FullCrossval(2);
  if (r.code != 0) return {false, "second eval failed: " + r.err};
  const std::string second = ReadFile(CvReportPath(2));
  const bool same = !second.empty() && second == Shared().cv_report;
  std::ostringstream detail;
  detail << "two eval --cv 5 runs (seed 1) on synth 400: "
         << (same ? "byte-identical" : "reports differ") << ", "
         << Shared().cv_report.size() << " bytes, " << Fixed(Seconds(start), 0)
         << " s";
  return {same, detail.str()};
}

struct Criterion {
  std::string name;
  std::function<Verdict()> run;
};

}  // namespace
}  // namespace guardnet

int main(int argc, char** argv) {
  using namespace guardnet;
  unsetenv("GUARDNET_SEED");
  const std::vector<Criterion> criteria = {
      {"gradient-correctness", GradientCorrectness},
      {"graph-builder-oracle", GraphOracle},
      {"loss-identities", LossIdentities},
      {"metric-identities", MetricIdentities},
      {"end-to-end-synthetic", EndToEnd},
      {"pipeline-contract", PipelineContract},
      {"determinism", Determinism},
  };
  std::vector<std::string> selected(argv + 1, argv + argc);
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.name) == selected.end()) {
      continue;
    }
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (v.pass ? "PASS " : "FAIL ") << c.name << ": " << v.detail
              << std::endl;
    failures += v.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
