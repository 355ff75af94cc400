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

#include "guardnet/config.h"

#include <fstream>
#include <sstream>

#include "guardnet/errors.h"

namespace guardnet {
namespace {

void RequireObject(const ConfigJson& object, const std::string& what) {
  if (!object.is_object()) throw ValidationError(what + " must be an object");
}

template <typename T>
T Field(const ConfigJson& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

LossConfig ParseLossPreset(const std::string& name) {
  if (name == "weighted") return LossConfig::WeightedPreset();
  if (name == "alpha") return LossConfig::AlphaPreset();
  if (name == "cross_entropy") return LossConfig::CrossEntropy();
  throw ValidationError("unknown loss preset '" + name + "'");
}

ConfigJson LossConfigToJson(const LossConfig& config) {
  return {{"kind",
           config.kind == LossKind::kFocal ? "focal" : "cross_entropy"},
          {"negative_weight", config.negative_weight},
          {"positive_weight", config.positive_weight},
          {"gamma", config.gamma}};
}

ConfigJson GraphConfigToJson(const GraphConfig& config) {
  return {{"top_k", config.top_k},
          {"window", config.window},
          {"symmetrize_attention", config.symmetrize_attention},
          {"symmetrize_dependency", config.symmetrize_dependency}};
}

ConfigJson TrainConfigToJson(const TrainConfig& config) {
  return {{"epochs_prompt", config.epochs_prompt},
          {"epochs_token", config.epochs_token},
          {"batch_prompt", config.batch_prompt},
          {"batch_token", config.batch_token},
          {"learning_rate", config.learning_rate},
          {"hidden", config.hidden},
          {"prompt_loss", LossConfigToJson(config.prompt_loss)},
          {"token_loss", LossConfigToJson(config.token_loss)},
          {"early_stop_patience", config.early_stop_patience},
          {"val_fraction", config.val_fraction},
          {"tune_thresholds", config.tune_thresholds},
          {"token_benign_negatives", config.token_benign_negatives},
          {"dropout", config.dropout},
          {"residual", config.residual}};
}

LossConfig LossConfigFromJson(const ConfigJson& object) {
  if (object.is_string()) return ParseLossPreset(object.get<std::string>());
  RequireObject(object, "loss config");
  LossConfig config;
  if (object.contains("preset")) {
    config = ParseLossPreset(Field<std::string>(object["preset"], "preset"));
  }
  std::optional<double> alpha;
  for (const auto& [key, value] : object.items()) {
    if (key == "preset") continue;
    if (key == "kind") {
      const std::string kind = Field<std::string>(value, key);
      if (kind == "focal") {
        config.kind = LossKind::kFocal;
      } else if (kind == "cross_entropy") {
        config.kind = LossKind::kCrossEntropy;
      } else {
        throw ValidationError("unknown loss kind '" + kind + "'");
      }
    } else if (key == "negative_weight") {
      config.negative_weight = Field<double>(value, key);
    } else if (key == "positive_weight") {
      config.positive_weight = Field<double>(value, key);
    } else if (key == "gamma") {
      config.gamma = Field<double>(value, key);
    } else if (key == "alpha") {
      alpha = Field<double>(value, key);
    } else {
      throw ValidationError("unknown loss config key '" + key + "'");
    }
  }
  if (alpha) {
    config.negative_weight = 1.0 - *alpha;
    config.positive_weight = *alpha;
  }
  config.Validate();
  return config;
}

void ApplyGraphConfig(const ConfigJson& object, GraphConfig* config) {
  RequireObject(object, "graph config");
  for (const auto& [key, value] : object.items()) {
    if (key == "top_k") {
      config->top_k = Field<int>(value, key);
    } else if (key == "window") {
      config->window = Field<int>(value, key);
    } else if (key == "symmetrize_attention") {
      config->symmetrize_attention = Field<bool>(value, key);
    } else if (key == "symmetrize_dependency") {
      config->symmetrize_dependency = Field<bool>(value, key);
    } else {
      throw ValidationError("unknown graph config key '" + key + "'");
    }
  }
}

GraphConfig GraphConfigFromJson(const ConfigJson& object) {
  GraphConfig config;
  ApplyGraphConfig(object, &config);
  config.Validate();
  return config;
}

void ApplyTrainConfig(const ConfigJson& object, TrainConfig* config) {
  RequireObject(object, "train config");
  for (const auto& [key, value] : object.items()) {
    if (key == "epochs_prompt") {
      config->epochs_prompt = Field<int>(value, key);
    } else if (key == "epochs_token") {
      config->epochs_token = Field<int>(value, key);
    } else if (key == "batch_prompt") {
      config->batch_prompt = Field<int>(value, key);
    } else if (key == "batch_token") {
      config->batch_token = Field<int>(value, key);
    } else if (key == "learning_rate") {
      config->learning_rate = Field<double>(value, key);
    } else if (key == "hidden") {
      config->hidden = Field<int>(value, key);
    } else if (key == "prompt_loss") {
      config->prompt_loss = LossConfigFromJson(value);
    } else if (key == "token_loss") {
      config->token_loss = LossConfigFromJson(value);
    } else if (key == "early_stop_patience") {
      config->early_stop_patience = Field<int>(value, key);
    } else if (key == "val_fraction") {
      config->val_fraction = Field<double>(value, key);
    } else if (key == "tune_thresholds") {
      config->tune_thresholds = Field<bool>(value, key);
    } else if (key == "token_benign_negatives") {
      config->token_benign_negatives = Field<bool>(value, key);
    } else if (key == "dropout") {
      config->dropout = Field<double>(value, key);
    } else if (key == "residual") {
      config->residual = Field<bool>(value, key);
    } else {
      throw ValidationError("unknown train config key '" + key + "'");
    }
  }
}

RunConfig ParseRunConfig(const std::string& text) {
  ConfigJson object;
  try {
    object = ConfigJson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  RequireObject(object, "config file");
  RunConfig config;
  for (const auto& [key, value] : object.items()) {
    if (key == "graph") {
      ApplyGraphConfig(value, &config.graph);
    } else if (key == "train") {
      ApplyTrainConfig(value, &config.train);
    } else if (key == "seed") {
      config.seed = Field<uint64_t>(value, key);
    } else if (key == "folds") {
      config.folds = Field<int>(value, key);
    } else if (key == "jobs") {
      config.jobs = Field<int>(value, key);
    } else if (key == "section" || key == "mode" || key == "dataset" ||
               key == "target") {
      continue;  // report header fields
    } else {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }
  return config;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseRunConfig(buffer.str());
}

}  // namespace guardnet
