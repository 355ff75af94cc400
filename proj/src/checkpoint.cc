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

#include "guardnet/checkpoint.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "guardnet/config.h"
#include "guardnet/errors.h"
#include "guardnet/random.h"
#include "json.hpp"

namespace guardnet {
namespace {

using Json = ConfigJson;

constexpr char kFormatName[] = "guardnet-checkpoint";

Json MatrixToJson(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix MatrixFromJson(const Json& rows, Eigen::Index expect_rows,
                      Eigen::Index expect_cols, const char* what) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != expect_rows) {
    throw DimensionError(std::string("checkpoint: bad row count for ") + what);
  }
  Matrix m(expect_rows, expect_cols);
  for (Eigen::Index i = 0; i < expect_rows; ++i) {
    const Json& row = rows[i];
    if (!row.is_array() ||
        static_cast<Eigen::Index>(row.size()) != expect_cols) {
      throw DimensionError(std::string("checkpoint: bad column count for ") +
                           what);
    }
    for (Eigen::Index j = 0; j < expect_cols; ++j) {
      m(i, j) = row[j].get<double>();
    }
  }
  return m;
}

}  // namespace

std::string ConfigHash(const std::string& text) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(text)));
  return buffer;
}

std::string SerializeCheckpoint(const Checkpoint& checkpoint) {
  const DetectorModel& model = checkpoint.model;
  model.Validate();
  const ArchSpec arch = ArchOf(model);
  Json object = Json::object();
  object["format"] = kFormatName;
  object["version"] = kCheckpointVersion;
  object["arch"] = {{"level", LevelName(arch.level)},
                    {"input_dim", arch.input_dim},
                    {"hidden", arch.hidden},
                    {"heads", arch.heads},
                    {"residual", arch.residual}};
  object["threshold"] = model.threshold;
  Json layers = Json::array();
  for (const GatLayerParams& layer : model.layers) {
    Json weights = Json::array();
    for (const Matrix& w : layer.weight) weights.push_back(MatrixToJson(w));
    layers.push_back({{"heads", layer.heads},
                      {"in_dim", layer.in_dim},
                      {"out_dim", layer.out_dim},
                      {"negative_slope", layer.negative_slope},
                      {"concat_heads", layer.concat_heads},
                      {"elu", layer.elu},
                      {"weight", std::move(weights)},
                      {"attn_src", MatrixToJson(layer.attn_src)},
                      {"attn_dst", MatrixToJson(layer.attn_dst)}});
    if (layer.has_residual()) {
      layers.back()["residual"] = MatrixToJson(layer.residual);
    }
  }
  object["layers"] = std::move(layers);
  object["head_weight"] = MatrixToJson(model.head_weight);
  object["head_bias"] = {model.head_bias[0], model.head_bias[1]};
  const CheckpointMetadata& meta = checkpoint.metadata;
  Json training = Json::object();
  if (!meta.training_config.empty()) {
    training = Json::parse(meta.training_config);
  }
  object["metadata"] = {{"seed", meta.seed},
                        {"config_hash", meta.config_hash},
                        {"graph", GraphConfigToJson(meta.graph)},
                        {"epochs_run", meta.epochs_run},
                        {"best_epoch", meta.best_epoch},
                        {"training", std::move(training)}};
  return object.dump();
}

Checkpoint ParseCheckpoint(const std::string& text) {
  Json object;
  try {
    object = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("checkpoint is not valid JSON: ") +
                          e.what());
  }
  if (!object.is_object() || object.value("format", "") != kFormatName) {
    throw ValidationError("not a guardnet checkpoint");
  }
  const int version = object.value("version", -1);
  if (version != kCheckpointVersion) {
    throw ValidationError("checkpoint version " + std::to_string(version) +
                          " unsupported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint checkpoint;
  try {
    DetectorModel& model = checkpoint.model;
    model.level = ParseLevel(object.at("arch").at("level").get<std::string>());
    model.threshold = object.at("threshold").get<double>();
    for (const Json& entry : object.at("layers")) {
      GatLayerParams layer;
      layer.heads = entry.at("heads").get<int>();
      layer.in_dim = entry.at("in_dim").get<int>();
      layer.out_dim = entry.at("out_dim").get<int>();
      layer.negative_slope = entry.at("negative_slope").get<double>();
      layer.concat_heads = entry.at("concat_heads").get<bool>();
      layer.elu = entry.at("elu").get<bool>();
      const Json& weights = entry.at("weight");
      if (!weights.is_array() ||
          static_cast<int>(weights.size()) != layer.heads) {
        throw DimensionError("checkpoint: weight count differs from heads");
      }
      for (const Json& w : weights) {
        layer.weight.push_back(
            MatrixFromJson(w, layer.in_dim, layer.out_dim, "weight"));
      }
      layer.attn_src = MatrixFromJson(entry.at("attn_src"), layer.heads,
                                      layer.out_dim, "attn_src");
      layer.attn_dst = MatrixFromJson(entry.at("attn_dst"), layer.heads,
                                      layer.out_dim, "attn_dst");
      if (entry.contains("residual")) {
        layer.residual = MatrixFromJson(entry.at("residual"), layer.in_dim,
                                        layer.output_width(), "residual");
      }
      model.layers.push_back(std::move(layer));
    }
    if (model.layers.empty()) throw DimensionError("checkpoint has no layers");
    model.head_weight = MatrixFromJson(object.at("head_weight"), 2,
                                       model.layers.back().output_width(),
                                       "head_weight");
    const Json& bias = object.at("head_bias");
    if (!bias.is_array() || bias.size() != 2) {
      throw DimensionError("checkpoint: head_bias must have 2 entries");
    }
    model.head_bias = Vector(2);
    model.head_bias << bias[0].get<double>(), bias[1].get<double>();
    model.Validate();

    const Json& meta = object.at("metadata");
    checkpoint.metadata.seed = meta.at("seed").get<uint64_t>();
    checkpoint.metadata.config_hash = meta.at("config_hash").get<std::string>();
    checkpoint.metadata.graph = GraphConfigFromJson(meta.at("graph"));
    checkpoint.metadata.epochs_run = meta.value("epochs_run", 0);
    checkpoint.metadata.best_epoch = meta.value("best_epoch", 0);
    const Json& training = meta.at("training");
    if (!training.empty()) checkpoint.metadata.training_config = training.dump();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("checkpoint field error: ") + e.what());
  }
  return checkpoint;
}

void SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write checkpoint " + path);
  out << SerializeCheckpoint(checkpoint) << '\n';
  if (!out) throw ValidationError("write failed for checkpoint " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open checkpoint " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseCheckpoint(buffer.str());
  } catch (const DimensionError& e) {
    throw DimensionError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace guardnet
