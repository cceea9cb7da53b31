// Copyright 2026 The STOC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STOC_EXPERIMENT_H_
#define STOC_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "stoc/data.h"
#include "stoc/pipeline.h"
#include "stoc/protocol.h"

namespace stoc {

// Invalid experiment configuration; `field` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Built-in dataset defaults. Tabular datasets are read from a CSV the user
// supplies with --data-path; "synth" is generated in-process.
struct DatasetPreset {
  std::string name;
  std::string label_column = "label";
  std::vector<std::string> positive_labels = {"1"};
  bool reverse_labels = false;
  int transforms = 256;
  std::int64_t train_steps = std::int64_t{1} << 16;
  double max_ratio = kMaxAnomalyRatio;
};

// kdd, kdd-rev, thyroid, arrhythmia, synth.
const std::vector<DatasetPreset>& DatasetPresets();
const DatasetPreset* FindPreset(const std::string& name);

struct SynthSpec {
  Index n_normal = 2000;
  Index n_anomaly = 200;
  Index dims = 8;
  double separation = 6.0;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::string dataset = "synth";
  std::string data_path;
  std::string label_column = "label";
  std::vector<std::string> positive_labels = {"1"};
  bool reverse_labels = false;
  char delimiter = ',';
  SynthSpec synth;

  std::vector<double> ratios = {0.0};
  std::optional<double> gamma;  // unset = auto (2 x ratio)
  int k = 5;
  std::vector<Mode> modes = {Mode::kBaseline};
  Representation representation = Representation::kGoad;
  ReprHyperparameters repr;
  std::int64_t train_steps = std::int64_t{1} << 16;
  RefinementSchedule schedule;
  double shrinkage = kDefaultShrinkage;
  double max_ratio = kMaxAnomalyRatio;

  int splits = 5;
  int seeds = 5;
  double scale_factor = 1.0;
  std::string out_dir = "stoc_out";
  int workers = 1;
  std::uint64_t seed = 0;
  bool checkpoints = false;

  // Throws ConfigError.
  void Validate() const;
  // Step budget after scale_factor, at least 1.
  std::int64_t EffectiveSteps() const;
  ProtocolOptions ToProtocol() const;
};

// Defaults for a dataset name (preset values applied). Throws ConfigError
// for an unknown name.
ExperimentConfig DefaultConfig(const std::string& dataset);

// Reads a config object, or a manifest whose "config" member is one. Keys
// that are absent keep the preset defaults of the named dataset.
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j);
nlohmann::json ExperimentConfigToJson(const ExperimentConfig& config);

LabeledTable LoadDataset(const ExperimentConfig& config);

// FNV-1a 64 of the canonical config JSON, hex encoded.
std::string ConfigHash(const ExperimentConfig& config);

// Writes report.json, runs.csv, curves.csv, manifest.json and, when
// enabled, checkpoints/ under config.out_dir.
MetricsReport RunExperiment(const ExperimentConfig& config);

struct RefineOnlyResult {
  RefinedSet refined;
  std::optional<double> anomalies_excluded;  // when labels are known
  std::optional<double> normals_excluded;
};

// Standardizes the whole table, runs one raw-feature refinement, and writes
// refined.csv (row,verdict,fold), kept_indices.txt, rejected_indices.txt and
// thresholds.json under config.out_dir.
RefineOnlyResult RefineOnly(const ExperimentConfig& config);

// Re-aggregates out_dir/runs.csv into report.json and curves.csv.
MetricsReport ReaggregateReport(const std::string& out_dir);

std::string ArtifactVersion();

}  // namespace stoc

#endif  // STOC_EXPERIMENT_H_
