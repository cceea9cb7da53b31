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

#include "stoc/experiment.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"

namespace stoc {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int CountLines(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig SmallSynth(const std::string& out) {
  ExperimentConfig c = DefaultConfig("synth");
  c.synth = {400, 40, 4, 6.0, 3};
  c.ratios = {0.0, 0.025, 0.05, 0.075, 0.1};
  c.modes = {Mode::kBaseline, Mode::kStocFull};
  c.repr.transforms = 4;
  c.repr.projection_dims = 8;
  c.train_steps = 20;
  c.splits = 1;
  c.seeds = 1;
  c.out_dir = out;
  return c;
}

TEST(Presets, TableDefaults) {
  const ExperimentConfig kdd = DefaultConfig("kdd");
  EXPECT_EQ(kdd.repr.transforms, 32);
  EXPECT_EQ(kdd.train_steps, 1 << 10);
  EXPECT_EQ(kdd.positive_labels, std::vector<std::string>{"normal."});
  EXPECT_TRUE(DefaultConfig("kdd-rev").reverse_labels);
  for (const char* name : {"thyroid", "arrhythmia"}) {
    const ExperimentConfig c = DefaultConfig(name);
    EXPECT_EQ(c.repr.transforms, 256);
    EXPECT_EQ(c.train_steps, 1 << 16);
    EXPECT_EQ(c.repr.projection_dims, 32);
    EXPECT_EQ(c.repr.batch_rows, 64);
  }
  try {
    DefaultConfig("mnist");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "dataset");
  }
}

TEST(Validate, NamesTheOffendingField) {
  auto field_of = [](ExperimentConfig c) -> std::string {
    try {
      c.Validate();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return "";
  };
  ExperimentConfig c = DefaultConfig("synth");
  EXPECT_EQ(field_of(c), "");
  c.gamma = 1.5;
  EXPECT_EQ(field_of(c), "gamma");
  c = DefaultConfig("synth");
  c.ratios = {0.2};
  EXPECT_EQ(field_of(c), "ratios");
  c = DefaultConfig("kdd-rev");
  c.data_path = "x.csv";
  c.ratios = {0.05};
  EXPECT_EQ(field_of(c), "ratios");
  c = DefaultConfig("thyroid");
  EXPECT_EQ(field_of(c), "data_path");
  c = DefaultConfig("synth");
  c.scale_factor = 0.0;
  EXPECT_EQ(field_of(c), "scale_factor");
  c = DefaultConfig("synth");
  c.representation = Representation::kRaw;
  c.modes = {Mode::kStocFull};
  EXPECT_EQ(field_of(c), "modes");
}

TEST(ConfigJson, RoundTripAndManifest) {
  ExperimentConfig c = SmallSynth("somewhere");
  c.gamma = 0.3;
  const nlohmann::json j = ExperimentConfigToJson(c);
  const ExperimentConfig back = ExperimentConfigFromJson(j);
  EXPECT_EQ(ExperimentConfigToJson(back), j);
  const ExperimentConfig from_manifest =
      ExperimentConfigFromJson(nlohmann::json{{"config", j}});
  EXPECT_EQ(ConfigHash(from_manifest), ConfigHash(c));

  ExperimentConfig moved = c;
  moved.out_dir = "elsewhere";
  moved.workers = 7;
  EXPECT_EQ(ConfigHash(moved), ConfigHash(c));
  moved.seed = 1;
  EXPECT_NE(ConfigHash(moved), ConfigHash(c));

  EXPECT_FALSE(ExperimentConfigFromJson({{"gamma", "auto"}}).gamma.has_value());
  try {
    ExperimentConfigFromJson({{"k", "five"}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "k");
  }
}

TEST(ScaleFactor, MultipliesStepsOnly) {
  ExperimentConfig c = DefaultConfig("thyroid");
  c.scale_factor = 0.25;
  EXPECT_EQ(c.EffectiveSteps(), 1 << 14);
  EXPECT_EQ(c.ToProtocol().config.train_steps, 1 << 14);
  EXPECT_EQ(c.ToProtocol().config.repr.transforms, 256);
  c.scale_factor = 1e-9;
  EXPECT_EQ(c.EffectiveSteps(), 1);
}

TEST(RunExperiment, WritesArtifactsWithCurveShape) {
  const fs::path dir = FreshDir("stoc_exp_shape");
  ExperimentConfig c = SmallSynth(dir.string());
  c.checkpoints = true;
  const MetricsReport r = RunExperiment(c);
  EXPECT_EQ(r.runs.size(), 10u);
  for (const char* f : {"report.json", "runs.csv", "curves.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(CountLines(dir / "curves.csv"), 1 + 5 * 2);
  EXPECT_EQ(CountLines(dir / "runs.csv"), 1 + 10);
  int checkpoints = 0;
  for (const auto& e : fs::directory_iterator(dir / "checkpoints")) {
    (void)e;
    ++checkpoints;
  }
  EXPECT_EQ(checkpoints, 10);

  const auto manifest = nlohmann::json::parse(Slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["artifact_version"], ArtifactVersion());
  EXPECT_EQ(manifest["config_hash"], ConfigHash(c));
  EXPECT_EQ(manifest["run_seeds"].size(), 10u);
}

TEST(RunExperiment, RerunFromManifestIsByteIdentical) {
  const fs::path a = FreshDir("stoc_exp_a");
  const fs::path b = FreshDir("stoc_exp_b");
  RunExperiment(SmallSynth(a.string()));
  const auto manifest = nlohmann::json::parse(Slurp(a / "manifest.json"));
  ExperimentConfig again = ExperimentConfigFromJson(manifest);
  again.out_dir = b.string();
  again.workers = 2;
  RunExperiment(again);
  EXPECT_EQ(Slurp(a / "runs.csv"), Slurp(b / "runs.csv"));
  EXPECT_EQ(Slurp(a / "curves.csv"), Slurp(b / "curves.csv"));
  EXPECT_EQ(Slurp(a / "report.json"), Slurp(b / "report.json"));
}

TEST(ReaggregateReport, MatchesOriginalCurves) {
  const fs::path dir = FreshDir("stoc_exp_report");
  RunExperiment(SmallSynth(dir.string()));
  const std::string curves = Slurp(dir / "curves.csv");
  fs::remove(dir / "curves.csv");
  ReaggregateReport(dir.string());
  EXPECT_EQ(Slurp(dir / "curves.csv"), curves);
  EXPECT_THROW(ReaggregateReport((dir / "missing").string()), std::runtime_error);
}

TEST(RefineOnly, GammaZeroRejectsNothing) {
  const fs::path dir = FreshDir("stoc_refine_zero");
  ExperimentConfig c = SmallSynth(dir.string());
  c.gamma = 0.0;
  const RefineOnlyResult r = RefineOnly(c);
  EXPECT_TRUE(r.refined.RejectedIndices().empty());
  EXPECT_EQ(fs::file_size(dir / "rejected_indices.txt"), 0u);
  EXPECT_EQ(CountLines(dir / "kept_indices.txt"), 440);
  EXPECT_EQ(CountLines(dir / "refined.csv"), 1 + 440);
}

TEST(RefineOnly, RejectsPlantedAnomalies) {
  const fs::path dir = FreshDir("stoc_refine_synth");
  ExperimentConfig c = DefaultConfig("synth");
  c.out_dir = dir.string();
  c.gamma = 0.2;
  const RefineOnlyResult r = RefineOnly(c);
  ASSERT_TRUE(r.anomalies_excluded.has_value());
  EXPECT_GE(*r.anomalies_excluded, 0.8);

  const LabeledTable t = LoadDataset(c);
  std::ifstream in(dir / "rejected_indices.txt");
  Index row = 0, anomalies = 0;
  while (in >> row) anomalies += t.labels[row];
  EXPECT_GE(anomalies, static_cast<Index>(0.8 * t.CountLabel(1)));
  EXPECT_EQ(CountLines(dir / "refined.csv"), 1 + t.rows());
  const auto thresholds = nlohmann::json::parse(Slurp(dir / "thresholds.json"));
  EXPECT_EQ(thresholds["thresholds"].size(), 5u);
}

TEST(LoadDataset, MissingFile) {
  ExperimentConfig c = DefaultConfig("thyroid");
  c.data_path = "/nonexistent/thyroid.csv";
  EXPECT_THROW(LoadDataset(c), std::runtime_error);
}

}  // namespace
}  // namespace stoc
