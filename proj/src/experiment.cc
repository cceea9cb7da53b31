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

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "stoc/checkpoint.h"

namespace stoc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

template <typename T>
void Read(const json& j, const char* key, T* out) {
  if (!j.contains(key)) return;
  try {
    *out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, std::string("wrong type: ") + e.what());
  }
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string Timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string ArtifactVersion() { return "0.1.0"; }

const std::vector<DatasetPreset>& DatasetPresets() {
  // KDDCup's "normal." traffic is the minority class and plays the anomaly;
  // kdd-rev flips that so attacks are anomalies.
  static const std::vector<DatasetPreset> presets = {
      {"kdd", "label", {"normal."}, false, 32, std::int64_t{1} << 10, 0.10},
      {"kdd-rev", "label", {"normal."}, true, 32, std::int64_t{1} << 10,
       0.025},
      {"thyroid", "label", {"1"}, false, 256, std::int64_t{1} << 16, 0.10},
      {"arrhythmia", "label", {"1"}, false, 256, std::int64_t{1} << 16, 0.10},
      {"synth", "label", {"1"}, false, 32, std::int64_t{1} << 10, 0.10},
      {"custom", "label", {"1"}, false, 256, std::int64_t{1} << 16, 0.10},
  };
  return presets;
}

const DatasetPreset* FindPreset(const std::string& name) {
  for (const auto& p : DatasetPresets()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

ExperimentConfig DefaultConfig(const std::string& dataset) {
  const DatasetPreset* preset = FindPreset(dataset);
  if (preset == nullptr) {
    throw ConfigError("dataset", "unknown dataset '" + dataset + "'");
  }
  ExperimentConfig c;
  c.dataset = dataset;
  c.label_column = preset->label_column;
  c.positive_labels = preset->positive_labels;
  c.reverse_labels = preset->reverse_labels;
  c.repr.transforms = preset->transforms;
  c.train_steps = preset->train_steps;
  c.max_ratio = preset->max_ratio;
  return c;
}

void ExperimentConfig::Validate() const {
  if (FindPreset(dataset) == nullptr) {
    throw ConfigError("dataset", "unknown dataset '" + dataset + "'");
  }
  if (dataset != "synth" && data_path.empty()) {
    throw ConfigError("data_path", "required for dataset '" + dataset + "'");
  }
  if (dataset == "synth" &&
      (synth.n_normal < 2 || synth.n_anomaly < 1 || synth.dims < 1 ||
       !(synth.separation > 0.0))) {
    throw ConfigError("synth", "invalid synthetic dataset parameters");
  }
  if (positive_labels.empty()) {
    throw ConfigError("positive_labels", "must not be empty");
  }
  if (ratios.empty()) throw ConfigError("ratios", "must not be empty");
  for (double r : ratios) {
    if (!(r >= 0.0 && r <= max_ratio)) {
      throw ConfigError("ratios", "each ratio must lie in [0, " +
                                      std::to_string(max_ratio) + "]");
    }
  }
  if (gamma && !(*gamma >= 0.0 && *gamma <= 1.0)) {
    throw ConfigError("gamma", "must be 'auto' or lie in [0, 1]");
  }
  if (k < 1) throw ConfigError("k", "must be >= 1");
  if (modes.empty()) throw ConfigError("modes", "must not be empty");
  for (Mode m : modes) {
    if (m == Mode::kStocFull && representation == Representation::kRaw) {
      throw ConfigError("modes", "stoc-full needs representation 'goad'");
    }
  }
  if (repr.transforms < 1) throw ConfigError("transforms", "must be >= 1");
  if (repr.projection_dims < 1) {
    throw ConfigError("projection_dims", "must be >= 1");
  }
  if (repr.batch_rows < 1) throw ConfigError("batch_rows", "must be >= 1");
  if (!(repr.learning_rate >= 0.0)) {
    throw ConfigError("learning_rate", "must be >= 0");
  }
  if (!(repr.momentum >= 0.0 && repr.momentum < 1.0)) {
    throw ConfigError("momentum", "must lie in [0, 1)");
  }
  if (!(repr.weight_decay >= 0.0)) {
    throw ConfigError("weight_decay", "must be >= 0");
  }
  if (train_steps < 0) throw ConfigError("train_steps", "must be >= 0");
  for (int e : schedule.epochs) {
    if (e < 1) throw ConfigError("schedule_epochs", "epochs are 1-based");
  }
  if (schedule.repeat_every < 0) {
    throw ConfigError("schedule_repeat_every", "must be >= 0");
  }
  if (!(shrinkage >= 0.0 && shrinkage <= 1.0)) {
    throw ConfigError("shrinkage", "must lie in [0, 1]");
  }
  if (splits < 1) throw ConfigError("splits", "must be >= 1");
  if (seeds < 1) throw ConfigError("seeds", "must be >= 1");
  if (!(scale_factor > 0.0 && scale_factor <= 1.0)) {
    throw ConfigError("scale_factor", "must lie in (0, 1]");
  }
  if (out_dir.empty()) throw ConfigError("out", "must not be empty");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
}

std::int64_t ExperimentConfig::EffectiveSteps() const {
  if (train_steps == 0) return 0;
  return std::max<std::int64_t>(
      1, std::llround(static_cast<double>(train_steps) * scale_factor));
}

ProtocolOptions ExperimentConfig::ToProtocol() const {
  ProtocolOptions p;
  p.ratios = ratios;
  p.modes = modes;
  p.gamma = gamma;
  p.splits = splits;
  p.seeds = seeds;
  p.master_seed = seed;
  p.workers = workers;
  p.config.representation = representation;
  p.config.ensemble_count = k;
  p.config.shrinkage = shrinkage;
  p.config.repr = repr;
  p.config.train_steps = EffectiveSteps();
  p.config.schedule = schedule;
  return p;
}

ExperimentConfig ExperimentConfigFromJson(const json& root) {
  const json& j = root.contains("config") ? root.at("config") : root;
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  std::string dataset = "synth";
  Read(j, "dataset", &dataset);
  ExperimentConfig c = DefaultConfig(dataset);

  Read(j, "data_path", &c.data_path);
  Read(j, "label_column", &c.label_column);
  Read(j, "positive_labels", &c.positive_labels);
  Read(j, "reverse_labels", &c.reverse_labels);
  if (j.contains("delimiter")) {
    std::string d;
    Read(j, "delimiter", &d);
    if (d.size() != 1) throw ConfigError("delimiter", "must be one character");
    c.delimiter = d[0];
  }
  if (j.contains("synth")) {
    const json& s = j.at("synth");
    Read(s, "n_normal", &c.synth.n_normal);
    Read(s, "n_anomaly", &c.synth.n_anomaly);
    Read(s, "dims", &c.synth.dims);
    Read(s, "separation", &c.synth.separation);
    Read(s, "seed", &c.synth.seed);
  }
  Read(j, "ratios", &c.ratios);
  if (j.contains("gamma")) {
    const json& g = j.at("gamma");
    if (g.is_string() && g.get<std::string>() == "auto") {
      c.gamma.reset();
    } else if (g.is_number()) {
      c.gamma = g.get<double>();
    } else {
      throw ConfigError("gamma", "must be 'auto' or a number");
    }
  }
  Read(j, "k", &c.k);
  if (j.contains("modes")) {
    std::vector<std::string> names;
    Read(j, "modes", &names);
    c.modes.clear();
    for (const auto& n : names) {
      try {
        c.modes.push_back(ParseMode(n));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("modes", e.what());
      }
    }
  }
  if (j.contains("representation")) {
    std::string r;
    Read(j, "representation", &r);
    try {
      c.representation = ParseRepresentation(r);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("representation", e.what());
    }
  }
  Read(j, "transforms", &c.repr.transforms);
  Read(j, "projection_dims", &c.repr.projection_dims);
  Read(j, "batch_rows", &c.repr.batch_rows);
  Read(j, "learning_rate", &c.repr.learning_rate);
  Read(j, "momentum", &c.repr.momentum);
  Read(j, "weight_decay", &c.repr.weight_decay);
  Read(j, "train_steps", &c.train_steps);
  Read(j, "schedule_epochs", &c.schedule.epochs);
  Read(j, "schedule_repeat_every", &c.schedule.repeat_every);
  Read(j, "shrinkage", &c.shrinkage);
  Read(j, "max_ratio", &c.max_ratio);
  Read(j, "splits", &c.splits);
  Read(j, "seeds", &c.seeds);
  Read(j, "scale_factor", &c.scale_factor);
  Read(j, "out", &c.out_dir);
  Read(j, "workers", &c.workers);
  Read(j, "seed", &c.seed);
  Read(j, "checkpoints", &c.checkpoints);
  return c;
}

json ExperimentConfigToJson(const ExperimentConfig& c) {
  std::vector<std::string> modes;
  for (Mode m : c.modes) modes.push_back(ToString(m));
  json j = {
      {"dataset", c.dataset},
      {"data_path", c.data_path},
      {"label_column", c.label_column},
      {"positive_labels", c.positive_labels},
      {"reverse_labels", c.reverse_labels},
      {"delimiter", std::string(1, c.delimiter)},
      {"synth",
       {{"n_normal", c.synth.n_normal},
        {"n_anomaly", c.synth.n_anomaly},
        {"dims", c.synth.dims},
        {"separation", c.synth.separation},
        {"seed", c.synth.seed}}},
      {"ratios", c.ratios},
      {"k", c.k},
      {"modes", modes},
      {"representation", ToString(c.representation)},
      {"transforms", c.repr.transforms},
      {"projection_dims", c.repr.projection_dims},
      {"batch_rows", c.repr.batch_rows},
      {"learning_rate", c.repr.learning_rate},
      {"momentum", c.repr.momentum},
      {"weight_decay", c.repr.weight_decay},
      {"train_steps", c.train_steps},
      {"schedule_epochs", c.schedule.epochs},
      {"schedule_repeat_every", c.schedule.repeat_every},
      {"shrinkage", c.shrinkage},
      {"max_ratio", c.max_ratio},
      {"splits", c.splits},
      {"seeds", c.seeds},
      {"scale_factor", c.scale_factor},
      {"out", c.out_dir},
      {"workers", c.workers},
      {"seed", c.seed},
      {"checkpoints", c.checkpoints}};
  if (c.gamma) {
    j["gamma"] = *c.gamma;
  } else {
    j["gamma"] = "auto";
  }
  return j;
}

std::string ConfigHash(const ExperimentConfig& config) {
  // Output location and worker count do not affect results.
  json j = ExperimentConfigToJson(config);
  j.erase("out");
  j.erase("workers");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LabeledTable LoadDataset(const ExperimentConfig& config) {
  LabeledTable table;
  if (config.dataset == "synth") {
    table = SynthBlobs(config.synth.n_normal, config.synth.n_anomaly,
                       config.synth.dims, config.synth.separation,
                       config.synth.seed);
  } else {
    DatasetDescriptor d;
    d.path = config.data_path;
    d.label_column = config.label_column;
    d.positive_label_values = {config.positive_labels.begin(),
                               config.positive_labels.end()};
    d.reverse_labels = config.reverse_labels;
    d.delimiter = config.delimiter;
    table = LoadCsv(d);
  }
  table.name = config.dataset;
  return table;
}

MetricsReport RunExperiment(const ExperimentConfig& config) {
  config.Validate();
  const LabeledTable table = LoadDataset(config);
  const fs::path out = config.out_dir;
  fs::create_directories(out);
  const fs::path checkpoint_dir = out / "checkpoints";
  if (config.checkpoints) fs::create_directories(checkpoint_dir);

  const ProtocolOptions options = config.ToProtocol();
  RunCallback on_run;
  if (config.checkpoints) {
    on_run = [&](const RunRecord& r, const StocPipeline& pipeline) {
      char name[128];
      std::snprintf(name, sizeof name, "%s_r%.4f_s%d_m%d.ckpt",
                    r.mode.c_str(), r.anomaly_ratio, r.split_index,
                    r.seed_index);
      StocConfig c = options.config;
      c.mode = pipeline.mode();
      c.gamma = r.gamma;
      c.master_seed = r.model_seed;
      SavePipelineFile((checkpoint_dir / name).string(), pipeline, c);
    };
  }
  MetricsReport report = RunProtocol(table, options, on_run);

  {
    std::ofstream runs(out / "runs.csv", std::ios::binary);
    WriteRunsCsv(runs, report.runs);
    std::ofstream curves(out / "curves.csv", std::ios::binary);
    WriteCurvesCsv(curves, report.aggregates);
  }
  WriteFile(out / "report.json", ReportJson(report) + "\n");

  json seeds = json::array();
  for (const RunRecord& r : report.runs) {
    seeds.push_back({{"mode", r.mode},
                     {"anomaly_ratio", r.anomaly_ratio},
                     {"split", r.split_index},
                     {"seed", r.seed_index},
                     {"split_seed", r.split_seed},
                     {"model_seed", r.model_seed}});
  }
  const json manifest = {{"artifact_version", ArtifactVersion()},
                         {"config", ExperimentConfigToJson(config)},
                         {"config_hash", ConfigHash(config)},
                         {"effective_train_steps", config.EffectiveSteps()},
                         {"run_seeds", seeds},
                         {"created_utc", Timestamp()}};
  WriteFile(out / "manifest.json", manifest.dump(2) + "\n");
  return report;
}

RefineOnlyResult RefineOnly(const ExperimentConfig& config) {
  config.Validate();
  const LabeledTable table = LoadDataset(config);
  const Matrix features = Scaler::Fit(table.features).Transform(table.features);

  RefinementConfig rc;
  rc.ensemble_count = config.k;
  rc.gamma = config.gamma ? *config.gamma
                          : GammaForAssumedRatio(config.ratios.back());
  rc.shrinkage = config.shrinkage;
  rc.partition_seed = PipelineSeeds::From(config.seed).partition;

  RefineOnlyResult result;
  result.refined = RefineData(features, IdentityExtractor(), rc, 0);
  const RefinementRecord diag =
      Summarize(result.refined, 0, 0, std::span<const int>(table.labels));
  result.anomalies_excluded = diag.anomalies_excluded;
  result.normals_excluded = diag.normals_excluded;

  const fs::path out = config.out_dir;
  fs::create_directories(out);
  std::ostringstream csv, kept, rejected;
  csv << "row,verdict,fold\n";
  for (std::size_t i = 0; i < result.refined.pseudo_labels.size(); ++i) {
    const bool out_row = result.refined.pseudo_labels[i] == 1;
    csv << i << ',' << (out_row ? "rejected" : "kept") << ','
        << result.refined.fold_assignment[i] << '\n';
    (out_row ? rejected : kept) << i << '\n';
  }
  WriteFile(out / "refined.csv", csv.str());
  WriteFile(out / "kept_indices.txt", kept.str());
  WriteFile(out / "rejected_indices.txt", rejected.str());
  json thresholds = json::array();
  for (double t : result.refined.thresholds) {
    if (std::isinf(t)) {
      thresholds.push_back("inf");
    } else {
      thresholds.push_back(t);
    }
  }
  const json summary = {{"gamma", rc.gamma},
                        {"k", rc.ensemble_count},
                        {"rows", result.refined.pseudo_labels.size()},
                        {"kept", result.refined.kept_indices.size()},
                        {"rejected", result.refined.pseudo_labels.size() -
                                         result.refined.kept_indices.size()},
                        {"thresholds", thresholds},
                        {"config", ExperimentConfigToJson(config)}};
  WriteFile(out / "thresholds.json", summary.dump(2) + "\n");
  return result;
}

MetricsReport ReaggregateReport(const std::string& out_dir) {
  const fs::path out = out_dir;
  std::ifstream in(out / "runs.csv");
  if (!in) throw std::runtime_error("cannot open " + (out / "runs.csv").string());
  MetricsReport report;
  report.runs = ReadRunsCsv(in);
  for (const RunRecord& r : report.runs) report.failed_runs += !r.ok;
  report.aggregates = Aggregate(report.runs);
  std::ofstream curves(out / "curves.csv", std::ios::binary);
  WriteCurvesCsv(curves, report.aggregates);
  WriteFile(out / "report.json", ReportJson(report) + "\n");
  return report;
}

}  // namespace stoc
