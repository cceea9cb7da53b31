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

// Command-line front end: run, refine-only, validate, report.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stoc/experiment.h"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> dataset;
  std::optional<std::string> data_path;
  std::optional<std::string> label_column;
  std::optional<std::vector<std::string>> positive_labels;
  bool reverse_labels = false;
  std::optional<std::vector<double>> ratios;
  std::optional<std::string> gamma;
  std::optional<int> k;
  std::optional<std::vector<std::string>> modes;
  std::optional<std::string> representation;
  std::optional<int> splits;
  std::optional<int> seeds;
  std::optional<double> scale_factor;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> train_steps;
  std::optional<int> transforms;
  bool checkpoints = false;
};

void AddCommonFlags(CLI::App* cmd, Overrides* o) {
  cmd->add_option("--config", o->config_path,
                  "JSON config or manifest; flags override it");
  cmd->add_option("--dataset", o->dataset,
                  "kdd, kdd-rev, thyroid, arrhythmia, synth or custom");
  cmd->add_option("--data-path", o->data_path, "CSV file with a header row");
  cmd->add_option("--label-column", o->label_column);
  cmd->add_option("--positive-labels", o->positive_labels)->delimiter(',');
  cmd->add_flag("--reverse-labels", o->reverse_labels);
  cmd->add_option("--ratios", o->ratios, "training anomaly ratios")
      ->delimiter(',');
  cmd->add_option("--gamma", o->gamma, "'auto' (2 x ratio) or a fraction");
  cmd->add_option("--k", o->k, "ensemble size");
  cmd->add_option("--modes", o->modes, "baseline, stoc-fixed, stoc-full")
      ->delimiter(',');
  cmd->add_option("--representation", o->representation, "goad or raw");
  cmd->add_option("--splits", o->splits);
  cmd->add_option("--seeds", o->seeds);
  cmd->add_option("--scale-factor", o->scale_factor,
                  "multiplies the training step budget, in (0, 1]");
  cmd->add_option("--out", o->out, "output directory");
  cmd->add_option("--workers", o->workers);
  cmd->add_option("--seed", o->seed, "master seed");
  cmd->add_option("--train-steps", o->train_steps);
  cmd->add_option("--transforms", o->transforms);
  cmd->add_flag("--checkpoints", o->checkpoints, "save per-run checkpoints");
}

stoc::ExperimentConfig Resolve(const Overrides& o) {
  stoc::ExperimentConfig c;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw std::runtime_error("cannot open " + o.config_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw stoc::ConfigError("config", e.what());
    }
    if (o.dataset) {
      nlohmann::json& body = j.contains("config") ? j["config"] : j;
      body["dataset"] = *o.dataset;
    }
    c = stoc::ExperimentConfigFromJson(j);
  } else {
    c = stoc::DefaultConfig(o.dataset.value_or("synth"));
    c.workers = static_cast<int>(
        std::max(1u, std::thread::hardware_concurrency()));
  }
  if (o.data_path) c.data_path = *o.data_path;
  if (o.label_column) c.label_column = *o.label_column;
  if (o.positive_labels) c.positive_labels = *o.positive_labels;
  if (o.reverse_labels) c.reverse_labels = true;
  if (o.ratios) c.ratios = *o.ratios;
  if (o.gamma) {
    if (*o.gamma == "auto") {
      c.gamma.reset();
    } else {
      try {
        c.gamma = std::stod(*o.gamma);
      } catch (const std::exception&) {
        throw stoc::ConfigError("gamma", "must be 'auto' or a number");
      }
    }
  }
  if (o.k) c.k = *o.k;
  if (o.modes) {
    c.modes.clear();
    for (const auto& m : *o.modes) {
      try {
        c.modes.push_back(stoc::ParseMode(m));
      } catch (const std::invalid_argument& e) {
        throw stoc::ConfigError("modes", e.what());
      }
    }
  }
  if (o.representation) {
    try {
      c.representation = stoc::ParseRepresentation(*o.representation);
    } catch (const std::invalid_argument& e) {
      throw stoc::ConfigError("representation", e.what());
    }
  }
  if (o.splits) c.splits = *o.splits;
  if (o.seeds) c.seeds = *o.seeds;
  if (o.scale_factor) c.scale_factor = *o.scale_factor;
  if (o.out) c.out_dir = *o.out;
  if (o.workers) c.workers = *o.workers;
  if (o.seed) c.seed = *o.seed;
  if (o.train_steps) c.train_steps = *o.train_steps;
  if (o.transforms) c.repr.transforms = *o.transforms;
  if (o.checkpoints) c.checkpoints = true;
  return c;
}

void PrintAggregates(const stoc::MetricsReport& report) {
  for (const auto& a : report.aggregates) {
    std::printf("%-5s %-10s ratio=%.4f runs=%d failed=%d  F1 %.1f+-%.1f  "
                "AUC %.1f+-%.1f  AP %.1f+-%.1f\n",
                a.representation.c_str(), a.mode.c_str(), a.anomaly_ratio,
                a.runs, a.failed, a.f1.mean, a.f1.std, a.auc.mean, a.auc.std,
                a.ap.mean, a.ap.std);
  }
  if (report.failed_runs > 0) {
    std::fprintf(stderr, "warning: %d run(s) failed; see report.json\n",
                 report.failed_runs);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-trained one-class classification experiments"};
  app.require_subcommand(1);

  Overrides run_o, refine_o, validate_o;
  CLI::App* run = app.add_subcommand("run", "run the evaluation protocol");
  AddCommonFlags(run, &run_o);
  CLI::App* refine =
      app.add_subcommand("refine-only", "write refined/rejected row indices");
  AddCommonFlags(refine, &refine_o);
  CLI::App* validate =
      app.add_subcommand("validate", "check a configuration and exit");
  AddCommonFlags(validate, &validate_o);
  std::string report_dir;
  CLI::App* report =
      app.add_subcommand("report", "re-aggregate an existing runs.csv");
  report->add_option("--out", report_dir, "directory holding runs.csv")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const stoc::ExperimentConfig c = Resolve(run_o);
      c.Validate();
      const stoc::MetricsReport r = stoc::RunExperiment(c);
      PrintAggregates(r);
      std::printf("wrote %s/{report.json,runs.csv,curves.csv,manifest.json}\n",
                  c.out_dir.c_str());
    } else if (*refine) {
      const stoc::ExperimentConfig c = Resolve(refine_o);
      c.Validate();
      const stoc::RefineOnlyResult r = stoc::RefineOnly(c);
      const std::size_t rejected = r.refined.pseudo_labels.size() -
                                   r.refined.kept_indices.size();
      std::printf("rows=%zu kept=%zu rejected=%zu\n",
                  r.refined.pseudo_labels.size(), r.refined.kept_indices.size(),
                  rejected);
      if (r.anomalies_excluded) {
        std::printf("diagnostic: anomalies excluded %.3f, normals excluded "
                    "%.3f\n",
                    *r.anomalies_excluded, r.normals_excluded.value_or(0.0));
      }
    } else if (*validate) {
      const stoc::ExperimentConfig c = Resolve(validate_o);
      c.Validate();
      std::printf("ok (config hash %s)\n", stoc::ConfigHash(c).c_str());
    } else if (*report) {
      PrintAggregates(stoc::ReaggregateReport(report_dir));
    }
  } catch (const stoc::ConfigError& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
