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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "stoc/checkpoint.h"
#include "stoc/data.h"
#include "stoc/experiment.h"
#include "stoc/gde.h"
#include "stoc/metrics.h"
#include "stoc/pipeline.h"
#include "stoc/refine.h"

namespace py = pybind11;

namespace stoc {
namespace {

py::dict RecordToDict(const RefinementRecord& r) {
  py::dict d;
  d["epoch"] = r.epoch;
  d["step"] = r.step;
  d["kept"] = r.kept;
  d["rejected"] = r.rejected;
  d["anomalies_excluded"] = r.anomalies_excluded;
  d["normals_excluded"] = r.normals_excluded;
  return d;
}

PYBIND11_MODULE(_stoc, m) {
  m.doc() = "Self-trained one-class classification for anomaly detection";

  py::class_<LabeledTable>(m, "LabeledTable")
      .def_readonly("features", &LabeledTable::features)
      .def_readonly("labels", &LabeledTable::labels)
      .def_readonly("name", &LabeledTable::name);

  m.def("synth_blobs", &SynthBlobs, py::arg("n_normal"), py::arg("n_anomaly"),
        py::arg("dims"), py::arg("separation"), py::arg("seed") = 0);

  m.def(
      "load_csv",
      [](const std::string& path, const std::string& label_column,
         const std::vector<std::string>& positive_labels, bool reverse_labels) {
        DatasetDescriptor d;
        d.path = path;
        d.label_column = label_column;
        d.positive_label_values = {positive_labels.begin(),
                                   positive_labels.end()};
        d.reverse_labels = reverse_labels;
        return LoadCsv(d);
      },
      py::arg("path"), py::arg("label_column") = "label",
      py::arg("positive_labels") = std::vector<std::string>{"1"},
      py::arg("reverse_labels") = false);

  py::class_<ExperimentSplit>(m, "ExperimentSplit")
      .def_readonly("train_features", &ExperimentSplit::train_features)
      .def_readonly("train_true_labels", &ExperimentSplit::train_true_labels)
      .def_readonly("test_features", &ExperimentSplit::test_features)
      .def_readonly("test_labels", &ExperimentSplit::test_labels)
      .def_readonly("train_indices", &ExperimentSplit::train_indices)
      .def_readonly("test_indices", &ExperimentSplit::test_indices);

  m.def("make_split", &MakeSplit, py::arg("table"), py::arg("anomaly_ratio"),
        py::arg("split_seed"), py::arg("contamination_seed"));

  m.def(
      "standardize",
      [](const Matrix& train, const Matrix& test) {
        StandardizedPair p = Standardize(train, test);
        return py::make_tuple(p.train, p.test);
      },
      py::arg("train"), py::arg("test"));

  py::class_<GdeModel>(m, "GdeModel")
      .def_static("fit", &GdeModel::Fit, py::arg("features"),
                  py::arg("shrinkage") = kDefaultShrinkage)
      .def("score", &GdeModel::ScoreBatch, py::arg("queries"))
      .def_property_readonly("mean", &GdeModel::mean)
      .def_property_readonly("covariance", &GdeModel::Covariance)
      .def_property_readonly("shrinkage", &GdeModel::shrinkage);

  py::class_<RefinedSet>(m, "RefinedSet")
      .def_readonly("kept_indices", &RefinedSet::kept_indices)
      .def_readonly("pseudo_labels", &RefinedSet::pseudo_labels)
      .def_readonly("thresholds", &RefinedSet::thresholds)
      .def_readonly("fold_assignment", &RefinedSet::fold_assignment)
      .def_property_readonly("rejected_indices", &RefinedSet::RejectedIndices);

  m.def(
      "refine_data",
      [](const Matrix& features, int k, double gamma, std::uint64_t seed,
         double shrinkage) {
        RefinementConfig c;
        c.ensemble_count = k;
        c.gamma = gamma;
        c.partition_seed = seed;
        c.shrinkage = shrinkage;
        return RefineData(features, IdentityExtractor(), c);
      },
      "One refinement pass over raw features.", py::arg("features"),
      py::arg("k") = 5, py::arg("gamma") = 0.2, py::arg("seed") = 0,
      py::arg("shrinkage") = kDefaultShrinkage);

  m.def("percentile_threshold",
        [](const std::vector<double>& scores, double gamma) {
          return PercentileThreshold(scores, gamma);
        },
        py::arg("scores"), py::arg("gamma"));

  py::class_<StocConfig>(m, "StocConfig")
      .def(py::init<>())
      .def_property(
          "mode", [](const StocConfig& c) { return ToString(c.mode); },
          [](StocConfig& c, const std::string& v) { c.mode = ParseMode(v); })
      .def_property(
          "representation",
          [](const StocConfig& c) { return ToString(c.representation); },
          [](StocConfig& c, const std::string& v) {
            c.representation = ParseRepresentation(v);
          })
      .def_readwrite("k", &StocConfig::ensemble_count)
      .def_readwrite("gamma", &StocConfig::gamma)
      .def_readwrite("shrinkage", &StocConfig::shrinkage)
      .def_readwrite("train_steps", &StocConfig::train_steps)
      .def_readwrite("seed", &StocConfig::master_seed)
      .def_property(
          "transforms", [](const StocConfig& c) { return c.repr.transforms; },
          [](StocConfig& c, int v) { c.repr.transforms = v; })
      .def_property(
          "projection_dims",
          [](const StocConfig& c) { return c.repr.projection_dims; },
          [](StocConfig& c, Index v) { c.repr.projection_dims = v; })
      .def_property(
          "learning_rate",
          [](const StocConfig& c) { return c.repr.learning_rate; },
          [](StocConfig& c, double v) { c.repr.learning_rate = v; })
      .def_property(
          "schedule_epochs",
          [](const StocConfig& c) { return c.schedule.epochs; },
          [](StocConfig& c, const std::vector<int>& v) {
            c.schedule.epochs = v;
          })
      .def_property(
          "schedule_repeat_every",
          [](const StocConfig& c) { return c.schedule.repeat_every; },
          [](StocConfig& c, int v) { c.schedule.repeat_every = v; })
      .def("validate", &StocConfig::Validate)
      .def("to_json", &ConfigToJson);

  py::class_<StocPipeline>(m, "StocPipeline")
      .def("predict", &StocPipeline::Predict, py::arg("queries"))
      .def_property_readonly(
          "mode", [](const StocPipeline& p) { return ToString(p.mode()); })
      .def_property_readonly("final_pool", &StocPipeline::final_pool)
      .def_property_readonly("history",
                             [](const StocPipeline& p) {
                               py::list out;
                               for (const auto& r : p.history()) {
                                 out.append(RecordToDict(r));
                               }
                               return out;
                             })
      .def(
          "save",
          [](const StocPipeline& p, const std::string& path,
             const StocConfig& config) { SavePipelineFile(path, p, config); },
          py::arg("path"), py::arg("config"));

  m.def("load_pipeline",
        [](const std::string& path) { return LoadPipelineFile(path); },
        py::arg("path"));

  m.def(
      "fit",
      [](const Matrix& train, const StocConfig& config,
         const std::vector<int>& diagnostic_labels) {
        py::gil_scoped_release release;
        return Fit(train, config, diagnostic_labels);
      },
      py::arg("train"), py::arg("config"),
      py::arg("diagnostic_labels") = std::vector<int>{});

  m.def("auc", [](const std::vector<double>& s, const std::vector<int>& y) {
    return Auc(s, y);
  }, py::arg("scores"), py::arg("labels"));
  m.def("average_precision",
        [](const std::vector<double>& s, const std::vector<int>& y) {
          return AveragePrecision(s, y);
        },
        py::arg("scores"), py::arg("labels"));
  m.def("f1_at_ratio",
        [](const std::vector<double>& s, const std::vector<int>& y) {
          return F1AtRatio(s, y);
        },
        py::arg("scores"), py::arg("labels"));
  m.def("recall_at_precision",
        [](const std::vector<double>& s, const std::vector<int>& y, double p) {
          return RecallAtPrecision(s, y, p);
        },
        py::arg("scores"), py::arg("labels"), py::arg("precision"));

  m.def(
      "_run_experiment_json",
      [](const std::string& config_json) {
        const ExperimentConfig c =
            ExperimentConfigFromJson(nlohmann::json::parse(config_json));
        py::gil_scoped_release release;
        return ReportJson(RunExperiment(c));
      },
      py::arg("config_json"));

  m.def(
      "_validate_json",
      [](const std::string& config_json) {
        const ExperimentConfig c =
            ExperimentConfigFromJson(nlohmann::json::parse(config_json));
        c.Validate();
        return ConfigHash(c);
      },
      py::arg("config_json"));

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
}

}  // namespace
}  // namespace stoc
