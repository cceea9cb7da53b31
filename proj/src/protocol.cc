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

#include "stoc/protocol.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "stoc/metrics.h"

namespace stoc {

const char* const kRunsCsvHeader =
    "dataset,representation,mode,anomaly_ratio,split,seed,split_seed,"
    "model_seed,gamma,status,f1,auc,ap,recall_at_p70,recall_at_p90,"
    "train_rows,train_anomalies,kept_rows,anomalies_excluded,"
    "normals_excluded,error";

const char* const kCurvesCsvHeader =
    "representation,mode,anomaly_ratio,runs,failed,f1_mean,f1_std,auc_mean,"
    "auc_std,ap_mean,ap_std,recall_at_p70_mean,recall_at_p70_std,"
    "recall_at_p90_mean,recall_at_p90_std";

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string Fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ParseField(const std::string& s) {
  if (s == "nan") return kNaN;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("bad number '" + s + "'");
  return v;
}

std::string CsvSafe(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
  }
  return s;
}

struct RunTask {
  double ratio;
  Mode mode;
  int split;
  int seed;
};

RunRecord ExecuteRun(const LabeledTable& table, const ProtocolOptions& options,
                     const RunTask& task, const RunCallback& on_run) {
  RunRecord rec;
  rec.dataset = table.name;
  rec.representation = ToString(options.config.representation);
  rec.mode = ToString(task.mode);
  rec.anomaly_ratio = task.ratio;
  rec.split_index = task.split;
  rec.seed_index = task.seed;
  rec.split_seed = DeriveSeed(options.master_seed,
                              {0x73706c74ULL, static_cast<std::uint64_t>(task.split)});
  const std::uint64_t contamination_seed = DeriveSeed(
      options.master_seed,
      {0x636f6e74ULL, static_cast<std::uint64_t>(task.split)});
  rec.model_seed = DeriveSeed(options.master_seed,
                              {static_cast<std::uint64_t>(task.split),
                               static_cast<std::uint64_t>(task.seed)});
  rec.gamma = options.gamma ? *options.gamma : GammaForAssumedRatio(task.ratio);
  rec.anomalies_excluded = kNaN;
  rec.normals_excluded = kNaN;
  try {
    const ExperimentSplit split =
        MakeSplit(table, task.ratio, rec.split_seed, contamination_seed);
    const StandardizedPair data =
        Standardize(split.train_features, split.test_features);
    StocConfig config = options.config;
    config.mode = task.mode;
    config.gamma = rec.gamma;
    config.master_seed = rec.model_seed;
    const StocPipeline pipeline =
        Fit(data.train, config, split.train_true_labels);

    rec.train_rows = data.train.rows();
    rec.train_anomalies = static_cast<Index>(
        std::count(split.train_true_labels.begin(),
                   split.train_true_labels.end(), 1));
    rec.kept_rows = static_cast<Index>(pipeline.final_pool().size());
    if (!pipeline.history().empty()) {
      const RefinementRecord& last = pipeline.history().back();
      rec.anomalies_excluded = last.anomalies_excluded.value_or(kNaN);
      rec.normals_excluded = last.normals_excluded.value_or(kNaN);
    }

    const Vector scored = pipeline.Predict(data.test);
    std::vector<double> scores(scored.data(), scored.data() + scored.size());
    std::vector<int> labels = split.test_labels;
    rec.auc = Auc(scores, labels);
    rec.f1 = F1AtRatio(scores, labels);
    MinorityAsPositive(&scores, &labels);
    rec.ap = AveragePrecision(scores, labels);
    rec.recall_at_p70 = RecallAtPrecision(scores, labels, 70.0);
    rec.recall_at_p90 = RecallAtPrecision(scores, labels, 90.0);
    rec.ok = true;
    if (on_run) on_run(rec, pipeline);
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

void ProtocolOptions::Validate() const {
  if (ratios.empty()) throw std::invalid_argument("ratios must not be empty");
  for (double r : ratios) {
    if (!(r >= 0.0 && r <= kMaxAnomalyRatio)) {
      throw std::invalid_argument("ratios must lie in [0, 0.1]");
    }
  }
  if (modes.empty()) throw std::invalid_argument("modes must not be empty");
  if (splits < 1) throw std::invalid_argument("splits must be >= 1");
  if (seeds < 1) throw std::invalid_argument("seeds must be >= 1");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (gamma && !(*gamma >= 0.0 && *gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in [0, 1]");
  }
  for (Mode m : modes) {
    StocConfig c = config;
    c.mode = m;
    c.Validate();
  }
}

MetricSummary Summarize(const std::vector<double>& values) {
  MetricSummary s;
  if (values.empty()) return {kNaN, kNaN};
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

void MinorityAsPositive(std::vector<double>* scores, std::vector<int>* labels) {
  const auto positives = std::count(labels->begin(), labels->end(), 1);
  if (2 * positives <= static_cast<long>(labels->size())) return;
  for (int& y : *labels) y = 1 - y;
  for (double& s : *scores) s = -s;
}

std::vector<AggregateRecord> Aggregate(const std::vector<RunRecord>& runs) {
  using Key = std::tuple<std::string, std::string, double>;
  std::vector<Key> order;
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : runs) {
    Key key{r.representation, r.mode, r.anomaly_ratio};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  std::vector<AggregateRecord> out;
  for (const Key& key : order) {
    AggregateRecord agg;
    std::tie(agg.representation, agg.mode, agg.anomaly_ratio) = key;
    std::vector<double> f1, auc, ap, r70, r90;
    for (const RunRecord* r : groups[key]) {
      if (!r->ok) {
        ++agg.failed;
        continue;
      }
      ++agg.runs;
      f1.push_back(r->f1);
      auc.push_back(r->auc);
      ap.push_back(r->ap);
      r70.push_back(r->recall_at_p70);
      r90.push_back(r->recall_at_p90);
    }
    agg.f1 = Summarize(f1);
    agg.auc = Summarize(auc);
    agg.ap = Summarize(ap);
    agg.recall_at_p70 = Summarize(r70);
    agg.recall_at_p90 = Summarize(r90);
    out.push_back(agg);
  }
  return out;
}

MetricsReport RunProtocol(const LabeledTable& table,
                          const ProtocolOptions& options,
                          const RunCallback& on_run) {
  options.Validate();
  table.Validate();
  std::vector<RunTask> tasks;
  for (double ratio : options.ratios) {
    for (Mode mode : options.modes) {
      for (int s = 0; s < options.splits; ++s) {
        for (int j = 0; j < options.seeds; ++j) {
          tasks.push_back({ratio, mode, s, j});
        }
      }
    }
  }

  MetricsReport report;
  report.runs.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      report.runs[i] = ExecuteRun(table, options, tasks[i], on_run);
    }
  };
  const int workers =
      std::min<int>(options.workers, static_cast<int>(tasks.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const RunRecord& r : report.runs) report.failed_runs += !r.ok;
  report.aggregates = Aggregate(report.runs);
  return report;
}

void WriteRunsCsv(std::ostream& out, const std::vector<RunRecord>& runs) {
  out << kRunsCsvHeader << '\n';
  for (const RunRecord& r : runs) {
    out << CsvSafe(r.dataset) << ',' << r.representation << ',' << r.mode
        << ',' << Fmt(r.anomaly_ratio) << ',' << r.split_index << ','
        << r.seed_index << ',' << r.split_seed << ',' << r.model_seed << ','
        << Fmt(r.gamma) << ',' << (r.ok ? "ok" : "failed") << ','
        << Fmt(r.f1) << ',' << Fmt(r.auc) << ',' << Fmt(r.ap) << ','
        << Fmt(r.recall_at_p70) << ',' << Fmt(r.recall_at_p90) << ','
        << r.train_rows << ',' << r.train_anomalies << ',' << r.kept_rows
        << ',' << Fmt(r.anomalies_excluded) << ','
        << Fmt(r.normals_excluded) << ',' << CsvSafe(r.error) << '\n';
  }
}

std::vector<RunRecord> ReadRunsCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRunsCsvHeader) {
    throw std::runtime_error("runs.csv header does not match");
  }
  std::vector<RunRecord> runs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 21) {
      throw std::runtime_error("runs.csv row has " + std::to_string(f.size()) +
                               " fields, expected 21");
    }
    RunRecord r;
    r.dataset = f[0];
    r.representation = f[1];
    r.mode = f[2];
    r.anomaly_ratio = ParseField(f[3]);
    r.split_index = std::stoi(f[4]);
    r.seed_index = std::stoi(f[5]);
    r.split_seed = std::stoull(f[6]);
    r.model_seed = std::stoull(f[7]);
    r.gamma = ParseField(f[8]);
    r.ok = f[9] == "ok";
    r.f1 = ParseField(f[10]);
    r.auc = ParseField(f[11]);
    r.ap = ParseField(f[12]);
    r.recall_at_p70 = ParseField(f[13]);
    r.recall_at_p90 = ParseField(f[14]);
    r.train_rows = std::stoll(f[15]);
    r.train_anomalies = std::stoll(f[16]);
    r.kept_rows = std::stoll(f[17]);
    r.anomalies_excluded = ParseField(f[18]);
    r.normals_excluded = ParseField(f[19]);
    r.error = f[20];
    runs.push_back(std::move(r));
  }
  return runs;
}

void WriteCurvesCsv(std::ostream& out,
                    const std::vector<AggregateRecord>& aggregates) {
  out << kCurvesCsvHeader << '\n';
  for (const AggregateRecord& a : aggregates) {
    out << a.representation << ',' << a.mode << ',' << Fmt(a.anomaly_ratio)
        << ',' << a.runs << ',' << a.failed;
    for (const MetricSummary* m :
         {&a.f1, &a.auc, &a.ap, &a.recall_at_p70, &a.recall_at_p90}) {
      out << ',' << Fmt(m->mean) << ',' << Fmt(m->std);
    }
    out << '\n';
  }
}

std::string ReportJson(const MetricsReport& report) {
  using nlohmann::json;
  auto summary = [](const MetricSummary& m) {
    return json{{"mean", m.mean}, {"std", m.std}};
  };
  json runs = json::array();
  for (const RunRecord& r : report.runs) {
    json j = {{"dataset", r.dataset},
              {"representation", r.representation},
              {"mode", r.mode},
              {"anomaly_ratio", r.anomaly_ratio},
              {"split", r.split_index},
              {"seed", r.seed_index},
              {"split_seed", r.split_seed},
              {"model_seed", r.model_seed},
              {"gamma", r.gamma},
              {"status", r.ok ? "ok" : "failed"},
              {"train_rows", r.train_rows},
              {"train_anomalies", r.train_anomalies},
              {"kept_rows", r.kept_rows},
              {"anomalies_excluded", r.anomalies_excluded},
              {"normals_excluded", r.normals_excluded}};
    if (r.ok) {
      j["f1"] = r.f1;
      j["auc"] = r.auc;
      j["ap"] = r.ap;
      j["recall_at_p70"] = r.recall_at_p70;
      j["recall_at_p90"] = r.recall_at_p90;
    } else {
      j["error"] = r.error;
    }
    runs.push_back(std::move(j));
  }
  json aggregates = json::array();
  for (const AggregateRecord& a : report.aggregates) {
    aggregates.push_back({{"representation", a.representation},
                          {"mode", a.mode},
                          {"anomaly_ratio", a.anomaly_ratio},
                          {"runs", a.runs},
                          {"failed", a.failed},
                          {"f1", summary(a.f1)},
                          {"auc", summary(a.auc)},
                          {"ap", summary(a.ap)},
                          {"recall_at_p70", summary(a.recall_at_p70)},
                          {"recall_at_p90", summary(a.recall_at_p90)}});
  }
  json root = {{"runs", runs},
               {"aggregates", aggregates},
               {"failed_runs", report.failed_runs},
               {"warning", report.failed_runs > 0}};
  return root.dump(2);
}

}  // namespace stoc
