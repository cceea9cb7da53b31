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

#ifndef STOC_PROTOCOL_H_
#define STOC_PROTOCOL_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stoc/data.h"
#include "stoc/pipeline.h"

namespace stoc {

// One (ratio, mode, split, seed) execution. Metrics are on a 0-100 scale.
struct RunRecord {
  std::string dataset;
  std::string representation;
  std::string mode;
  double anomaly_ratio = 0;
  int split_index = 0;
  int seed_index = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t model_seed = 0;
  double gamma = 0;
  bool ok = false;
  double f1 = 0;
  double auc = 0;
  double ap = 0;
  double recall_at_p70 = 0;
  double recall_at_p90 = 0;
  Index train_rows = 0;
  Index train_anomalies = 0;
  Index kept_rows = 0;
  // Last refinement call; NaN when the mode never refines.
  double anomalies_excluded = 0;
  double normals_excluded = 0;
  std::string error;
};

struct MetricSummary {
  double mean = 0;
  double std = 0;  // sample (n - 1) convention; 0 for a single run
};

struct AggregateRecord {
  std::string representation;
  std::string mode;
  double anomaly_ratio = 0;
  int runs = 0;    // successful runs
  int failed = 0;  // excluded from the statistics
  MetricSummary f1, auc, ap, recall_at_p70, recall_at_p90;
};

struct MetricsReport {
  std::vector<RunRecord> runs;
  std::vector<AggregateRecord> aggregates;
  int failed_runs = 0;
};

struct ProtocolOptions {
  std::vector<double> ratios = {0.0};
  std::vector<Mode> modes = {Mode::kBaseline};
  // Template for every run; mode, gamma and master_seed are overwritten.
  StocConfig config;
  // Fixed gamma; when unset, gamma = GammaForAssumedRatio(ratio).
  std::optional<double> gamma;
  int splits = 5;
  int seeds = 5;
  std::uint64_t master_seed = 0;
  int workers = 1;

  void Validate() const;
};

// Called after each successful run from a worker thread.
using RunCallback =
    std::function<void(const RunRecord&, const StocPipeline&)>;

// Runs the full ratio x mode x split x seed grid. Seeds are derived from
// (master_seed, split, seed) only, so results do not depend on the worker
// count, and all modes at a given (split, seed) share a split and a model
// seed.
MetricsReport RunProtocol(const LabeledTable& table,
                          const ProtocolOptions& options,
                          const RunCallback& on_run = {});

// Recomputes aggregates from run records, keyed by
// (representation, mode, ratio) in first-appearance order.
std::vector<AggregateRecord> Aggregate(const std::vector<RunRecord>& runs);

MetricSummary Summarize(const std::vector<double>& values);

// Scores and labels for AP-style metrics: if anomalies are the majority of
// the test set, the normal class becomes the positive class and scores are
// negated.
void MinorityAsPositive(std::vector<double>* scores, std::vector<int>* labels);

// Stable-column CSV for runs (one row per run) and curves (one row per
// aggregate). Doubles are printed with 17 significant digits.
void WriteRunsCsv(std::ostream& out, const std::vector<RunRecord>& runs);
std::vector<RunRecord> ReadRunsCsv(std::istream& in);
void WriteCurvesCsv(std::ostream& out,
                    const std::vector<AggregateRecord>& aggregates);
std::string ReportJson(const MetricsReport& report);

extern const char* const kRunsCsvHeader;
extern const char* const kCurvesCsvHeader;

}  // namespace stoc

#endif  // STOC_PROTOCOL_H_
