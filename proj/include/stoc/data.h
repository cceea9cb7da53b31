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

#ifndef STOC_DATA_H_
#define STOC_DATA_H_

#include <cstdint>
#include <set>
#include <string>

#include "stoc/types.h"

namespace stoc {

// A tabular dataset with ground-truth labels. Labels are only consumed by
// split construction and evaluation.
struct LabeledTable {
  Matrix features;
  Labels labels;
  std::string name;

  Index rows() const { return features.rows(); }
  Index dims() const { return features.cols(); }
  Index CountLabel(int label) const;

  // Throws std::invalid_argument if the row counts disagree or any feature
  // is non-finite.
  void Validate() const;
};

// Where and how to read a labeled CSV file.
struct DatasetDescriptor {
  std::string path;
  std::string label_column = "label";
  std::set<std::string> positive_label_values = {"1"};
  // When non-empty, label values outside positive and negative sets are
  // rejected. When empty, every non-positive value is normal.
  std::set<std::string> negative_label_values;
  bool reverse_labels = false;
  char delimiter = ',';
};

// Reads a delimiter-separated file with a header row. Numeric columns pass
// through; any column holding a non-numeric value is one-hot encoded over
// the sorted vocabulary of the whole file. Empty fields and "?" count as
// missing, and a row with a missing value is an error.
LabeledTable LoadCsv(const DatasetDescriptor& descriptor);

// Train/test split with contamination. `train_true_labels` is kept for
// diagnostics and is never handed to a training routine.
struct ExperimentSplit {
  Matrix train_features;
  Labels train_true_labels;
  Matrix test_features;
  Labels test_labels;
  double anomaly_ratio = 0.0;
  std::uint64_t split_seed = 0;
  std::uint64_t contamination_seed = 0;

  // Source-table row indices, each sorted ascending. `discarded_indices`
  // holds the normals that were swapped out for anomalies.
  IndexList train_indices;
  IndexList test_indices;
  IndexList discarded_indices;
};

inline constexpr double kMaxAnomalyRatio = 0.10;

// Half of the normals (chosen by `split_seed`) form the training pool. Then
// round(ratio * |train|) of them are swapped for anomalies chosen by
// `contamination_seed`, so |train| is unchanged. Everything else is test.
ExperimentSplit MakeSplit(const LabeledTable& table, double anomaly_ratio,
                          std::uint64_t split_seed,
                          std::uint64_t contamination_seed);

// Per-dimension standardization with population statistics.
class Scaler {
 public:
  Scaler() = default;
  Scaler(Vector mean, Vector stddev);

  // Constant columns get stddev 1 so they map to zero.
  static Scaler Fit(const Matrix& data);

  Matrix Transform(const Matrix& data) const;
  Matrix Inverse(const Matrix& data) const;

  const Vector& mean() const { return mean_; }
  const Vector& stddev() const { return stddev_; }

 private:
  Vector mean_;
  Vector stddev_;
};

struct StandardizedPair {
  Matrix train;
  Matrix test;
  Scaler scaler;
};

// Fits on `train` only and applies to both.
StandardizedPair Standardize(const Matrix& train, const Matrix& test);

// Normals ~ N(0, I); anomalies ~ N(separation * u, I) for a random unit u.
// Normals come first, then anomalies.
LabeledTable SynthBlobs(Index n_normal, Index n_anomaly, Index dims,
                        double separation, std::uint64_t seed);

}  // namespace stoc

#endif  // STOC_DATA_H_
