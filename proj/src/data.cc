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

#include "stoc/data.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace stoc {
namespace {

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

// Splits one line, honouring double-quoted fields.
std::vector<std::string> SplitLine(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"') {
      if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else {
        quoted = !quoted;
      }
    } else if (c == delimiter && !quoted) {
      fields.push_back(Trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(Trim(current));
  return fields;
}

bool ParseDouble(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

bool IsMissing(const std::string& s) { return s.empty() || s == "?"; }

}  // namespace

Index LabeledTable::CountLabel(int label) const {
  return std::count(labels.begin(), labels.end(), label);
}

void LabeledTable::Validate() const {
  if (static_cast<Index>(labels.size()) != features.rows()) {
    throw std::invalid_argument("label count does not match feature rows");
  }
  if (!features.allFinite()) {
    throw std::invalid_argument("features contain non-finite values");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("labels must be 0/1");
  }
}

LabeledTable LoadCsv(const DatasetDescriptor& descriptor) {
  std::ifstream in(descriptor.path);
  if (!in) throw std::runtime_error("cannot open " + descriptor.path);

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(descriptor.path + ": missing header row");
  }
  const std::vector<std::string> header = SplitLine(line, descriptor.delimiter);
  const auto label_it =
      std::find(header.begin(), header.end(), descriptor.label_column);
  if (label_it == header.end()) {
    throw std::runtime_error(descriptor.path + ": no column named '" +
                             descriptor.label_column + "'");
  }
  const std::size_t label_col = label_it - header.begin();

  std::vector<std::vector<std::string>> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    auto fields = SplitLine(line, descriptor.delimiter);
    if (fields.size() != header.size()) {
      throw std::runtime_error(descriptor.path + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      if (IsMissing(f)) {
        throw std::runtime_error(descriptor.path + ":" +
                                 std::to_string(line_no) + ": missing value");
      }
    }
    cells.push_back(std::move(fields));
  }
  if (cells.empty()) throw std::runtime_error(descriptor.path + ": no rows");

  // Column typing: numeric unless some value fails to parse.
  struct ColumnPlan {
    std::size_t source;
    bool numeric = true;
    std::map<std::string, Index> vocabulary;  // sorted, for one-hot
  };
  std::vector<ColumnPlan> plans;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_col) continue;
    ColumnPlan plan;
    plan.source = c;
    double unused;
    for (const auto& row : cells) {
      if (!ParseDouble(row[c], &unused)) {
        plan.numeric = false;
        break;
      }
    }
    if (!plan.numeric) {
      for (const auto& row : cells) plan.vocabulary.emplace(row[c], 0);
      Index k = 0;
      for (auto& [value, slot] : plan.vocabulary) slot = k++;
    }
    plans.push_back(std::move(plan));
  }

  Index width = 0;
  for (const auto& p : plans) {
    width += p.numeric ? 1 : static_cast<Index>(p.vocabulary.size());
  }
  if (width == 0) {
    throw std::runtime_error(descriptor.path + ": no feature columns");
  }

  LabeledTable table;
  table.name = descriptor.path;
  table.features = Matrix::Zero(static_cast<Index>(cells.size()), width);
  table.labels.resize(cells.size());
  for (std::size_t r = 0; r < cells.size(); ++r) {
    Index col = 0;
    for (const auto& p : plans) {
      const std::string& v = cells[r][p.source];
      if (p.numeric) {
        ParseDouble(v, &table.features(r, col));
        ++col;
      } else {
        table.features(r, col + p.vocabulary.at(v)) = 1.0;
        col += static_cast<Index>(p.vocabulary.size());
      }
    }
    const std::string& raw = cells[r][label_col];
    int y;
    if (descriptor.positive_label_values.count(raw)) {
      y = 1;
    } else if (descriptor.negative_label_values.empty() ||
               descriptor.negative_label_values.count(raw)) {
      y = 0;
    } else {
      throw std::runtime_error(descriptor.path + ": unknown label value '" +
                               raw + "'");
    }
    table.labels[r] = descriptor.reverse_labels ? 1 - y : y;
  }
  table.Validate();
  return table;
}

ExperimentSplit MakeSplit(const LabeledTable& table, double anomaly_ratio,
                          std::uint64_t split_seed,
                          std::uint64_t contamination_seed) {
  table.Validate();
  if (!(anomaly_ratio >= 0.0 && anomaly_ratio <= kMaxAnomalyRatio)) {
    throw std::invalid_argument("anomaly_ratio must lie in [0, 0.1]");
  }
  IndexList normals, anomalies;
  for (Index i = 0; i < table.rows(); ++i) {
    (table.labels[i] == 0 ? normals : anomalies).push_back(i);
  }
  if (normals.size() < 2) {
    throw std::invalid_argument("need at least two normal rows to split");
  }

  std::mt19937_64 split_rng(split_seed);
  std::shuffle(normals.begin(), normals.end(), split_rng);
  const std::size_t n_train = normals.size() / 2;
  IndexList pool(normals.begin(), normals.begin() + n_train);
  IndexList test(normals.begin() + n_train, normals.end());

  const auto n_swap = static_cast<std::size_t>(
      std::llround(anomaly_ratio * static_cast<double>(n_train)));
  if (n_swap > 0 && n_swap >= anomalies.size()) {
    throw std::invalid_argument(
        "insufficient anomalies: need " + std::to_string(n_swap) +
        " for training plus at least one for test, have " +
        std::to_string(anomalies.size()));
  }

  std::mt19937_64 contamination_rng(contamination_seed);
  std::shuffle(pool.begin(), pool.end(), contamination_rng);
  std::shuffle(anomalies.begin(), anomalies.end(), contamination_rng);

  ExperimentSplit split;
  split.anomaly_ratio = anomaly_ratio;
  split.split_seed = split_seed;
  split.contamination_seed = contamination_seed;
  split.discarded_indices.assign(pool.begin(), pool.begin() + n_swap);
  split.train_indices.assign(pool.begin() + n_swap, pool.end());
  split.train_indices.insert(split.train_indices.end(), anomalies.begin(),
                             anomalies.begin() + n_swap);
  split.test_indices = std::move(test);
  split.test_indices.insert(split.test_indices.end(),
                            anomalies.begin() + n_swap, anomalies.end());
  std::sort(split.discarded_indices.begin(), split.discarded_indices.end());
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());

  split.train_features = SelectRows(table.features, split.train_indices);
  split.test_features = SelectRows(table.features, split.test_indices);
  for (Index i : split.train_indices) {
    split.train_true_labels.push_back(table.labels[i]);
  }
  for (Index i : split.test_indices) split.test_labels.push_back(table.labels[i]);
  return split;
}

Scaler::Scaler(Vector mean, Vector stddev)
    : mean_(std::move(mean)), stddev_(std::move(stddev)) {
  if (mean_.size() != stddev_.size()) {
    throw std::invalid_argument("scaler mean/stddev size mismatch");
  }
  if ((stddev_.array() <= 0.0).any()) {
    throw std::invalid_argument("scaler stddev must be positive");
  }
}

Scaler Scaler::Fit(const Matrix& data) {
  if (data.rows() == 0) throw std::invalid_argument("cannot fit empty data");
  const Vector mean = data.colwise().mean().transpose();
  Vector stddev =
      ((data.rowwise() - mean.transpose()).array().square().colwise().sum() /
       static_cast<double>(data.rows()))
          .sqrt()
          .transpose();
  for (Index j = 0; j < stddev.size(); ++j) {
    if (!(stddev[j] > 0.0)) stddev[j] = 1.0;
  }
  return Scaler(mean, stddev);
}

Matrix Scaler::Transform(const Matrix& data) const {
  if (data.cols() != mean_.size()) {
    throw std::invalid_argument("scaler dimension mismatch");
  }
  return ((data.rowwise() - mean_.transpose()).array().rowwise() /
          stddev_.transpose().array())
      .matrix();
}

Matrix Scaler::Inverse(const Matrix& data) const {
  if (data.cols() != mean_.size()) {
    throw std::invalid_argument("scaler dimension mismatch");
  }
  return ((data.array().rowwise() * stddev_.transpose().array()).matrix())
             .rowwise() +
         mean_.transpose();
}

StandardizedPair Standardize(const Matrix& train, const Matrix& test) {
  if (train.cols() != test.cols()) {
    throw std::invalid_argument("train/test column counts differ");
  }
  Scaler scaler = Scaler::Fit(train);
  return {scaler.Transform(train), scaler.Transform(test), std::move(scaler)};
}

LabeledTable SynthBlobs(Index n_normal, Index n_anomaly, Index dims,
                        double separation, std::uint64_t seed) {
  if (n_normal <= 0 || n_anomaly <= 0 || dims < 1 || !(separation > 0.0)) {
    throw std::invalid_argument("synth_blobs: invalid arguments");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Vector direction(dims);
  for (Index j = 0; j < dims; ++j) direction[j] = gauss(rng);
  direction.normalize();

  LabeledTable table;
  table.name = "synth_blobs";
  table.features.resize(n_normal + n_anomaly, dims);
  table.labels.assign(n_normal + n_anomaly, 0);
  for (Index i = 0; i < n_normal + n_anomaly; ++i) {
    for (Index j = 0; j < dims; ++j) table.features(i, j) = gauss(rng);
    if (i >= n_normal) {
      table.features.row(i) += separation * direction.transpose();
      table.labels[i] = 1;
    }
  }
  return table;
}

}  // namespace stoc
