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

#ifndef STOC_REFINE_H_
#define STOC_REFINE_H_

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "stoc/gde.h"
#include "stoc/types.h"

namespace stoc {

struct RefinementConfig {
  int ensemble_count = 5;  // K
  double gamma = 0.0;      // fraction of rows each member flags
  std::uint64_t partition_seed = 0;
  double shrinkage = kDefaultShrinkage;

  void Validate() const;
};

struct RefinedSet {
  IndexList kept_indices;    // rows with pseudo-label 0, ascending
  Labels pseudo_labels;      // one per input row
  std::vector<double> thresholds;  // eta_k per ensemble member
  std::vector<int> fold_assignment;  // row -> fold

  IndexList RejectedIndices() const;
};

// Splits {0..n-1} into k shuffled sets whose sizes differ by at most one.
std::vector<IndexList> DisjointPartition(Index n, int k, std::uint64_t seed);

// Largest eta with (1/N) #{score >= eta} >= gamma. Returns +infinity when
// gamma is 0, so nothing is flagged.
double PercentileThreshold(std::span<const double> scores, double gamma);

// Row-wise logical OR over the members' flags: a row stays normal only if
// every member calls it normal.
Labels AggregatePredictions(const std::vector<Labels>& per_classifier_flags);

// One-class scorer bound to a fixed set of N rows. `FitAndScore` trains on
// the listed rows and returns anomaly scores for all N rows.
class FoldScorer {
 public:
  virtual ~FoldScorer() = default;
  virtual Index rows() const = 0;
  virtual Vector FitAndScore(const IndexList& fit_rows,
                             double shrinkage) const = 0;
};

// Maps raw rows into the space the refinement classifiers work in.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::unique_ptr<FoldScorer> Bind(const Matrix& rows) const = 0;
};

// Raw features, one GDE per fold.
class IdentityExtractor final : public FeatureExtractor {
 public:
  std::unique_ptr<FoldScorer> Bind(const Matrix& rows) const override;
};

// Trains K fold classifiers, thresholds each at the gamma percentile of its
// scores over all N rows, and keeps the rows no classifier flags. The
// partition seed is mixed with `call_index` so repeated calls draw fresh
// folds.
RefinedSet RefineData(const Matrix& features, const FeatureExtractor& extractor,
                      const RefinementConfig& config,
                      std::uint64_t call_index = 0);

}  // namespace stoc

#endif  // STOC_REFINE_H_
