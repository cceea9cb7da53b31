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

#ifndef STOC_METRICS_H_
#define STOC_METRICS_H_

#include <span>

namespace stoc {

// Rank metrics for anomaly scores (higher = more anomalous) against 0/1
// labels, on a 0-100 scale. Each throws std::invalid_argument unless both
// classes are present and the lengths agree.

// Probability that a random positive outscores a random negative, ties
// counting one half.
double Auc(std::span<const double> scores, std::span<const int> labels);

// Sum over the descending sweep of (recall step) x precision, with tied
// scores entering together.
double AveragePrecision(std::span<const double> scores,
                        std::span<const int> labels);

// F1 of the positive class when the top-k scores are called positive, k
// being the number of positives. Ties at the cut go to the lower index.
double F1AtRatio(std::span<const double> scores, std::span<const int> labels);

// Best recall over score thresholds whose precision is at least
// `precision_percent` / 100; 0 when none qualifies.
double RecallAtPrecision(std::span<const double> scores,
                         std::span<const int> labels,
                         double precision_percent);

}  // namespace stoc

#endif  // STOC_METRICS_H_
