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

#include "stoc/metrics.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace stoc {
namespace {

struct ClassCounts {
  double positives = 0;
  double negatives = 0;
};

ClassCounts CheckInputs(std::span<const double> scores,
                        std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  ClassCounts c;
  for (int y : labels) {
    if (y == 1) {
      ++c.positives;
    } else if (y == 0) {
      ++c.negatives;
    } else {
      throw std::invalid_argument("labels must be 0/1");
    }
  }
  if (c.positives == 0 || c.negatives == 0) {
    throw std::invalid_argument("metric needs both classes present");
  }
  return c;
}

// Indices sorted by descending score; equal scores keep index order.
std::vector<std::size_t> DescendingOrder(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  return order;
}

// Calls visit(tp, fp) after each group of tied scores in descending order.
template <typename Visit>
void SweepGroups(std::span<const double> scores, std::span<const int> labels,
                 Visit visit) {
  const auto order = DescendingOrder(scores);
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    double group_tp = 0;
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1) {
        ++group_tp;
      } else {
        ++fp;
      }
      ++j;
    }
    tp += group_tp;
    visit(tp, fp, group_tp);
    i = j;
  }
}

}  // namespace

double Auc(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = CheckInputs(scores, labels);
  // Mann-Whitney U from average ranks (ascending, 1-based).
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double positive_rank_sum = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) positive_rank_sum += avg_rank;
    }
    i = j;
  }
  const double u =
      positive_rank_sum - c.positives * (c.positives + 1.0) / 2.0;
  return 100.0 * u / (c.positives * c.negatives);
}

double AveragePrecision(std::span<const double> scores,
                        std::span<const int> labels) {
  const ClassCounts c = CheckInputs(scores, labels);
  double ap = 0;
  SweepGroups(scores, labels, [&](double tp, double fp, double group_tp) {
    if (group_tp > 0) ap += (group_tp / c.positives) * (tp / (tp + fp));
  });
  return 100.0 * ap;
}

double F1AtRatio(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = CheckInputs(scores, labels);
  const auto k = static_cast<std::size_t>(c.positives);
  const auto order = DescendingOrder(scores);
  double tp = 0;
  for (std::size_t i = 0; i < k; ++i) tp += labels[order[i]] == 1;
  if (tp == 0) return 0.0;
  const double precision = tp / static_cast<double>(k);
  const double recall = tp / c.positives;
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

double RecallAtPrecision(std::span<const double> scores,
                         std::span<const int> labels,
                         double precision_percent) {
  const ClassCounts c = CheckInputs(scores, labels);
  if (!(precision_percent >= 0.0 && precision_percent <= 100.0)) {
    throw std::invalid_argument("precision must lie in [0, 100]");
  }
  double best = 0;
  SweepGroups(scores, labels, [&](double tp, double fp, double) {
    if (tp * 100.0 >= precision_percent * (tp + fp)) {
      best = std::max(best, tp / c.positives);
    }
  });
  return 100.0 * best;
}

}  // namespace stoc
