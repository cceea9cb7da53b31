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

#include "stoc/refine.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace stoc {

void RefinementConfig::Validate() const {
  if (ensemble_count < 1) {
    throw std::invalid_argument("ensemble_count must be >= 1");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in [0, 1]");
  }
  if (!(shrinkage >= 0.0 && shrinkage <= 1.0)) {
    throw std::invalid_argument("shrinkage must lie in [0, 1]");
  }
}

IndexList RefinedSet::RejectedIndices() const {
  IndexList out;
  for (std::size_t i = 0; i < pseudo_labels.size(); ++i) {
    if (pseudo_labels[i] == 1) out.push_back(static_cast<Index>(i));
  }
  return out;
}

std::vector<IndexList> DisjointPartition(Index n, int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("partition count must be >= 1");
  if (n < k) {
    throw std::invalid_argument("cannot split " + std::to_string(n) +
                                " rows into " + std::to_string(k) + " folds");
  }
  IndexList order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<IndexList> folds(k);
  for (Index i = 0; i < n; ++i) folds[i % k].push_back(order[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

double PercentileThreshold(std::span<const double> scores, double gamma) {
  if (scores.empty()) throw std::invalid_argument("no scores to threshold");
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in [0, 1]");
  }
  if (gamma == 0.0) return std::numeric_limits<double>::infinity();

  const auto n = static_cast<std::size_t>(scores.size());
  const double dn = static_cast<double>(n);
  // Smallest tail count c with c / N >= gamma, evaluated the same way the
  // condition is stated so rounding in gamma * N cannot shift it.
  auto c = static_cast<std::size_t>(std::ceil(gamma * dn));
  c = std::clamp<std::size_t>(c, 1, n);
  while (c > 1 && static_cast<double>(c - 1) / dn >= gamma) --c;
  while (c < n && static_cast<double>(c) / dn < gamma) ++c;

  std::vector<double> sorted(scores.begin(), scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + (c - 1), sorted.end(),
                   std::greater<double>());
  return sorted[c - 1];
}

Labels AggregatePredictions(const std::vector<Labels>& per_classifier_flags) {
  if (per_classifier_flags.empty()) {
    throw std::invalid_argument("no classifier predictions to aggregate");
  }
  const std::size_t n = per_classifier_flags.front().size();
  Labels out(n, 0);
  for (const Labels& flags : per_classifier_flags) {
    if (flags.size() != n) {
      throw std::invalid_argument("classifier predictions differ in length");
    }
    for (std::size_t i = 0; i < n; ++i) out[i] |= (flags[i] != 0);
  }
  return out;
}

namespace {

class IdentityScorer final : public FoldScorer {
 public:
  explicit IdentityScorer(const Matrix& rows) : rows_(rows) {}

  Index rows() const override { return rows_.rows(); }

  Vector FitAndScore(const IndexList& fit_rows,
                     double shrinkage) const override {
    const GdeModel model = GdeModel::Fit(SelectRows(rows_, fit_rows), shrinkage);
    return model.ScoreBatch(rows_);
  }

 private:
  const Matrix& rows_;
};

}  // namespace

std::unique_ptr<FoldScorer> IdentityExtractor::Bind(const Matrix& rows) const {
  return std::make_unique<IdentityScorer>(rows);
}

RefinedSet RefineData(const Matrix& features, const FeatureExtractor& extractor,
                      const RefinementConfig& config,
                      std::uint64_t call_index) {
  config.Validate();
  const Index n = features.rows();
  if (n < 2 * static_cast<Index>(config.ensemble_count)) {
    throw std::invalid_argument(
        "refinement needs at least 2 rows per ensemble member");
  }

  RefinedSet result;
  const auto folds = DisjointPartition(
      n, config.ensemble_count,
      DeriveSeed(config.partition_seed, {0x7265666eULL, call_index}));
  result.fold_assignment.assign(n, 0);
  for (std::size_t k = 0; k < folds.size(); ++k) {
    for (Index i : folds[k]) result.fold_assignment[i] = static_cast<int>(k);
  }

  const auto scorer = extractor.Bind(features);
  std::vector<Labels> flags;
  flags.reserve(folds.size());
  for (const IndexList& fold : folds) {
    const Vector scores = scorer->FitAndScore(fold, config.shrinkage);
    const double eta = PercentileThreshold(
        std::span<const double>(scores.data(), scores.size()), config.gamma);
    result.thresholds.push_back(eta);
    Labels f(n);
    for (Index i = 0; i < n; ++i) f[i] = scores[i] >= eta ? 1 : 0;
    flags.push_back(std::move(f));
  }

  result.pseudo_labels = AggregatePredictions(flags);
  for (Index i = 0; i < n; ++i) {
    if (result.pseudo_labels[i] == 0) result.kept_indices.push_back(i);
  }
  return result;
}

}  // namespace stoc
