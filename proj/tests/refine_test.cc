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
#include <random>
#include <set>

#include "gtest/gtest.h"
#include "oracles.h"
#include "stoc/data.h"

namespace stoc {
namespace {

TEST(DisjointPartition, EvenSplit) {
  const auto folds = DisjointPartition(10, 5, 3);
  ASSERT_EQ(folds.size(), 5u);
  std::set<Index> all;
  for (const auto& f : folds) {
    EXPECT_EQ(f.size(), 2u);
    for (Index i : f) EXPECT_TRUE(all.insert(i).second);
  }
  EXPECT_EQ(all.size(), 10u);
  EXPECT_EQ(*all.rbegin(), 9);
}

TEST(DisjointPartition, UnevenSplit) {
  const auto folds = DisjointPartition(11, 5, 3);
  std::multiset<std::size_t> sizes;
  for (const auto& f : folds) sizes.insert(f.size());
  EXPECT_EQ(sizes, (std::multiset<std::size_t>{2, 2, 2, 2, 3}));
}

TEST(DisjointPartition, DeterministicAndSeedSensitive) {
  EXPECT_EQ(DisjointPartition(50, 4, 9), DisjointPartition(50, 4, 9));
  EXPECT_NE(DisjointPartition(50, 4, 9), DisjointPartition(50, 4, 10));
  EXPECT_THROW(DisjointPartition(3, 4, 0), std::invalid_argument);
  EXPECT_THROW(DisjointPartition(3, 0, 0), std::invalid_argument);
}

TEST(PercentileThreshold, OneToTen) {
  const std::vector<double> s = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EXPECT_EQ(PercentileThreshold(s, 0.2), 9.0);
  EXPECT_EQ(oracle::PercentileThreshold(s, 0.2), 9.0);
  EXPECT_TRUE(std::isinf(PercentileThreshold(s, 0.0)));
  EXPECT_EQ(PercentileThreshold(s, 1.0), 1.0);
}

TEST(PercentileThreshold, Errors) {
  EXPECT_THROW(PercentileThreshold(std::vector<double>{}, 0.1),
               std::invalid_argument);
  EXPECT_THROW(PercentileThreshold(std::vector<double>{1.0}, 1.1),
               std::invalid_argument);
}

TEST(PercentileThreshold, MatchesExhaustiveScanWithTies) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 40);
  std::uniform_int_distribution<int> value(0, 9);
  std::uniform_real_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> s(size(rng));
    for (double& v : s) v = value(rng) * 0.5;
    const double gamma = trial % 10 == 0 ? std::round(g(rng) * 20) / 20 : g(rng);
    EXPECT_EQ(PercentileThreshold(s, gamma), oracle::PercentileThreshold(s, gamma))
        << "trial " << trial;
  }
}

TEST(AggregatePredictions, Examples) {
  EXPECT_EQ(AggregatePredictions({{0}, {0}, {0}}), (Labels{0}));
  EXPECT_EQ(AggregatePredictions({{0}, {1}, {0}}), (Labels{1}));
  EXPECT_EQ(AggregatePredictions({{1}}), (Labels{1}));
  EXPECT_THROW(AggregatePredictions({{0, 1}, {0}}), std::invalid_argument);
  EXPECT_THROW(AggregatePredictions({}), std::invalid_argument);
}

TEST(AggregatePredictions, AllFlagVectorsUpToSixMembers) {
  for (int k = 1; k <= 6; ++k) {
    for (int mask = 0; mask < (1 << k); ++mask) {
      std::vector<Labels> flags;
      std::vector<int> column;
      for (int j = 0; j < k; ++j) {
        flags.push_back({(mask >> j) & 1});
        column.push_back((mask >> j) & 1);
      }
      const int expected = oracle::AggregateProduct(column);
      EXPECT_EQ(AggregatePredictions(flags)[0], expected);
      EXPECT_EQ(expected, mask != 0 ? 1 : 0);
    }
  }
}

class RefineDataTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const LabeledTable t = SynthBlobs(200, 20, 2, 6.0, 17);
    features_ = t.features;
    labels_ = t.labels;
  }

  double AnomalyRejection(const RefinedSet& r) const {
    double rejected = 0;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] == 1 && r.pseudo_labels[i] == 1) ++rejected;
    }
    return rejected / 20.0;
  }

  Matrix features_;
  Labels labels_;
};

TEST_F(RefineDataTest, GammaZeroKeepsEverything) {
  for (int k : {1, 3, 5}) {
    RefinementConfig c{k, 0.0, 1};
    const RefinedSet r = RefineData(features_, IdentityExtractor(), c);
    EXPECT_EQ(r.kept_indices.size(), 220u);
    EXPECT_EQ(std::count(r.pseudo_labels.begin(), r.pseudo_labels.end(), 1), 0);
  }
}

TEST_F(RefineDataTest, RejectsMostAnomalies) {
  RefinementConfig c{5, 0.2, 1};
  const RefinedSet r = RefineData(features_, IdentityExtractor(), c);
  EXPECT_GE(AnomalyRejection(r), 0.8);
  EXPECT_EQ(r.thresholds.size(), 5u);
}

TEST_F(RefineDataTest, SingleMemberRejectionBound) {
  RefinementConfig c{1, 0.2, 1};
  const RefinedSet r = RefineData(features_, IdentityExtractor(), c);
  const auto rejected =
      std::count(r.pseudo_labels.begin(), r.pseudo_labels.end(), 1);
  EXPECT_LE(rejected, 44);
  EXPECT_GE(rejected, 44);  // continuous scores: no ties at the threshold
}

TEST_F(RefineDataTest, KeptMatchesPseudoLabelsAndRejectionBound) {
  for (double gamma : {0.05, 0.1, 0.3}) {
    RefinementConfig c{4, gamma, 8};
    const RefinedSet r = RefineData(features_, IdentityExtractor(), c);
    IndexList expected;
    for (Index i = 0; i < 220; ++i) {
      if (r.pseudo_labels[i] == 0) expected.push_back(i);
    }
    EXPECT_EQ(r.kept_indices, expected);
    EXPECT_LE(220 - static_cast<Index>(r.kept_indices.size()),
              4 * static_cast<Index>(std::ceil(gamma * 220)));
  }
}

TEST_F(RefineDataTest, MonotoneInGamma) {
  IndexList previous;
  bool first = true;
  for (double gamma : {0.0, 0.02, 0.05, 0.1, 0.2, 0.4}) {
    RefinementConfig c{5, gamma, 3};
    const RefinedSet r = RefineData(features_, IdentityExtractor(), c);
    if (!first) {
      EXPECT_TRUE(std::includes(previous.begin(), previous.end(),
                                r.kept_indices.begin(), r.kept_indices.end()));
    }
    previous = r.kept_indices;
    first = false;
  }
}

TEST_F(RefineDataTest, FreshPartitionsPerCall) {
  RefinementConfig c{5, 0.1, 3};
  const RefinedSet a = RefineData(features_, IdentityExtractor(), c, 0);
  const RefinedSet b = RefineData(features_, IdentityExtractor(), c, 0);
  const RefinedSet other = RefineData(features_, IdentityExtractor(), c, 1);
  EXPECT_EQ(a.fold_assignment, b.fold_assignment);
  EXPECT_EQ(a.pseudo_labels, b.pseudo_labels);
  EXPECT_NE(a.fold_assignment, other.fold_assignment);
}

TEST_F(RefineDataTest, Errors) {
  RefinementConfig c{5, 0.1, 3};
  EXPECT_THROW(RefineData(features_.topRows(9), IdentityExtractor(), c),
               std::invalid_argument);
  c.gamma = 1.5;
  EXPECT_THROW(RefineData(features_, IdentityExtractor(), c),
               std::invalid_argument);
  c.gamma = 0.1;
  c.ensemble_count = 0;
  EXPECT_THROW(RefineData(features_, IdentityExtractor(), c),
               std::invalid_argument);
}

}  // namespace
}  // namespace stoc
