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

#include "stoc/gde.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gtest/gtest.h"

namespace stoc {
namespace {

Matrix RandomMatrix(Index rows, Index cols, std::uint64_t seed,
                    double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

std::vector<Index> Argsort(const Vector& v) {
  std::vector<Index> idx(v.size());
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Index a, Index b) { return v[a] < v[b]; });
  return idx;
}

TEST(GdeFit, SymmetricPointsGiveHalfIdentity) {
  Matrix x(4, 2);
  x << -1, 0, 1, 0, 0, -1, 0, 1;
  const GdeModel g = GdeModel::Fit(x, 0.0);
  EXPECT_TRUE(g.mean().isZero(0.0));
  EXPECT_TRUE(g.Covariance().isApprox(0.5 * Matrix::Identity(2, 2), 1e-14));
}

TEST(GdeFit, FewerRowsThanDimsWithShrinkage) {
  const Matrix x = RandomMatrix(3, 10, 4);
  const GdeModel g = GdeModel::Fit(x, 0.1);
  EXPECT_TRUE((g.factor().diagonal().array() > 0.0).all());
  EXPECT_TRUE(std::isfinite(g.Score(x.row(0).transpose())));
}

TEST(GdeFit, EscalatesShrinkageWhenSingular) {
  const Matrix x = RandomMatrix(3, 10, 4);
  const GdeModel g = GdeModel::Fit(x, 0.0);
  EXPECT_GT(g.shrinkage(), 0.0);
  EXPECT_LE(g.shrinkage(), kMaxShrinkage);
}

TEST(GdeFit, IdenticalRowsUseTinyIsotropicCovariance) {
  Matrix x = Matrix::Ones(5, 3) * 2.5;
  const GdeModel g = GdeModel::Fit(x, 0.5);
  EXPECT_TRUE(g.Covariance().isApprox(kDegenerateVariance * Matrix::Identity(3, 3)));
  Vector q(3);
  q << 2.5, 2.6, 2.4;
  EXPECT_TRUE(std::isfinite(g.Score(q)));
  EXPECT_TRUE(g.ScoreBatch(x).allFinite());
}

TEST(GdeFit, Errors) {
  EXPECT_THROW(GdeModel::Fit(Matrix::Ones(1, 2)), std::invalid_argument);
  Matrix bad = RandomMatrix(4, 2, 1);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(GdeModel::Fit(bad), std::invalid_argument);
  EXPECT_THROW(GdeModel::Fit(RandomMatrix(4, 2, 1), 1.5), std::invalid_argument);
}

TEST(GdeScore, MinimumAtMean) {
  const Matrix x = RandomMatrix(50, 3, 8);
  const GdeModel g = GdeModel::Fit(x);
  const double at_mean = g.Score(g.mean());
  EXPECT_NEAR(at_mean, 0.5 * g.log_det(), 1e-12);
  const Matrix queries = RandomMatrix(100, 3, 9, 3.0);
  EXPECT_TRUE((g.ScoreBatch(queries).array() >= at_mean).all());
}

TEST(GdeScore, DistanceTwoVersusOne) {
  // Identity covariance by construction: unit-variance symmetric design.
  Matrix x(4, 2);
  x << -1, -1, -1, 1, 1, -1, 1, 1;
  const GdeModel g = GdeModel::Fit(x, 0.0);
  ASSERT_TRUE(g.Covariance().isApprox(Matrix::Identity(2, 2)));
  Vector one(2), two(2);
  one << 1, 0;
  two << 0, 2;
  EXPECT_NEAR(g.Score(two) - g.Score(one), 1.5, 1e-12);
}

TEST(GdeScore, DimensionMismatchAndNonFinite) {
  const GdeModel g = GdeModel::Fit(RandomMatrix(10, 3, 2));
  EXPECT_THROW(g.Score(Vector::Zero(2)), std::invalid_argument);
  Vector q = Vector::Zero(3);
  q[0] = INFINITY;
  EXPECT_THROW(g.Score(q), std::invalid_argument);
  EXPECT_THROW(g.ScoreBatch(Matrix::Zero(2, 4)), std::invalid_argument);
}

TEST(GdeScore, BatchMatchesSingle) {
  const Matrix x = RandomMatrix(30, 4, 3);
  const GdeModel g = GdeModel::Fit(x);
  const Vector batch = g.ScoreBatch(x);
  for (Index i = 0; i < x.rows(); ++i) {
    EXPECT_EQ(batch[i], g.Score(x.row(i).transpose()));
  }
}

TEST(GdeProperty, ArgsortInvariantToCovarianceScale) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix x = RandomMatrix(40, 3, seed);
    const Matrix q = RandomMatrix(25, 3, seed + 100, 2.0);
    const GdeModel g = GdeModel::Fit(x);
    for (double c : {0.01, 3.0, 250.0}) {
      const GdeModel scaled = GdeModel::FromParameters(
          g.mean(), std::sqrt(c) * g.factor(), g.shrinkage());
      EXPECT_EQ(Argsort(g.ScoreBatch(q)), Argsort(scaled.ScoreBatch(q)));
    }
  }
}

TEST(GdeProperty, StrictlyIncreasingAlongRays) {
  const GdeModel g = GdeModel::Fit(RandomMatrix(60, 4, 21));
  const Matrix directions = RandomMatrix(20, 4, 22);
  for (Index r = 0; r < directions.rows(); ++r) {
    double previous = g.Score(g.mean());
    for (double t = 0.1; t < 10.0; t += 0.1) {
      const double s = g.Score(g.mean() + t * directions.row(r).transpose());
      EXPECT_GT(s, previous);
      previous = s;
    }
  }
}

TEST(GdeProperty, TranslationInvariance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix x = RandomMatrix(40, 3, seed);
    const Matrix q = RandomMatrix(10, 3, seed + 50);
    const Vector shift = RandomMatrix(1, 3, seed + 99, 5.0).row(0).transpose();
    const GdeModel a = GdeModel::Fit(x);
    const GdeModel b = GdeModel::Fit(x.rowwise() + shift.transpose());
    const Vector sa = a.ScoreBatch(q);
    const Vector sb = b.ScoreBatch(q.rowwise() + shift.transpose());
    EXPECT_LE((sa - sb).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(GdeProperty, OneDimensionalMatchesNormalNll) {
  const Matrix x = RandomMatrix(200, 1, 31, 2.5);
  const GdeModel g = GdeModel::Fit(x, 0.0);
  double mu = 0;
  for (Index i = 0; i < x.rows(); ++i) mu += x(i, 0);
  mu /= static_cast<double>(x.rows());
  double var = 0;
  for (Index i = 0; i < x.rows(); ++i) var += (x(i, 0) - mu) * (x(i, 0) - mu);
  var /= static_cast<double>(x.rows());
  for (double q : {-4.0, -0.3, 0.0, 1.7, 6.0}) {
    const double nll = 0.5 * (q - mu) * (q - mu) / var + 0.5 * std::log(var);
    Vector v(1);
    v << q;
    EXPECT_NEAR(g.Score(v), nll, 1e-9);
  }
}

}  // namespace
}  // namespace stoc
