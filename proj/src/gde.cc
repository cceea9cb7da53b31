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

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

namespace stoc {
namespace {

// Ratio of smallest to largest Cholesky pivot below which a factorization is
// treated as numerically singular.
constexpr double kMinPivotRatio = 1e-7;

std::optional<Matrix> TryFactor(const Matrix& covariance) {
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Matrix factor = llt.matrixL();
  const Vector diag = factor.diagonal();
  if (!(diag.array() > 0.0).all() || !diag.allFinite()) return std::nullopt;
  if (diag.minCoeff() < kMinPivotRatio * diag.maxCoeff()) return std::nullopt;
  return factor;
}

}  // namespace

GdeModel GdeModel::Fit(const Matrix& features, double shrinkage) {
  const Index n = features.rows();
  const Index d = features.cols();
  if (n < 2) throw std::invalid_argument("GDE fit needs at least 2 rows");
  if (d < 1) throw std::invalid_argument("GDE fit needs at least 1 column");
  if (!(shrinkage >= 0.0 && shrinkage <= 1.0)) {
    throw std::invalid_argument("GDE shrinkage must lie in [0, 1]");
  }
  if (!features.allFinite()) {
    throw std::invalid_argument("GDE fit on non-finite features");
  }

  GdeModel model;
  model.mean_ = features.colwise().mean().transpose();
  const Matrix centered = features.rowwise() - model.mean_.transpose();
  const Matrix sample_cov =
      (centered.transpose() * centered) / static_cast<double>(n);
  const double avg_var = sample_cov.trace() / static_cast<double>(d);

  if (!(avg_var > 0.0)) {
    model.factor_ = Matrix::Identity(d, d) * std::sqrt(kDegenerateVariance);
    model.log_det_ = static_cast<double>(d) * std::log(kDegenerateVariance);
    model.shrinkage_ = shrinkage;
    return model;
  }

  std::vector<double> ladder = {shrinkage};
  for (double s = 1e-6; s <= kMaxShrinkage * 1.0000001; s *= 10.0) {
    if (s > shrinkage) ladder.push_back(s);
  }
  for (double s : ladder) {
    Matrix cov = (1.0 - s) * sample_cov;
    cov.diagonal().array() += s * avg_var;
    if (auto factor = TryFactor(cov)) {
      model.factor_ = std::move(*factor);
      model.log_det_ = 2.0 * model.factor_.diagonal().array().log().sum();
      model.shrinkage_ = s;
      return model;
    }
  }
  throw std::runtime_error("GDE covariance factorization failed at shrinkage " +
                           std::to_string(kMaxShrinkage));
}

GdeModel GdeModel::FromParameters(Vector mean, Matrix factor,
                                  double shrinkage) {
  if (factor.rows() != mean.size() || factor.cols() != mean.size()) {
    throw std::invalid_argument("GDE factor shape does not match mean");
  }
  if (!(factor.diagonal().array() > 0.0).all()) {
    throw std::invalid_argument("GDE factor diagonal must be positive");
  }
  GdeModel model;
  model.mean_ = std::move(mean);
  model.factor_ = factor.triangularView<Eigen::Lower>();
  model.log_det_ = 2.0 * model.factor_.diagonal().array().log().sum();
  model.shrinkage_ = shrinkage;
  return model;
}

double GdeModel::Score(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dims()) throw std::invalid_argument("GDE dimension mismatch");
  if (!x.allFinite()) throw std::invalid_argument("GDE score on non-finite x");
  Vector centered = x - mean_;
  factor_.triangularView<Eigen::Lower>().solveInPlace(centered);
  return 0.5 * centered.squaredNorm() + 0.5 * log_det_;
}

Vector GdeModel::ScoreBatch(const Matrix& rows) const {
  if (rows.cols() != dims()) {
    throw std::invalid_argument("GDE dimension mismatch");
  }
  if (!rows.allFinite()) throw std::invalid_argument("GDE score on non-finite x");
  Vector scores(rows.rows());
  Vector centered(dims());
  for (Index i = 0; i < rows.rows(); ++i) {
    centered = rows.row(i).transpose() - mean_;
    factor_.triangularView<Eigen::Lower>().solveInPlace(centered);
    scores[i] = 0.5 * centered.squaredNorm() + 0.5 * log_det_;
  }
  return scores;
}

Matrix GdeModel::Covariance() const { return factor_ * factor_.transpose(); }

}  // namespace stoc
