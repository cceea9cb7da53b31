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

#ifndef STOC_GDE_H_
#define STOC_GDE_H_

#include "stoc/types.h"

namespace stoc {

inline constexpr double kDefaultShrinkage = 1e-3;
inline constexpr double kMaxShrinkage = 1e-1;
// Covariance used when every training row is identical.
inline constexpr double kDegenerateVariance = 1e-6;

// Gaussian density estimator used as the one-class classifier. The score is
// the negative log-density without the (d/2) log(2 pi) term, so higher means
// more anomalous.
class GdeModel {
 public:
  GdeModel() = default;

  // Covariance is (1 - s) S + s (tr(S) / d) I with S the population
  // covariance. If the Cholesky factorization fails, s is raised to the next
  // power of ten up to kMaxShrinkage before giving up.
  static GdeModel Fit(const Matrix& features,
                      double shrinkage = kDefaultShrinkage);

  // Rebuilds a model from stored parameters. `factor` must be lower
  // triangular with a positive diagonal.
  static GdeModel FromParameters(Vector mean, Matrix factor,
                                 double shrinkage);

  double Score(const Eigen::Ref<const Vector>& x) const;
  Vector ScoreBatch(const Matrix& rows) const;

  Index dims() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  // Lower Cholesky factor L of the regularized covariance, Sigma = L L^T.
  const Matrix& factor() const { return factor_; }
  double log_det() const { return log_det_; }
  // Shrinkage actually used after escalation.
  double shrinkage() const { return shrinkage_; }
  Matrix Covariance() const;

 private:
  Vector mean_;
  Matrix factor_;
  double log_det_ = 0.0;
  double shrinkage_ = 0.0;
};

}  // namespace stoc

#endif  // STOC_GDE_H_
