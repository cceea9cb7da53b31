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

#ifndef STOC_REPR_H_
#define STOC_REPR_H_

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "stoc/gde.h"
#include "stoc/refine.h"
#include "stoc/types.h"

namespace stoc {

// Transformation-classification representation: M fixed random projections,
// a five-layer dense feature network, and a softmax head that predicts which
// projection produced its input. After training, one GDE per projection is
// fitted on the network features and test rows are scored by the most
// normal of them.

inline constexpr int kHiddenWidth = 8;
inline constexpr int kNetDepth = 5;
inline constexpr double kLeakySlope = 0.2;

// T_m(x) = W_m x with W_m of shape r x d, entries i.i.d. standard normal.
class TransformationBank {
 public:
  TransformationBank() = default;
  TransformationBank(std::vector<Matrix> projections, std::uint64_t seed);

  static TransformationBank Make(Index input_dims, int count,
                                 Index projection_dims, std::uint64_t seed);

  int count() const { return static_cast<int>(projections_.size()); }
  Index input_dims() const;
  Index projection_dims() const;
  std::uint64_t seed() const { return seed_; }
  const Matrix& projection(int m) const { return projections_.at(m); }

  // rows (n x d) -> n x r.
  Matrix Apply(int m, const Matrix& rows) const;

 private:
  std::vector<Matrix> projections_;
  std::uint64_t seed_ = 0;
};

struct ReprHyperparameters {
  int transforms = 256;
  Index projection_dims = 32;
  Index batch_rows = 64;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double weight_decay = 3e-5;

  void Validate() const;
};

// Offsets of each tensor inside the flat parameter vector. Weights are
// stored row-major as (out x in).
struct ParameterLayout {
  struct Tensor {
    Index offset;
    Index rows;
    Index cols;  // 1 for biases
  };
  std::vector<Tensor> layer_weights;
  std::vector<Tensor> layer_biases;
  Tensor head_weight;
  Tensor head_bias;
  Index total = 0;

  static ParameterLayout For(Index input_dims, int classes);
};

struct ForwardResult {
  Matrix features;  // B x 8
  Matrix logits;    // B x M
};

class ReprModel {
 public:
  ReprModel() = default;
  // Fresh model: bank drawn from `bank_seed`, affine weights uniform in
  // +-1/sqrt(fan_in) from `init_seed`, biases zero.
  ReprModel(Index input_dims, const ReprHyperparameters& hyper,
            std::uint64_t bank_seed, std::uint64_t init_seed);
  // Reassembles a model from stored state.
  ReprModel(TransformationBank bank, ReprHyperparameters hyper, Vector params,
            Vector velocity, std::vector<GdeModel> gdes);

  const TransformationBank& bank() const { return bank_; }
  const ReprHyperparameters& hyper() const { return hyper_; }
  const ParameterLayout& layout() const { return layout_; }
  const Vector& params() const { return params_; }
  Vector& mutable_params() { return params_; }
  const Vector& velocity() const { return velocity_; }
  const std::vector<GdeModel>& gdes() const { return gdes_; }
  bool finalized() const { return !gdes_.empty(); }
  int transforms() const { return bank_.count(); }

  // Network forward pass on already-projected inputs (B x r).
  ForwardResult Forward(const Matrix& projected) const;
  Matrix Embed(const Matrix& projected) const;

  // Stacks T_m(x) for every row and every m, row-major in (row, m).
  Matrix ProjectAll(const Matrix& raw_rows) const;

  // Mean cross-entropy of predicting m from T_m(x) over all rows and all m.
  // Fills `grad` (same layout as params) when non-null.
  double Loss(const Matrix& raw_rows, Vector* grad) const;

  // One momentum-SGD step with L2 weight decay on all parameters. Throws
  // std::runtime_error on a non-finite loss.
  double TrainStep(const Matrix& raw_rows);

  // v <- momentum * v + (g + decay * w);  w <- w - lr * v.
  void ApplyUpdate(const Vector& data_grad);

  // Network features of every row under each transformation (M of N x 8).
  std::vector<Matrix> TransformFeatures(const Matrix& raw_rows) const;

  // Fits one GDE per transformation on the features of `rows`.
  void Finalize(const Matrix& rows, double shrinkage = kDefaultShrinkage);

  // Negated maximum normality over transformations, i.e. the minimum of the
  // per-transformation GDE scores. Requires Finalize.
  Vector Score(const Matrix& rows) const;

 private:
  TransformationBank bank_;
  ReprHyperparameters hyper_;
  ParameterLayout layout_;
  Vector params_;
  Vector velocity_;
  std::vector<GdeModel> gdes_;
};

// Refinement classifier over a trained network: each fold fits one GDE per
// transformation, and rows are scored by the minimum over them, the same
// rule ReprModel::Score uses.
class ReprExtractor final : public FeatureExtractor {
 public:
  explicit ReprExtractor(const ReprModel& model) : model_(model) {}
  std::unique_ptr<FoldScorer> Bind(const Matrix& rows) const override;

 private:
  const ReprModel& model_;
};

// Cycles through a shuffled copy of the pool, reshuffling when exhausted.
class PoolSampler {
 public:
  PoolSampler(IndexList pool, std::uint64_t seed);

  void Reset(IndexList pool);
  IndexList Next(Index batch_rows);
  const IndexList& pool() const { return pool_; }

 private:
  IndexList pool_;
  IndexList order_;
  std::size_t cursor_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace stoc

#endif  // STOC_REPR_H_
