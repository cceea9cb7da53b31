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

#include "stoc/repr.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stoc {
namespace {

using ConstMatrixMap = Eigen::Map<const Matrix>;
using ConstVectorMap = Eigen::Map<const Vector>;
using MatrixMap = Eigen::Map<Matrix>;
using VectorMap = Eigen::Map<Vector>;

ConstMatrixMap Weights(const Vector& params, const ParameterLayout::Tensor& t) {
  return ConstMatrixMap(params.data() + t.offset, t.rows, t.cols);
}
ConstVectorMap Bias(const Vector& params, const ParameterLayout::Tensor& t) {
  return ConstVectorMap(params.data() + t.offset, t.rows);
}
MatrixMap Weights(Vector& params, const ParameterLayout::Tensor& t) {
  return MatrixMap(params.data() + t.offset, t.rows, t.cols);
}
VectorMap Bias(Vector& params, const ParameterLayout::Tensor& t) {
  return VectorMap(params.data() + t.offset, t.rows);
}

void LeakyReluInPlace(Matrix& a) {
  a = a.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
}

}  // namespace

TransformationBank::TransformationBank(std::vector<Matrix> projections,
                                       std::uint64_t seed)
    : projections_(std::move(projections)), seed_(seed) {
  if (projections_.empty()) {
    throw std::invalid_argument("transformation bank must not be empty");
  }
  for (const Matrix& w : projections_) {
    if (w.rows() != projections_.front().rows() ||
        w.cols() != projections_.front().cols()) {
      throw std::invalid_argument("transformation shapes differ");
    }
  }
}

TransformationBank TransformationBank::Make(Index input_dims, int count,
                                            Index projection_dims,
                                            std::uint64_t seed) {
  if (input_dims < 1 || count < 1 || projection_dims < 1) {
    throw std::invalid_argument("transformation bank dimensions must be > 0");
  }
  std::vector<Matrix> projections;
  projections.reserve(count);
  for (int m = 0; m < count; ++m) {
    std::mt19937_64 rng(DeriveSeed(seed, {static_cast<std::uint64_t>(m)}));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix w(projection_dims, input_dims);
    for (Index i = 0; i < w.size(); ++i) w.data()[i] = gauss(rng);
    projections.push_back(std::move(w));
  }
  return TransformationBank(std::move(projections), seed);
}

Index TransformationBank::input_dims() const {
  return projections_.empty() ? 0 : projections_.front().cols();
}

Index TransformationBank::projection_dims() const {
  return projections_.empty() ? 0 : projections_.front().rows();
}

Matrix TransformationBank::Apply(int m, const Matrix& rows) const {
  if (rows.cols() != input_dims()) {
    throw std::invalid_argument("transformation input dimension mismatch");
  }
  return rows * projections_.at(m).transpose();
}

void ReprHyperparameters::Validate() const {
  if (transforms < 1) throw std::invalid_argument("transforms must be >= 1");
  if (projection_dims < 1) {
    throw std::invalid_argument("projection_dims must be >= 1");
  }
  if (batch_rows < 1) throw std::invalid_argument("batch_rows must be >= 1");
  if (!(learning_rate >= 0.0)) {
    throw std::invalid_argument("learning_rate must be >= 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("momentum must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) {
    throw std::invalid_argument("weight_decay must be >= 0");
  }
}

ParameterLayout ParameterLayout::For(Index input_dims, int classes) {
  ParameterLayout layout;
  Index offset = 0;
  Index fan_in = input_dims;
  for (int l = 0; l < kNetDepth; ++l) {
    layout.layer_weights.push_back({offset, kHiddenWidth, fan_in});
    offset += kHiddenWidth * fan_in;
    layout.layer_biases.push_back({offset, kHiddenWidth, 1});
    offset += kHiddenWidth;
    fan_in = kHiddenWidth;
  }
  layout.head_weight = {offset, classes, kHiddenWidth};
  offset += static_cast<Index>(classes) * kHiddenWidth;
  layout.head_bias = {offset, classes, 1};
  offset += classes;
  layout.total = offset;
  return layout;
}

ReprModel::ReprModel(Index input_dims, const ReprHyperparameters& hyper,
                     std::uint64_t bank_seed, std::uint64_t init_seed)
    : bank_(TransformationBank::Make(input_dims, hyper.transforms,
                                     hyper.projection_dims, bank_seed)),
      hyper_(hyper),
      layout_(ParameterLayout::For(hyper.projection_dims, hyper.transforms)) {
  hyper_.Validate();
  params_ = Vector::Zero(layout_.total);
  velocity_ = Vector::Zero(layout_.total);
  std::mt19937_64 rng(init_seed);
  auto init = [&](const ParameterLayout::Tensor& t) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(t.cols));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Index i = 0; i < t.rows * t.cols; ++i) params_[t.offset + i] = u(rng);
  };
  for (const auto& t : layout_.layer_weights) init(t);
  init(layout_.head_weight);
}

ReprModel::ReprModel(TransformationBank bank, ReprHyperparameters hyper,
                     Vector params, Vector velocity,
                     std::vector<GdeModel> gdes)
    : bank_(std::move(bank)),
      hyper_(hyper),
      layout_(ParameterLayout::For(bank_.projection_dims(), bank_.count())),
      params_(std::move(params)),
      velocity_(std::move(velocity)),
      gdes_(std::move(gdes)) {
  hyper_.transforms = bank_.count();
  hyper_.projection_dims = bank_.projection_dims();
  hyper_.Validate();
  if (params_.size() != layout_.total || velocity_.size() != layout_.total) {
    throw std::invalid_argument("parameter vector does not match layout");
  }
  if (!gdes_.empty() && static_cast<int>(gdes_.size()) != bank_.count()) {
    throw std::invalid_argument("need one GDE per transformation");
  }
}

ForwardResult ReprModel::Forward(const Matrix& projected) const {
  if (projected.cols() != bank_.projection_dims()) {
    throw std::invalid_argument("network input dimension mismatch");
  }
  if (!projected.allFinite()) {
    throw std::invalid_argument("network input is not finite");
  }
  ForwardResult out;
  out.features = Embed(projected);
  out.logits = (out.features * Weights(params_, layout_.head_weight).transpose())
                   .rowwise() +
               Bias(params_, layout_.head_bias).transpose();
  return out;
}

Matrix ReprModel::Embed(const Matrix& projected) const {
  Matrix h = projected;
  for (int l = 0; l < kNetDepth; ++l) {
    Matrix a = (h * Weights(params_, layout_.layer_weights[l]).transpose())
                   .rowwise() +
               Bias(params_, layout_.layer_biases[l]).transpose();
    LeakyReluInPlace(a);
    h = std::move(a);
  }
  return h;
}

Matrix ReprModel::ProjectAll(const Matrix& raw_rows) const {
  const Index n = raw_rows.rows();
  const int m_count = bank_.count();
  const Index r = bank_.projection_dims();
  if (raw_rows.cols() != bank_.input_dims()) {
    throw std::invalid_argument("transformation input dimension mismatch");
  }
  Matrix all(m_count * r, bank_.input_dims());
  for (int m = 0; m < m_count; ++m) {
    all.middleRows(m * r, r) = bank_.projection(m);
  }
  // Row i of raw * all^T is [z_i0 | z_i1 | ...]; row-major storage makes that
  // the (n * M) x r stack with row i * M + m holding z_im.
  Matrix wide = raw_rows * all.transpose();
  return Eigen::Map<const Matrix>(wide.data(), n * m_count, r);
}

double ReprModel::Loss(const Matrix& raw_rows, Vector* grad) const {
  if (raw_rows.rows() == 0) throw std::invalid_argument("empty batch");
  const int m_count = bank_.count();
  const Matrix input = ProjectAll(raw_rows);
  const Index batch = input.rows();

  // Forward, keeping pre-activations for the backward pass.
  std::vector<Matrix> activations;  // h_0 .. h_L
  std::vector<Matrix> pre;          // a_1 .. a_L
  activations.reserve(kNetDepth + 1);
  pre.reserve(kNetDepth);
  activations.push_back(input);
  for (int l = 0; l < kNetDepth; ++l) {
    Matrix a = (activations.back() *
                Weights(params_, layout_.layer_weights[l]).transpose())
                   .rowwise() +
               Bias(params_, layout_.layer_biases[l]).transpose();
    Matrix h = a;
    LeakyReluInPlace(h);
    pre.push_back(std::move(a));
    activations.push_back(std::move(h));
  }
  const Matrix& features = activations.back();
  Matrix logits =
      (features * Weights(params_, layout_.head_weight).transpose()).rowwise() +
      Bias(params_, layout_.head_bias).transpose();

  // Softmax cross-entropy; row i*M + m has target m.
  const Vector peak = logits.rowwise().maxCoeff();
  Matrix probs = (logits.colwise() - peak).array().exp().matrix();
  const Vector total = probs.rowwise().sum();
  double loss = 0.0;
  for (Index b = 0; b < batch; ++b) {
    loss += std::log(total[b]) + peak[b] - logits(b, b % m_count);
  }
  loss /= static_cast<double>(batch);
  if (grad == nullptr) return loss;

  grad->setZero(layout_.total);
  const double inv_batch = 1.0 / static_cast<double>(batch);
  probs.array().colwise() *= (inv_batch / total.array());
  for (Index b = 0; b < batch; ++b) probs(b, b % m_count) -= inv_batch;
  const Matrix& d_logits = probs;

  Weights(*grad, layout_.head_weight) = d_logits.transpose() * features;
  Bias(*grad, layout_.head_bias) = d_logits.colwise().sum().transpose();
  Matrix d_h = d_logits * Weights(params_, layout_.head_weight);

  for (int l = kNetDepth - 1; l >= 0; --l) {
    Matrix d_a = d_h.array() *
                 pre[l].unaryExpr([](double v) {
                         return v > 0.0 ? 1.0 : kLeakySlope;
                       }).array();
    Weights(*grad, layout_.layer_weights[l]) =
        d_a.transpose() * activations[l];
    Bias(*grad, layout_.layer_biases[l]) = d_a.colwise().sum().transpose();
    if (l > 0) d_h = d_a * Weights(params_, layout_.layer_weights[l]);
  }
  return loss;
}

double ReprModel::TrainStep(const Matrix& raw_rows) {
  if (finalized()) {
    throw std::logic_error("cannot train a finalized representation");
  }
  Vector grad;
  const double loss = Loss(raw_rows, &grad);
  if (!std::isfinite(loss) || !grad.allFinite()) {
    throw std::runtime_error("representation training diverged (loss " +
                             std::to_string(loss) + ")");
  }
  ApplyUpdate(grad);
  return loss;
}

void ReprModel::ApplyUpdate(const Vector& data_grad) {
  if (data_grad.size() != params_.size()) {
    throw std::invalid_argument("gradient does not match parameters");
  }
  velocity_ = hyper_.momentum * velocity_ + data_grad +
              hyper_.weight_decay * params_;
  params_ -= hyper_.learning_rate * velocity_;
}

std::vector<Matrix> ReprModel::TransformFeatures(const Matrix& raw_rows) const {
  std::vector<Matrix> out;
  out.reserve(bank_.count());
  for (int m = 0; m < bank_.count(); ++m) {
    out.push_back(Embed(bank_.Apply(m, raw_rows)));
  }
  return out;
}

void ReprModel::Finalize(const Matrix& rows, double shrinkage) {
  if (rows.rows() == 0) throw std::invalid_argument("finalize on empty set");
  std::vector<GdeModel> gdes;
  gdes.reserve(bank_.count());
  for (const Matrix& f : TransformFeatures(rows)) {
    gdes.push_back(GdeModel::Fit(f, shrinkage));
  }
  gdes_ = std::move(gdes);
}

Vector ReprModel::Score(const Matrix& rows) const {
  if (!finalized()) {
    throw std::logic_error("representation scorer is not finalized");
  }
  Vector best;
  for (int m = 0; m < bank_.count(); ++m) {
    const Vector s = gdes_[m].ScoreBatch(Embed(bank_.Apply(m, rows)));
    best = m == 0 ? s : Vector(best.cwiseMin(s));
  }
  return best;
}

namespace {

class ReprFoldScorer final : public FoldScorer {
 public:
  ReprFoldScorer(const ReprModel& model, const Matrix& rows)
      : features_(model.TransformFeatures(rows)), rows_(rows.rows()) {}

  Index rows() const override { return rows_; }

  Vector FitAndScore(const IndexList& fit_rows,
                     double shrinkage) const override {
    Vector best;
    for (std::size_t m = 0; m < features_.size(); ++m) {
      const GdeModel gde =
          GdeModel::Fit(SelectRows(features_[m], fit_rows), shrinkage);
      const Vector s = gde.ScoreBatch(features_[m]);
      best = m == 0 ? s : Vector(best.cwiseMin(s));
    }
    return best;
  }

 private:
  std::vector<Matrix> features_;
  Index rows_;
};

}  // namespace

std::unique_ptr<FoldScorer> ReprExtractor::Bind(const Matrix& rows) const {
  return std::make_unique<ReprFoldScorer>(model_, rows);
}

PoolSampler::PoolSampler(IndexList pool, std::uint64_t seed)
    : pool_(std::move(pool)), rng_(seed) {
  if (pool_.empty()) throw std::invalid_argument("sampling pool is empty");
  cursor_ = 0;
  order_ = pool_;
  std::shuffle(order_.begin(), order_.end(), rng_);
}

void PoolSampler::Reset(IndexList pool) {
  if (pool.empty()) throw std::invalid_argument("sampling pool is empty");
  if (pool == pool_) return;
  pool_ = std::move(pool);
  order_.clear();
  cursor_ = 0;
}

IndexList PoolSampler::Next(Index batch_rows) {
  IndexList batch;
  batch.reserve(batch_rows);
  while (static_cast<Index>(batch.size()) < batch_rows) {
    if (cursor_ >= order_.size()) {
      order_ = pool_;
      std::shuffle(order_.begin(), order_.end(), rng_);
      cursor_ = 0;
    }
    batch.push_back(order_[cursor_++]);
  }
  return batch;
}

}  // namespace stoc
