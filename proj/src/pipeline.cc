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

#include "stoc/pipeline.h"

#include <algorithm>
#include <stdexcept>

namespace stoc {

std::string ToString(Mode mode) {
  switch (mode) {
    case Mode::kBaseline:
      return "baseline";
    case Mode::kStocFixed:
      return "stoc-fixed";
    case Mode::kStocFull:
      return "stoc-full";
  }
  return "unknown";
}

std::string ToString(Representation representation) {
  return representation == Representation::kRaw ? "raw" : "goad";
}

Mode ParseMode(const std::string& text) {
  if (text == "baseline") return Mode::kBaseline;
  if (text == "stoc-fixed") return Mode::kStocFixed;
  if (text == "stoc-full") return Mode::kStocFull;
  throw std::invalid_argument("unknown mode '" + text + "'");
}

Representation ParseRepresentation(const std::string& text) {
  if (text == "raw") return Representation::kRaw;
  if (text == "goad") return Representation::kGoad;
  throw std::invalid_argument("unknown representation '" + text + "'");
}

bool RefinementSchedule::Contains(int epoch) const {
  if (std::find(epochs.begin(), epochs.end(), epoch) != epochs.end()) {
    return true;
  }
  if (repeat_every <= 0) return false;
  const int last = epochs.empty() ? 0 : *std::max_element(epochs.begin(),
                                                          epochs.end());
  return epoch > last && epoch % repeat_every == 0;
}

double GammaForAssumedRatio(double assumed_ratio) {
  if (!(assumed_ratio >= 0.0 && assumed_ratio <= 0.5)) {
    throw std::invalid_argument("assumed anomaly ratio must lie in [0, 0.5]");
  }
  return assumed_ratio == 0.0 ? kZeroRatioGamma : 2.0 * assumed_ratio;
}

void StocConfig::Validate() const {
  Refinement().Validate();
  repr.Validate();
  if (train_steps < 0) throw std::invalid_argument("train_steps must be >= 0");
  if (mode == Mode::kStocFull && representation == Representation::kRaw) {
    throw std::invalid_argument(
        "stoc-full needs a trainable representation (goad)");
  }
  for (int e : schedule.epochs) {
    if (e < 1) throw std::invalid_argument("schedule epochs are 1-based");
  }
  if (schedule.repeat_every < 0) {
    throw std::invalid_argument("schedule repeat_every must be >= 0");
  }
}

RefinementConfig StocConfig::Refinement() const {
  RefinementConfig rc;
  rc.ensemble_count = ensemble_count;
  rc.gamma = gamma;
  rc.shrinkage = shrinkage;
  rc.partition_seed = PipelineSeeds::From(master_seed).partition;
  return rc;
}

PipelineSeeds PipelineSeeds::From(std::uint64_t master_seed) {
  return {DeriveSeed(master_seed, {1}), DeriveSeed(master_seed, {2}),
          DeriveSeed(master_seed, {3}), DeriveSeed(master_seed, {4})};
}

StocPipeline::StocPipeline(Mode mode, Representation representation,
                           std::optional<ReprModel> repr,
                           std::optional<GdeModel> gde,
                           std::vector<RefinementRecord> history,
                           IndexList final_pool, Index input_dims)
    : mode_(mode),
      representation_(representation),
      repr_(std::move(repr)),
      gde_(std::move(gde)),
      history_(std::move(history)),
      final_pool_(std::move(final_pool)),
      input_dims_(input_dims) {}

Vector StocPipeline::Predict(const Matrix& queries) const {
  if (!fitted()) throw std::logic_error("pipeline is not fitted");
  if (queries.cols() != input_dims_) {
    throw std::invalid_argument("query dimension mismatch");
  }
  if (representation_ == Representation::kRaw) return gde_->ScoreBatch(queries);
  return repr_->Score(queries);
}

RefinementRecord Summarize(const RefinedSet& refined, int epoch,
                           std::int64_t step,
                           std::span<const int> diagnostic_labels) {
  RefinementRecord record;
  record.epoch = epoch;
  record.step = step;
  record.kept = static_cast<Index>(refined.kept_indices.size());
  record.rejected =
      static_cast<Index>(refined.pseudo_labels.size()) - record.kept;
  if (!diagnostic_labels.empty()) {
    if (diagnostic_labels.size() != refined.pseudo_labels.size()) {
      throw std::invalid_argument("diagnostic labels do not match rows");
    }
    double anomalies = 0, normals = 0, anomalies_out = 0, normals_out = 0;
    for (std::size_t i = 0; i < diagnostic_labels.size(); ++i) {
      const bool out = refined.pseudo_labels[i] == 1;
      if (diagnostic_labels[i] == 1) {
        ++anomalies;
        anomalies_out += out;
      } else {
        ++normals;
        normals_out += out;
      }
    }
    if (anomalies > 0) record.anomalies_excluded = anomalies_out / anomalies;
    if (normals > 0) record.normals_excluded = normals_out / normals;
  }
  return record;
}

namespace {

IndexList AllRows(Index n) {
  IndexList rows(n);
  for (Index i = 0; i < n; ++i) rows[i] = i;
  return rows;
}

void CheckInputs(const Matrix& train, const StocConfig& config,
                 std::span<const int> diagnostic_labels) {
  config.Validate();
  if (train.rows() < 2) throw std::invalid_argument("need at least 2 rows");
  if (!train.allFinite()) throw std::invalid_argument("non-finite features");
  if (!diagnostic_labels.empty() &&
      static_cast<Index>(diagnostic_labels.size()) != train.rows()) {
    throw std::invalid_argument("diagnostic labels do not match rows");
  }
}

RefinedSet RefineChecked(const Matrix& train, const FeatureExtractor& extractor,
                         const RefinementConfig& rc, std::uint64_t call) {
  RefinedSet refined = RefineData(train, extractor, rc, call);
  if (refined.kept_indices.size() < 2) {
    throw std::runtime_error("refinement rejected all but " +
                             std::to_string(refined.kept_indices.size()) +
                             " rows");
  }
  return refined;
}

// Trains the representation. With `refine` set, the sampling pool is
// replaced by the refined rows at every scheduled epoch.
ReprModel TrainRepresentation(const Matrix& train, const StocConfig& config,
                              bool refine,
                              std::span<const int> diagnostic_labels,
                              std::vector<RefinementRecord>* history,
                              std::uint64_t* call_index) {
  const PipelineSeeds seeds = PipelineSeeds::From(config.master_seed);
  ReprModel model(train.cols(), config.repr, seeds.bank, seeds.init);
  const RefinementConfig rc = config.Refinement();
  const Index batch = config.repr.batch_rows;
  const std::int64_t steps_per_epoch = (train.rows() + batch - 1) / batch;

  PoolSampler sampler(AllRows(train.rows()), seeds.shuffle);
  for (std::int64_t step = 0; step < config.train_steps; ++step) {
    if (refine && step % steps_per_epoch == 0) {
      const int epoch = static_cast<int>(step / steps_per_epoch) + 1;
      if (config.schedule.Contains(epoch)) {
        const ReprExtractor extractor(model);
        RefinedSet refined =
            RefineChecked(train, extractor, rc, (*call_index)++);
        history->push_back(Summarize(refined, epoch, step, diagnostic_labels));
        sampler.Reset(std::move(refined.kept_indices));
      }
    }
    model.TrainStep(SelectRows(train, sampler.Next(batch)));
  }
  return model;
}

}  // namespace

StocPipeline FitBaseline(const Matrix& train, const StocConfig& config,
                         std::span<const int> diagnostic_labels) {
  CheckInputs(train, config, diagnostic_labels);
  const IndexList all = AllRows(train.rows());
  if (config.representation == Representation::kRaw) {
    return StocPipeline(Mode::kBaseline, config.representation, std::nullopt,
                        GdeModel::Fit(train, config.shrinkage), {}, all,
                        train.cols());
  }
  std::uint64_t calls = 0;
  std::vector<RefinementRecord> history;
  ReprModel model = TrainRepresentation(train, config, false, diagnostic_labels,
                                        &history, &calls);
  model.Finalize(train, config.shrinkage);
  return StocPipeline(Mode::kBaseline, config.representation, std::move(model),
                      std::nullopt, {}, all, train.cols());
}

StocPipeline FitStocFixed(const Matrix& train, const StocConfig& config,
                          std::span<const int> diagnostic_labels) {
  CheckInputs(train, config, diagnostic_labels);
  const RefinementConfig rc = config.Refinement();
  std::vector<RefinementRecord> history;

  if (config.representation == Representation::kRaw) {
    RefinedSet refined = RefineChecked(train, IdentityExtractor(), rc, 0);
    history.push_back(Summarize(refined, 0, 0, diagnostic_labels));
    GdeModel gde =
        GdeModel::Fit(SelectRows(train, refined.kept_indices), config.shrinkage);
    return StocPipeline(Mode::kStocFixed, config.representation, std::nullopt,
                        std::move(gde), std::move(history),
                        std::move(refined.kept_indices), train.cols());
  }

  std::uint64_t calls = 0;
  ReprModel model = TrainRepresentation(train, config, false, diagnostic_labels,
                                        &history, &calls);
  RefinedSet refined = RefineChecked(train, ReprExtractor(model), rc, calls);
  history.push_back(
      Summarize(refined, 0, config.train_steps, diagnostic_labels));
  model.Finalize(SelectRows(train, refined.kept_indices), config.shrinkage);
  return StocPipeline(Mode::kStocFixed, config.representation, std::move(model),
                      std::nullopt, std::move(history),
                      std::move(refined.kept_indices), train.cols());
}

StocPipeline FitStocFull(const Matrix& train, const StocConfig& config,
                         std::span<const int> diagnostic_labels) {
  CheckInputs(train, config, diagnostic_labels);
  if (config.representation != Representation::kGoad) {
    throw std::invalid_argument("stoc-full needs the goad representation");
  }
  const RefinementConfig rc = config.Refinement();
  std::uint64_t calls = 0;
  std::vector<RefinementRecord> history;
  ReprModel model = TrainRepresentation(train, config, true, diagnostic_labels,
                                        &history, &calls);
  if (config.schedule.empty()) {
    model.Finalize(train, config.shrinkage);
    return StocPipeline(Mode::kStocFull, config.representation,
                        std::move(model), std::nullopt, {},
                        AllRows(train.rows()), train.cols());
  }
  RefinedSet refined = RefineChecked(train, ReprExtractor(model), rc, calls);
  history.push_back(
      Summarize(refined, 0, config.train_steps, diagnostic_labels));
  model.Finalize(SelectRows(train, refined.kept_indices), config.shrinkage);
  return StocPipeline(Mode::kStocFull, config.representation, std::move(model),
                      std::nullopt, std::move(history),
                      std::move(refined.kept_indices), train.cols());
}

StocPipeline Fit(const Matrix& train, const StocConfig& config,
                 std::span<const int> diagnostic_labels) {
  switch (config.mode) {
    case Mode::kBaseline:
      return FitBaseline(train, config, diagnostic_labels);
    case Mode::kStocFixed:
      return FitStocFixed(train, config, diagnostic_labels);
    case Mode::kStocFull:
      return FitStocFull(train, config, diagnostic_labels);
  }
  throw std::invalid_argument("unknown mode");
}

}  // namespace stoc
