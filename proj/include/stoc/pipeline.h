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

#ifndef STOC_PIPELINE_H_
#define STOC_PIPELINE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stoc/gde.h"
#include "stoc/refine.h"
#include "stoc/repr.h"
#include "stoc/types.h"

namespace stoc {

enum class Mode { kBaseline, kStocFixed, kStocFull };
enum class Representation { kRaw, kGoad };

std::string ToString(Mode mode);
std::string ToString(Representation representation);
Mode ParseMode(const std::string& text);
Representation ParseRepresentation(const std::string& text);

// Refinement epochs (1-based). An epoch is ceil(N / batch_rows) steps.
struct RefinementSchedule {
  std::vector<int> epochs = {1, 2, 5, 10, 20, 50, 100, 500};
  // After the last listed epoch, refine every `repeat_every` epochs (0: off).
  int repeat_every = 500;

  static RefinementSchedule Never() { return {{}, 0}; }
  bool Contains(int epoch) const;
  bool empty() const { return epochs.empty() && repeat_every <= 0; }
};

// Rejection fraction used when the assumed contamination is zero.
inline constexpr double kZeroRatioGamma = 0.005;

// gamma = 2 x assumed anomaly ratio, or kZeroRatioGamma for a ratio of 0.
double GammaForAssumedRatio(double assumed_ratio);

struct StocConfig {
  Mode mode = Mode::kStocFull;
  Representation representation = Representation::kGoad;
  int ensemble_count = 5;
  double gamma = 0.2;
  double shrinkage = kDefaultShrinkage;
  ReprHyperparameters repr;
  std::int64_t train_steps = std::int64_t{1} << 16;
  RefinementSchedule schedule;
  std::uint64_t master_seed = 0;

  void Validate() const;
  RefinementConfig Refinement() const;
};

// Seeds derived from the master seed.
struct PipelineSeeds {
  std::uint64_t bank;
  std::uint64_t init;
  std::uint64_t shuffle;
  std::uint64_t partition;

  static PipelineSeeds From(std::uint64_t master_seed);
};

struct RefinementRecord {
  int epoch = 0;  // 0 for the post-training call
  std::int64_t step = 0;
  Index kept = 0;
  Index rejected = 0;
  // Filled only when diagnostic labels were supplied.
  std::optional<double> anomalies_excluded;
  std::optional<double> normals_excluded;
};

class StocPipeline {
 public:
  StocPipeline() = default;
  StocPipeline(Mode mode, Representation representation,
               std::optional<ReprModel> repr, std::optional<GdeModel> gde,
               std::vector<RefinementRecord> history, IndexList final_pool,
               Index input_dims);

  // Anomaly score per query row; higher is more anomalous.
  Vector Predict(const Matrix& queries) const;

  Mode mode() const { return mode_; }
  Representation representation() const { return representation_; }
  const std::optional<ReprModel>& repr() const { return repr_; }
  const std::optional<GdeModel>& gde() const { return gde_; }
  const std::vector<RefinementRecord>& history() const { return history_; }
  // Training rows the final classifier was fitted on.
  const IndexList& final_pool() const { return final_pool_; }
  Index input_dims() const { return input_dims_; }
  bool fitted() const { return repr_.has_value() || gde_.has_value(); }

 private:
  Mode mode_ = Mode::kBaseline;
  Representation representation_ = Representation::kRaw;
  std::optional<ReprModel> repr_;
  std::optional<GdeModel> gde_;
  std::vector<RefinementRecord> history_;
  IndexList final_pool_;
  Index input_dims_ = 0;
};

// `diagnostic_labels`, when non-empty, only feeds the refinement history.

// No refinement: the representation (or raw features) and the final scorer
// see every training row.
StocPipeline FitBaseline(const Matrix& train, const StocConfig& config,
                         std::span<const int> diagnostic_labels = {});

// One refinement pass over a fixed representation, then the final scorer on
// the kept rows. For the GOAD representation the network is trained on all
// rows first, exactly as in the baseline.
StocPipeline FitStocFixed(const Matrix& train, const StocConfig& config,
                          std::span<const int> diagnostic_labels = {});

// Representation training interleaved with refinement on the schedule, a
// final refinement, and per-transformation GDEs on the final kept rows. An
// empty schedule turns refinement off entirely, final call included, which
// reproduces the baseline.
StocPipeline FitStocFull(const Matrix& train, const StocConfig& config,
                         std::span<const int> diagnostic_labels = {});

// Dispatches on config.mode.
StocPipeline Fit(const Matrix& train, const StocConfig& config,
                 std::span<const int> diagnostic_labels = {});

// Kept/rejected bookkeeping for one refinement call.
RefinementRecord Summarize(const RefinedSet& refined, int epoch,
                           std::int64_t step,
                           std::span<const int> diagnostic_labels);

}  // namespace stoc

#endif  // STOC_PIPELINE_H_
