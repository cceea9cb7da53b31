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
#include <random>

#include "gtest/gtest.h"
#include "stoc/data.h"

namespace stoc {
namespace {

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const LabeledTable t = SynthBlobs(400, 44, 4, 6.0, 21);
    const Scaler s = Scaler::Fit(t.features);
    train_ = s.Transform(t.features);
    labels_ = t.labels;
    queries_ = s.Transform(SynthBlobs(50, 10, 4, 6.0, 22).features);
  }

  StocConfig Config(Mode mode, Representation rep, double gamma) const {
    StocConfig c;
    c.mode = mode;
    c.representation = rep;
    c.gamma = gamma;
    c.repr.transforms = 8;
    c.repr.projection_dims = 8;
    c.train_steps = 200;
    c.master_seed = 3;
    return c;
  }

  Matrix train_;
  Labels labels_;
  Matrix queries_;
};

TEST_F(PipelineTest, GammaZeroReproducesBaseline) {
  for (Representation rep : {Representation::kRaw, Representation::kGoad}) {
    const Vector base =
        Fit(train_, Config(Mode::kBaseline, rep, 0.0)).Predict(queries_);
    EXPECT_EQ(Fit(train_, Config(Mode::kStocFixed, rep, 0.0)).Predict(queries_),
              base);
    if (rep == Representation::kGoad) {
      EXPECT_EQ(Fit(train_, Config(Mode::kStocFull, rep, 0.0)).Predict(queries_),
                base);
    }
  }
}

TEST_F(PipelineTest, EmptyScheduleReproducesBaseline) {
  StocConfig full = Config(Mode::kStocFull, Representation::kGoad, 0.2);
  full.schedule = RefinementSchedule::Never();
  const StocPipeline a = Fit(train_, full);
  const StocPipeline b =
      Fit(train_, Config(Mode::kBaseline, Representation::kGoad, 0.2));
  EXPECT_EQ(a.Predict(queries_), b.Predict(queries_));
  EXPECT_EQ(a.final_pool(), b.final_pool());
  EXPECT_TRUE(a.history().empty());
}

TEST_F(PipelineTest, HistoryFollowsSchedule) {
  const StocConfig c = Config(Mode::kStocFull, Representation::kGoad, 0.1);
  const StocPipeline p = Fit(train_, c, labels_);
  // 444 rows, 64 per batch: 7 steps per epoch, so 200 steps reach epoch 29.
  const std::vector<int> expected_epochs = {1, 2, 5, 10, 20, 0};
  ASSERT_EQ(p.history().size(), expected_epochs.size());
  for (std::size_t i = 0; i < expected_epochs.size(); ++i) {
    EXPECT_EQ(p.history()[i].epoch, expected_epochs[i]);
    EXPECT_EQ(p.history()[i].kept + p.history()[i].rejected, 444);
    EXPECT_TRUE(p.history()[i].anomalies_excluded.has_value());
  }
  EXPECT_EQ(p.history()[1].step, 7);
  EXPECT_EQ(p.history().back().step, 200);
  EXPECT_EQ(static_cast<Index>(p.final_pool().size()), p.history().back().kept);
}

TEST_F(PipelineTest, RawRefinementExcludesAnomalies) {
  const StocPipeline p =
      Fit(train_, Config(Mode::kStocFixed, Representation::kRaw, 0.2), labels_);
  ASSERT_EQ(p.history().size(), 1u);
  EXPECT_GE(*p.history()[0].anomalies_excluded, 0.8);
  EXPECT_LT(*p.history()[0].normals_excluded, 0.5);
}

TEST_F(PipelineTest, DiagnosticLabelsDoNotChangeScores) {
  Labels shuffled = labels_;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(4));
  for (Mode mode : {Mode::kStocFixed, Mode::kStocFull}) {
    const StocConfig c = Config(mode, Representation::kGoad, 0.1);
    const Vector plain = Fit(train_, c).Predict(queries_);
    EXPECT_EQ(Fit(train_, c, labels_).Predict(queries_), plain);
    EXPECT_EQ(Fit(train_, c, shuffled).Predict(queries_), plain);
  }
}

TEST_F(PipelineTest, SeedControlsResult) {
  StocConfig c = Config(Mode::kStocFull, Representation::kGoad, 0.1);
  const Vector a = Fit(train_, c).Predict(queries_);
  EXPECT_EQ(Fit(train_, c).Predict(queries_), a);
  c.master_seed = 4;
  EXPECT_NE(Fit(train_, c).Predict(queries_), a);
}

TEST_F(PipelineTest, Errors) {
  EXPECT_THROW(Fit(train_, Config(Mode::kStocFull, Representation::kRaw, 0.1)),
               std::invalid_argument);
  EXPECT_THROW(Fit(train_, Config(Mode::kBaseline, Representation::kRaw, 1.5)),
               std::invalid_argument);
  EXPECT_THROW(
      Fit(train_, Config(Mode::kBaseline, Representation::kRaw, 0.1), Labels{1}),
      std::invalid_argument);
  const StocPipeline p =
      Fit(train_, Config(Mode::kBaseline, Representation::kRaw, 0.1));
  EXPECT_THROW(p.Predict(Matrix::Zero(2, 3)), std::invalid_argument);
  EXPECT_THROW(StocPipeline().Predict(queries_), std::logic_error);
}

TEST(RefinementSchedule, DefaultEpochs) {
  const RefinementSchedule s;
  for (int e : {1, 2, 5, 10, 20, 50, 100, 500, 1000, 1500}) EXPECT_TRUE(s.Contains(e));
  for (int e : {3, 4, 25, 499, 501, 750}) EXPECT_FALSE(s.Contains(e));
  EXPECT_FALSE(RefinementSchedule::Never().Contains(1));
}

TEST(GammaForAssumedRatio, Values) {
  EXPECT_DOUBLE_EQ(GammaForAssumedRatio(0.0), kZeroRatioGamma);
  EXPECT_DOUBLE_EQ(GammaForAssumedRatio(0.05), 0.1);
  EXPECT_THROW(GammaForAssumedRatio(-0.1), std::invalid_argument);
}

TEST(ModeNames, RoundTrip) {
  for (Mode m : {Mode::kBaseline, Mode::kStocFixed, Mode::kStocFull}) {
    EXPECT_EQ(ParseMode(ToString(m)), m);
  }
  for (Representation r : {Representation::kRaw, Representation::kGoad}) {
    EXPECT_EQ(ParseRepresentation(ToString(r)), r);
  }
  EXPECT_THROW(ParseMode("full"), std::invalid_argument);
}

}  // namespace
}  // namespace stoc
