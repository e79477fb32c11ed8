// Copyright 2026 The normconflict Authors.
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

#include <gtest/gtest.h>

#include "support.hpp"

namespace {

using namespace nctest;

constexpr auto A = ConflictLabel::kDeonticModality;
constexpr auto B = ConflictLabel::kDeonticStructure;
const std::vector<ConflictLabel> kFour(kConflictLabels.begin(),
                                       kConflictLabels.end());

TEST(Metrics, PerfectPredictions) {
  std::vector<ConflictLabel> y = {kFour[0], kFour[1], kFour[2], kFour[3],
                                  kFour[1]};
  auto m = ComputeMetrics(y, y, kFour);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
  auto cm = Confusion(y, y, kFour);
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t p = 0; p < 4; ++p)
      if (t != p) {
        EXPECT_EQ(cm.at(t, p), 0u);
      }
  EXPECT_EQ(cm.at(1, 1), 2u);
}

TEST(Metrics, TwoClassHandCount) {
  std::vector<ConflictLabel> truth = {A, A, B, B}, pred = {A, B, B, B};
  std::vector<ConflictLabel> classes = {A, B};
  auto m = ComputeMetrics(truth, pred, classes);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(m.per_class[0].precision, 1.0);
  EXPECT_DOUBLE_EQ(m.per_class[0].recall, 0.5);
  EXPECT_DOUBLE_EQ(m.per_class[1].precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.per_class[1].recall, 1.0);
  EXPECT_DOUBLE_EQ(m.precision, 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(m.recall, 0.75);
  EXPECT_DOUBLE_EQ(m.f1, (2.0 / 3.0 + 4.0 / 5.0) / 2.0);
  auto cm = Confusion(truth, pred, classes);
  EXPECT_EQ(cm.counts, (std::vector<std::size_t>{1, 1, 0, 2}));
  EXPECT_EQ(m.per_class[0].support, 2u);
}

TEST(Metrics, WeightedAveraging) {
  std::vector<ConflictLabel> truth = {A, A, A, B}, pred = {A, A, B, B};
  std::vector<ConflictLabel> classes = {A, B};
  auto m = ComputeMetrics(truth, pred, classes, Averaging::kWeighted);
  // A: P 1, R 2/3; B: P 1/2, R 1; supports 3 and 1.
  EXPECT_DOUBLE_EQ(m.precision, 0.75 * 1.0 + 0.25 * 0.5);
  EXPECT_DOUBLE_EQ(m.recall, 0.75 * (2.0 / 3.0) + 0.25 * 1.0);
  EXPECT_DOUBLE_EQ(m.recall, m.accuracy);
}

TEST(Metrics, AllOneClassOverBalancedTruth) {
  std::vector<ConflictLabel> truth, pred;
  for (auto l : kFour)
    for (int i = 0; i < 5; ++i) {
      truth.push_back(l);
      pred.push_back(kFour[2]);
    }
  auto m = ComputeMetrics(truth, pred, kFour);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.25);
  EXPECT_DOUBLE_EQ(m.recall, 0.25);
  EXPECT_DOUBLE_EQ(m.per_class[0].precision, 0.0);
  EXPECT_DOUBLE_EQ(m.per_class[2].precision, 0.25);
}

TEST(Metrics, AbsentClassScoresZeroButCounts) {
  std::vector<ConflictLabel> y = {A, A};
  auto m = ComputeMetrics(y, y, std::vector<ConflictLabel>{A, B});
  EXPECT_DOUBLE_EQ(m.f1, 0.5);
  EXPECT_DOUBLE_EQ(m.per_class[1].f1, 0.0);
}

TEST(Metrics, Errors) {
  std::vector<ConflictLabel> two = {A, B}, one = {A};
  EXPECT_EQ(CodeOf([&] { ComputeMetrics(two, one, kFour); }),
            ErrorCode::kLengthMismatch);
  EXPECT_EQ(CodeOf([&] { Confusion(two, one, kFour); }),
            ErrorCode::kLengthMismatch);
  std::vector<ConflictLabel> none;
  EXPECT_TRUE(CodeOf([&] { ComputeMetrics(none, none, kFour); }));
  std::vector<ConflictLabel> non = {ConflictLabel::kNonConflict};
  EXPECT_EQ(CodeOf([&] { ComputeMetrics(non, non, kFour); }),
            ErrorCode::kInvalidArgument);
}

// Independent count of the identities every metric must satisfy.
TEST(Metrics, IdentitiesOnRandomVectors) {
  ReferenceSplitMix64 rng{31};
  const std::vector<ConflictLabel> five(kAllLabels.begin(), kAllLabels.end());
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(200);
    std::vector<ConflictLabel> truth, pred;
    for (std::size_t i = 0; i < n; ++i) {
      truth.push_back(five[rng.below(5)]);
      pred.push_back(rng.below(3) == 0 ? truth.back() : five[rng.below(5)]);
    }
    auto cm = Confusion(truth, pred, five);
    auto m = MetricsFromConfusion(cm);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) correct += truth[i] == pred[i];
    EXPECT_EQ(cm.trace(), correct);
    EXPECT_EQ(cm.total(), n);
    EXPECT_DOUBLE_EQ(m.accuracy, static_cast<double>(correct) / n);
    double lo = 1, hi = 0;
    for (std::size_t c = 0; c < 5; ++c) {
      std::size_t support = 0;
      for (auto t : truth) support += t == five[c];
      EXPECT_EQ(cm.row_sum(c), support);
      const auto& pc = m.per_class[c];
      if (support) {
        EXPECT_DOUBLE_EQ(pc.recall,
                         static_cast<double>(cm.at(c, c)) / support);
      }
      for (double v : {pc.precision, pc.recall, pc.f1}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
      lo = std::min(lo, pc.f1);
      hi = std::max(hi, pc.f1);
    }
    EXPECT_GE(m.f1, lo - 1e-12);
    EXPECT_LE(m.f1, hi + 1e-12);
    for (double v : {m.accuracy, m.precision, m.recall, m.f1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Metrics, JsonAndGrid) {
  std::vector<ConflictLabel> truth = {A, A, B, B}, pred = {A, B, B, B};
  std::vector<ConflictLabel> classes = {A, B};
  auto cm = Confusion(truth, pred, classes);
  auto j = ConfusionToJson(cm);
  EXPECT_EQ(j.dump(), ConfusionToJson(cm).dump());
  const auto grid = FormatConfusion(cm);
  EXPECT_NE(grid.find("DM"), std::string::npos);
  EXPECT_NE(grid.find("DS"), std::string::npos);
  auto mj = MetricsToJson(MetricsFromConfusion(cm));
  EXPECT_DOUBLE_EQ(mj["accuracy"].get<double>(), 0.75);
  EXPECT_EQ(mj["averaging"], "macro");
}

}  // namespace
