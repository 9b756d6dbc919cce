/*
 * Copyright 2026 The preck authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "preck/margins.hpp"

#include <random>
#include <stdexcept>
#include <vector>

#include "gtest/gtest.h"
#include "preck/surrogates.hpp"

namespace preck {
namespace {

Labeling lab(std::vector<std::uint8_t> bits) { return Labeling(std::move(bits)); }

// Positives {3,2,0}, negative {1}.
const std::vector<Real> kScores = {3.0, 2.0, 0.0, 1.0};
const std::vector<std::uint8_t> kBits = {1, 1, 1, 0};

TEST(WeakMargin, SecondBestPositiveAgainstTopNegative) {
  const auto r = check_weak_margin(kScores, lab(kBits), 2, 1.0);
  EXPECT_TRUE(r.satisfied);
  EXPECT_DOUBLE_EQ(r.slack, 0.0);
}

TEST(WeakMargin, EqualScoresNeverSatisfy) {
  const std::vector<Real> s = {1.0, 1.0, 1.0};
  const auto r = check_weak_margin(s, lab({1, 1, 0}), 1, 0.5);
  EXPECT_FALSE(r.satisfied);
}

TEST(WeakMargin, Preconditions) {
  EXPECT_THROW(check_weak_margin(kScores, lab({1, 1, 1, 1}), 1, 1.0),
               std::invalid_argument);  // no negatives
  EXPECT_THROW(check_weak_margin(kScores, lab(kBits), 4, 1.0),
               std::invalid_argument);  // k > n_plus
  EXPECT_THROW(check_weak_margin(kScores, lab(kBits), 1, 0.0),
               std::invalid_argument);  // gamma <= 0
}

TEST(MidMargin, BottomSubsetAverageBinds) {
  const auto r = check_mid_margin(kScores, lab(kBits), 2, 1.0);
  EXPECT_FALSE(r.satisfied);  // bottom-2 mean is 1, negative max is 1
  EXPECT_DOUBLE_EQ(r.slack, -1.0);
}

TEST(MidMargin, UniformHighPositives) {
  const std::vector<Real> s = {3.0, 3.0, 3.0, 1.0};
  for (int k = 1; k <= 3; ++k) {
    const auto r = check_mid_margin(s, lab(kBits), k, 1.0);
    EXPECT_TRUE(r.satisfied);
    EXPECT_DOUBLE_EQ(r.slack, 1.0);
  }
}

TEST(MidMargin, FullKCoincidesWithStrong) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<Real> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 10);
    std::vector<Real> s(n);
    std::vector<std::uint8_t> bits(n, 0);
    int n_plus = 0;
    while (n_plus == 0 || n_plus == n) {
      n_plus = 0;
      for (int i = 0; i < n; ++i) {
        s[i] = u(rng);
        bits[i] = static_cast<std::uint8_t>(rng() % 2);
        n_plus += bits[i];
      }
    }
    const auto y = lab(bits);
    const auto mid = check_mid_margin(s, y, n_plus, 0.5);
    const auto strong = check_strong_margin(s, y, 0.5);
    EXPECT_DOUBLE_EQ(mid.slack, strong.slack);
    EXPECT_EQ(mid.satisfied, strong.satisfied);
  }
}

TEST(StrongMargin, MinPositiveAgainstMaxNegative) {
  const std::vector<Real> s = {2.0, 3.0, 0.0, 1.0};
  const auto r = check_strong_margin(s, lab({1, 1, 0, 0}), 1.0);
  EXPECT_TRUE(r.satisfied);
  EXPECT_DOUBLE_EQ(r.slack, 0.0);
}

TEST(StrongMargin, TiedScoresFailAndGapOfFivePasses) {
  const std::vector<Real> tied = {1.0, 1.0};
  EXPECT_FALSE(check_strong_margin(tied, lab({1, 0}), 0.1).satisfied);
  const std::vector<Real> gap = {6.0, 1.0};
  const auto r = check_strong_margin(gap, lab({1, 0}), 5.0);
  EXPECT_TRUE(r.satisfied);
  EXPECT_DOUBLE_EQ(r.slack, 0.0);
}

TEST(StrongMargin, EmptyClassThrows) {
  EXPECT_THROW(check_strong_margin(std::vector<Real>{1.0}, lab({1}), 1.0),
               std::invalid_argument);
  EXPECT_THROW(check_strong_margin(std::vector<Real>{1.0}, lab({0}), 1.0),
               std::invalid_argument);
}

TEST(Checkers, InvariantUnderConstantShift) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<Real> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5 + static_cast<int>(rng() % 8);
    std::vector<Real> s(n), shifted(n);
    std::vector<std::uint8_t> bits(n, 0);
    int n_plus = 0;
    while (n_plus == 0 || n_plus == n) {
      n_plus = 0;
      for (int i = 0; i < n; ++i) {
        s[i] = u(rng);
        bits[i] = static_cast<std::uint8_t>(rng() % 2);
        n_plus += bits[i];
      }
    }
    const Real shift = u(rng);
    for (int i = 0; i < n; ++i) shifted[i] = s[i] + shift;
    const auto y = lab(bits);
    const int k = 1 + static_cast<int>(rng() % n_plus);
    EXPECT_NEAR(check_weak_margin(s, y, k, 1.0).slack,
                check_weak_margin(shifted, y, k, 1.0).slack, 1e-9);
    EXPECT_NEAR(check_mid_margin(s, y, k, 1.0).slack,
                check_mid_margin(shifted, y, k, 1.0).slack, 1e-9);
    EXPECT_NEAR(check_strong_margin(s, y, 1.0).slack,
                check_strong_margin(shifted, y, 1.0).slack, 1e-9);
  }
}

TEST(Generator, StrongDatasetPassesItsChecker) {
  const auto data = generate_margin_dataset({MarginKind::kStrong, 1, 1.0}, 40,
                                            10, 5, 17, 1.0);
  const auto s = score_batch(data.model, data.batch);
  const auto y = Labeling::of_batch(data.batch);
  EXPECT_TRUE(check_strong_margin(s, y, 1.0).satisfied);
  EXPECT_DOUBLE_EQ(data.model.norm(), 1.0);
  EXPECT_LE(data.max_feature_norm, 1.0 + 1e-12);
}

TEST(Generator, MidDatasetFailsStrong) {
  const auto data = generate_margin_dataset({MarginKind::kMid, 3, 1.0}, 40,
                                            10, 5, 19, 1.0);
  const auto s = score_batch(data.model, data.batch);
  const auto y = Labeling::of_batch(data.batch);
  EXPECT_TRUE(check_mid_margin(s, y, 3, 1.0).satisfied);
  EXPECT_FALSE(check_strong_margin(s, y, 1.0).satisfied);
}

TEST(Generator, WeakDatasetFailsMidAndInterleavesStragglers) {
  const auto data = generate_margin_dataset({MarginKind::kWeak, 4, 1.0}, 60,
                                            12, 6, 23, 1.0);
  const auto s = score_batch(data.model, data.batch);
  const auto y = Labeling::of_batch(data.batch);
  EXPECT_TRUE(check_weak_margin(s, y, 4, 1.0).satisfied);
  EXPECT_FALSE(check_mid_margin(s, y, 4, 1.0).satisfied);

  // Stragglers sit inside the negative band.
  Real max_neg = -1e300;
  for (int i = 0; i < y.size(); ++i)
    if (!y.is_positive(i)) max_neg = std::max(max_neg, s[i]);
  int buried = 0;
  for (int i = 0; i < y.size(); ++i)
    if (y.is_positive(i) && s[i] <= max_neg) ++buried;
  EXPECT_EQ(buried, 12 - 4);
}

TEST(Generator, DeterministicPerSeed) {
  const MarginSpec spec{MarginKind::kMid, 2, 0.5};
  const auto a = generate_margin_dataset(spec, 30, 8, 4, 99, 1.0);
  const auto b = generate_margin_dataset(spec, 30, 8, 4, 99, 1.0);
  ASSERT_EQ(a.batch.size(), b.batch.size());
  for (int i = 0; i < a.batch.size(); ++i) {
    EXPECT_EQ(a.batch[i].y, b.batch[i].y);
    EXPECT_EQ(a.batch[i].x, b.batch[i].x);
  }
}

TEST(Generator, GammaAtTwiceRadiusStillFeasible) {
  for (MarginKind kind :
       {MarginKind::kStrong, MarginKind::kMid, MarginKind::kWeak}) {
    const auto data =
        generate_margin_dataset({kind, 2, 2.0}, 24, 6, 4, 31, 1.0);
    const auto s = score_batch(data.model, data.batch);
    const auto y = Labeling::of_batch(data.batch);
    EXPECT_TRUE(check_margin({kind, 2, 2.0}, s, y).satisfied)
        << to_string(kind);
  }
}

TEST(Generator, InfeasibleParametersThrow) {
  EXPECT_THROW(generate_margin_dataset({MarginKind::kStrong, 1, 2.5}, 20, 5,
                                       4, 1, 1.0),
               std::invalid_argument);  // gamma > 2R
  EXPECT_THROW(generate_margin_dataset({MarginKind::kMid, 6, 1.0}, 20, 5, 4,
                                       1, 1.0),
               std::invalid_argument);  // k > n_plus
  EXPECT_THROW(
      generate_margin_dataset({MarginKind::kStrong, 1, 1.0}, 20, 20, 4, 1, 1.0),
      std::invalid_argument);  // no negatives
  EXPECT_THROW(
      generate_margin_dataset({MarginKind::kStrong, 1, 1.0}, 20, 5, 1, 1, 1.0),
      std::invalid_argument);  // dim < 2
}

TEST(Generator, HierarchyOnStrongDataset) {
  const auto data = generate_margin_dataset({MarginKind::kStrong, 1, 1.0}, 30,
                                            9, 4, 37, 1.0);
  const auto s = score_batch(data.model, data.batch);
  const auto y = Labeling::of_batch(data.batch);
  for (int k = 1; k <= y.cardinality(); ++k) {
    EXPECT_TRUE(check_mid_margin(s, y, k, 1.0).satisfied);
    EXPECT_TRUE(check_weak_margin(s, y, k, 1.0).satisfied);
  }
}

TEST(Generator, SurrogateLinksAtUnitGamma) {
  for (int seed = 0; seed < 20; ++seed) {
    const auto weak = generate_margin_dataset({MarginKind::kWeak, 3, 1.0}, 30,
                                              8, 4, 100 + seed, 1.0);
    EXPECT_NEAR(
        eval_ramp(score_batch(weak.model, weak.batch),
                  Labeling::of_batch(weak.batch), 3)
            .value,
        0.0, 1e-9);
    const auto mid = generate_margin_dataset({MarginKind::kMid, 3, 1.0}, 30,
                                             8, 4, 200 + seed, 1.0);
    EXPECT_NEAR(eval_avg(score_batch(mid.model, mid.batch),
                         Labeling::of_batch(mid.batch), 3)
                    .value,
                0.0, 1e-9);
    const auto strong = generate_margin_dataset({MarginKind::kStrong, 3, 1.0},
                                                30, 8, 4, 300 + seed, 1.0);
    EXPECT_NEAR(eval_max(score_batch(strong.model, strong.batch),
                         Labeling::of_batch(strong.batch), 3)
                    .value,
                0.0, 1e-9);
  }
}

}  // namespace
}  // namespace preck
