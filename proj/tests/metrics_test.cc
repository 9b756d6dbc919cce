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

#include "preck/metrics.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "gtest/gtest.h"

namespace preck {
namespace {

Labeling lab(std::vector<std::uint8_t> bits) { return Labeling(std::move(bits)); }

TEST(Rank, SortsDescending) {
  EXPECT_EQ(rank(std::vector<Real>{0.1, 0.9, 0.5}),
            (std::vector<int>{1, 2, 0}));
}

TEST(Rank, TieBreaksByAscendingIndex) {
  EXPECT_EQ(rank(std::vector<Real>{7.0, 7.0, 7.0}),
            (std::vector<int>{0, 1, 2}));
}

TEST(Rank, SingletonAndEmpty) {
  EXPECT_EQ(rank(std::vector<Real>{-1.0}), (std::vector<int>{0}));
  EXPECT_THROW(rank(std::vector<Real>{}), std::invalid_argument);
}

TEST(Rank, DeterministicAcrossCalls) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> grid(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Real> s(20);
    for (auto& v : s) v = 0.5 * grid(rng);
    EXPECT_EQ(rank(s), rank(s));
  }
}

TEST(TopKLabeling, PicksTopScores) {
  const auto y = top_k_labeling(std::vector<Real>{0.9, 0.8, 0.3, 0.1}, 2);
  EXPECT_EQ(y.bits(), (std::vector<std::uint8_t>{1, 1, 0, 0}));
  EXPECT_EQ(y.cardinality(), 2);
}

TEST(TopKLabeling, FullKAndTies) {
  EXPECT_EQ(top_k_labeling(std::vector<Real>{1.0, 2.0, 3.0}, 3).bits(),
            (std::vector<std::uint8_t>{1, 1, 1}));
  EXPECT_EQ(top_k_labeling(std::vector<Real>{5.0, 5.0}, 1).bits(),
            (std::vector<std::uint8_t>{1, 0}));
  EXPECT_THROW(top_k_labeling(std::vector<Real>{1.0}, 2),
               std::invalid_argument);
  EXPECT_THROW(top_k_labeling(std::vector<Real>{1.0}, 0),
               std::invalid_argument);
}

TEST(Delta, CountsMislabeledPositions) {
  EXPECT_EQ(delta(lab({1, 0, 1, 0}), lab({0, 1, 1, 0})), 1);
  const auto y = lab({1, 0, 1, 1, 0});
  EXPECT_EQ(delta(y, y), 0);
  EXPECT_EQ(delta(lab({0, 0, 0}), lab({1, 0, 1})), 2);
  EXPECT_THROW(delta(lab({1}), lab({1, 0})), std::invalid_argument);
}

TEST(Overlap, CountsSharedPositives) {
  EXPECT_EQ(overlap(lab({1, 0, 1}), lab({1, 1, 0})), 1);
  const auto y = lab({1, 1, 0, 1});
  EXPECT_EQ(overlap(y, y), y.cardinality());
  EXPECT_EQ(overlap(lab({1, 0}), lab({0, 1})), 0);
  EXPECT_THROW(overlap(lab({1}), lab({1, 0})), std::invalid_argument);
}

TEST(PrecAtK, CountsNegativesAtTheTop) {
  const std::vector<Real> s = {0.9, 0.8, 0.3, 0.1};
  EXPECT_EQ(prec_at_k(s, lab({1, 0, 1, 0}), 2), 1);
  EXPECT_EQ(prec_at_k(s, top_k_labeling(s, 2), 2), 0);  // perfect ranking
  EXPECT_EQ(prec_at_k(s, lab({0, 0, 0, 0}), 3), 3);
  EXPECT_THROW(prec_at_k(s, lab({1, 0, 1, 0}), 5), std::invalid_argument);
}

TEST(PrecAtK, EqualsDeltaAgainstTopKLabeling) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<Real> u(-1.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 16);
    std::vector<Real> s(n);
    std::vector<std::uint8_t> bits(n);
    for (int i = 0; i < n; ++i) {
      s[i] = coin(rng) ? u(rng) : 0.5 * (static_cast<int>(rng() % 5) - 2);
      bits[i] = static_cast<std::uint8_t>(coin(rng));
    }
    const Labeling y(bits);
    const int k = 1 + static_cast<int>(rng() % n);
    EXPECT_EQ(prec_at_k(s, y, k), delta(y, top_k_labeling(s, k)));
    EXPECT_LE(prec_at_k(s, y, k), k);
  }
}

TEST(PrecAtK, InvariantUnderIncreasingTransform) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<Real> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 12);
    std::vector<Real> s(n), t(n);
    std::vector<std::uint8_t> bits(n);
    for (int i = 0; i < n; ++i) {
      s[i] = u(rng);
      t[i] = std::exp(0.5 * s[i]) + 3.0;  // strictly increasing transform
      bits[i] = static_cast<std::uint8_t>(rng() % 2);
    }
    const Labeling y(bits);
    const int k = 1 + static_cast<int>(rng() % n);
    EXPECT_EQ(prec_at_k(s, y, k), prec_at_k(t, y, k));
  }
}

TEST(EffectiveK, CeilingWithFloorAtOne) {
  EXPECT_EQ(effective_k(0.25, 4), 1);
  EXPECT_EQ(effective_k(0.25, 5), 2);
  EXPECT_EQ(effective_k(0.5, 3), 2);
  EXPECT_EQ(effective_k(0.1, 3), 1);
  EXPECT_EQ(effective_k(1.0, 7), 7);
  EXPECT_EQ(effective_k(0.3, 10), 3);  // exact product must not round up
  EXPECT_THROW(effective_k(0.0, 4), std::invalid_argument);
  EXPECT_THROW(effective_k(1.5, 4), std::invalid_argument);
  EXPECT_THROW(effective_k(0.5, 0), std::invalid_argument);
}

TEST(PrecAtKappa, PerfectRankingGivesZero) {
  const std::vector<Real> s = {4.0, 3.0, 2.0, 1.0};
  EXPECT_DOUBLE_EQ(prec_at_kappa(s, lab({1, 1, 0, 0}), 0.5), 0.0);
}

TEST(PrecAtKappa, TopTwoNegativesGiveFullLoss) {
  // Six points, four positives; kappa = 0.5 targets k = 2 and the two
  // negatives hold the top scores.
  const std::vector<Real> s = {9.0, 8.0, 1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(prec_at_kappa(s, lab({0, 0, 1, 1, 1, 1}), 0.5), 1.0);
}

TEST(PrecAtKappa, AllPositivesRankedLast) {
  const std::vector<Real> s = {5.0, 6.0, 7.0, 8.0, 1.0, 2.0};
  EXPECT_DOUBLE_EQ(prec_at_kappa(s, lab({0, 0, 0, 0, 1, 1}), 1.0), 1.0);
}

TEST(PrecAtKappa, NoPositivesThrows) {
  EXPECT_THROW(prec_at_kappa(std::vector<Real>{1.0, 2.0}, lab({0, 0}), 0.5),
               std::invalid_argument);
}

}  // namespace
}  // namespace preck
