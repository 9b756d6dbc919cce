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

#include "preck/learners.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "gtest/gtest.h"
#include "preck/dataio.hpp"
#include "preck/margins.hpp"
#include "preck/metrics.hpp"
#include "preck/surrogates.hpp"

namespace preck {
namespace {

SparseVector sv(std::vector<FeatureEntry> entries, int dim) {
  return SparseVector(std::move(entries), dim);
}

Batch two_point_batch() {
  // Positive (1,0) first, negative (0,1) second.
  return Batch::from_points(
      {{sv({{0, 1.0}}, 2), 1}, {sv({{1, 1.0}}, 2), 0}}, 2);
}

TEST(PerceptronAvgStep, NoMistakesLeavesModelBitIdentical) {
  // Zero model ties all scores; index order puts the positive on top.
  const auto batch = two_point_batch();
  LinearModel w(std::vector<Real>{0.25, -0.5});
  // Scores: positive 0.25, negative -0.5, already correct at k = 1.
  const auto [updated, mistakes] = perceptron_avg_step(w, batch, 1);
  EXPECT_EQ(mistakes, 0);
  EXPECT_EQ(updated, w);
}

TEST(PerceptronAvgStep, HandTracedUpdate) {
  const Real eps = 0.5;
  LinearModel w(std::vector<Real>{0.0, eps});  // negative point wins
  const auto [updated, mistakes] =
      perceptron_avg_step(w, two_point_batch(), 1);
  EXPECT_EQ(mistakes, 1);
  EXPECT_DOUBLE_EQ(updated.weights()[0], 1.0);
  EXPECT_DOUBLE_EQ(updated.weights()[1], eps - 1.0);
}

TEST(PerceptronAvgStep, RejectsKBeyondPositives) {
  LinearModel w(2);
  EXPECT_THROW(perceptron_avg_step(w, two_point_batch(), 2),
               std::invalid_argument);
}

TEST(PerceptronAvgStep, UpdateStaysInBatchFeatureSpan) {
  // Feature index 3 never appears in the batch, so it must stay untouched.
  auto batch = Batch::from_points({{sv({{0, 1.0}, {1, 0.5}}, 4), 1},
                                   {sv({{1, 1.0}, {2, -0.5}}, 4), 0},
                                   {sv({{0, -0.3}}, 4), 1}},
                                  4);
  LinearModel w(std::vector<Real>{0.0, 1.0, 0.0, 0.75});
  const auto [updated, mistakes] = perceptron_avg_step(w, batch, 1);
  ASSERT_GT(mistakes, 0);
  EXPECT_DOUBLE_EQ(updated.weights()[3], 0.75);
}

TEST(PerceptronMaxStep, CoincidesWithAvgWhenAllFalseNegativesUpdate) {
  // One positive below one negative: the single false negative is the whole
  // set and the averaged weight is 1.
  LinearModel w(std::vector<Real>{0.0, 0.5});
  const auto [avg_model, avg_mistakes] =
      perceptron_avg_step(w, two_point_batch(), 1);
  const auto [max_model, max_mistakes] =
      perceptron_max_step(w, two_point_batch(), 1);
  EXPECT_EQ(avg_mistakes, max_mistakes);
  EXPECT_EQ(avg_model, max_model);
}

TEST(PerceptronMaxStep, AddsOnlyTopRankedFalseNegatives) {
  // Three positives, one negative that outranks them all, k = 2.
  auto batch = Batch::from_points({{sv({{0, 1.0}}, 4), 0},
                                   {sv({{1, 1.0}}, 4), 1},
                                   {sv({{2, 1.0}}, 4), 1},
                                   {sv({{3, 1.0}}, 4), 1}},
                                  4);
  LinearModel w(std::vector<Real>{10.0, 3.0, 2.0, 1.0});
  // Ranking: negative (10), then positives 3, 2, 1; top-2 = {neg, pos#1}.
  // mistakes = 1; false negatives are pos#2 (score 2) and pos#3 (score 1);
  // only the higher-scored one is added.
  const auto [updated, mistakes] = perceptron_max_step(w, batch, 2);
  EXPECT_EQ(mistakes, 1);
  EXPECT_DOUBLE_EQ(updated.weights()[0], 9.0);   // false positive removed
  EXPECT_DOUBLE_EQ(updated.weights()[1], 3.0);   // true positive untouched
  EXPECT_DOUBLE_EQ(updated.weights()[2], 3.0);   // top false negative added
  EXPECT_DOUBLE_EQ(updated.weights()[3], 1.0);   // lower false negative not
}

TEST(SgdStep, ZeroGradientRegionLeavesModelUnchanged) {
  const auto data = generate_margin_dataset({MarginKind::kStrong, 1, 1.5}, 20,
                                            6, 4, 5, 1.0);
  LinearModel w = data.model;
  const auto updated = sgd_step(w, data.batch, 3, 0.5, 10.0, Method::kSgdMax);
  EXPECT_EQ(updated, w);
}

TEST(SgdStep, NoProjectionInsideTheBall) {
  const auto batch = two_point_batch();
  LinearModel w(2);
  // g = (-1, 1); step eta = 0.5 lands at (0.5, -0.5), well inside radius 10.
  const auto updated = sgd_step(w, batch, 1, 0.5, 10.0, Method::kSgdAvg);
  EXPECT_DOUBLE_EQ(updated.weights()[0], 0.5);
  EXPECT_DOUBLE_EQ(updated.weights()[1], -0.5);
}

TEST(SgdStep, ProjectionPreservesDirectionAtTwiceRadius) {
  const auto batch = two_point_batch();
  LinearModel w(2);
  // g = (-1, 1) has norm sqrt(2); choose eta so the step has norm 2 * radius.
  const Real radius = 0.25;
  const Real eta = 2.0 * radius / std::sqrt(2.0);
  const auto updated = sgd_step(w, batch, 1, eta, radius, Method::kSgdAvg);
  EXPECT_NEAR(updated.norm(), radius, 1e-12);
  EXPECT_NEAR(updated.weights()[0] / updated.weights()[1], -1.0, 1e-12);
  EXPECT_GT(updated.weights()[0], 0.0);
}

TEST(SgdStep, DegenerateBatchIsSkipped) {
  auto all_pos = Batch::from_points(
      {{sv({{0, 1.0}}, 1), 1}, {sv({{0, 2.0}}, 1), 1}}, 1);
  LinearModel w(std::vector<Real>{0.5});
  EXPECT_EQ(sgd_step(w, all_pos, 1, 0.1, 10.0, Method::kSgdAvg), w);
}

std::vector<Batch> margin_stream(MarginKind kind, int k, Real gamma,
                                 int batches, int b, int n_plus, int dim,
                                 std::uint64_t seed, LinearModel* planted) {
  std::vector<Batch> stream;
  for (int t = 0; t < batches; ++t) {
    auto data = generate_margin_dataset({kind, k, gamma}, b, n_plus, dim,
                                        mix_seed(seed, t), 1.0);
    if (planted) *planted = data.model;
    stream.push_back(std::move(data.batch));
  }
  return stream;
}

TEST(Train, AlreadyPerfectStreamProducesNoMistakes) {
  // Positives listed first: the zero model ties every score and the index
  // tie-break ranks them on top, so no update ever fires.
  std::vector<LabeledPoint> pts;
  for (int i = 0; i < 6; ++i)
    pts.push_back({sv({{i, 1.0}}, 6), i < 3 ? 1 : 0});
  const std::vector<Batch> stream = {Batch::from_points(std::move(pts), 6)};
  LearnerConfig config;
  config.method = Method::kPerceptronAvg;
  config.k_spec = KSpec::fixed(2);
  const auto report = train(config, stream);
  EXPECT_EQ(report.cumulative, 0);
  for (Real v : report.final_model.weights()) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(Train, MistakeBoundOnMidMarginStream) {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const int k = 2;
    const Real gamma = 1.0;
    const auto stream = margin_stream(MarginKind::kMid, k, gamma, 80, 40, 8,
                                      5, seed, nullptr);
    LearnerConfig config;
    config.method = Method::kPerceptronAvg;
    config.k_spec = KSpec::fixed(k);
    config.seed = seed;
    const auto report = train(config, stream);
    EXPECT_LE(report.cumulative, 4.0 * k / (gamma * gamma));
  }
}

TEST(Train, MistakeBoundOnStrongMarginStream) {
  for (std::uint64_t seed : {4ull, 5ull, 6ull}) {
    const int k = 3;
    const Real gamma = 0.5;
    const auto stream = margin_stream(MarginKind::kStrong, k, gamma, 80, 40,
                                      8, 5, seed, nullptr);
    LearnerConfig config;
    config.method = Method::kPerceptronMax;
    config.k_spec = KSpec::fixed(k);
    config.seed = seed;
    const auto report = train(config, stream);
    EXPECT_LE(report.cumulative, 4.0 * k / (gamma * gamma));
  }
}

TEST(Train, AgnosticShapeBoundAtThePlantedModel) {
  LinearModel planted;
  const int k = 2;
  const auto stream = margin_stream(MarginKind::kMid, k, 0.5, 60, 30, 6, 4,
                                    7, &planted);
  LearnerConfig config;
  config.method = Method::kPerceptronAvg;
  config.k_spec = KSpec::fixed(k);
  const auto report = train(config, stream);

  Real surrogate_total = 0.0;
  for (const auto& batch : stream)
    surrogate_total += eval_avg(score_batch(planted, batch),
                                Labeling::of_batch(batch), k)
                           .value;
  const Real bound =
      std::pow(std::sqrt(4.0 * k) + std::sqrt(surrogate_total), 2.0);
  EXPECT_LE(report.cumulative, bound + 1e-6);
}

TEST(Train, SkipsBatchesWithoutPositives) {
  std::vector<LabeledPoint> empty_pos, mixed;
  for (int i = 0; i < 4; ++i) empty_pos.push_back({sv({{0, 1.0}}, 2), 0});
  mixed.push_back({sv({{0, 1.0}}, 2), 1});
  mixed.push_back({sv({{1, 1.0}}, 2), 0});
  const std::vector<Batch> stream = {Batch::from_points(empty_pos, 2),
                                     Batch::from_points(mixed, 2)};
  LearnerConfig config;
  config.method = Method::kPerceptronAvg;
  config.k_spec = KSpec::fixed(1);
  const auto report = train(config, stream);
  ASSERT_EQ(report.per_batch.size(), 2u);
  EXPECT_TRUE(report.per_batch[0].skipped);
  EXPECT_FALSE(report.per_batch[1].skipped);
}

TEST(Train, AllSkippedThrows) {
  std::vector<LabeledPoint> pts = {{sv({{0, 1.0}}, 1), 0}};
  const std::vector<Batch> stream = {Batch::from_points(pts, 1)};
  LearnerConfig config;
  config.method = Method::kPerceptronAvg;
  config.k_spec = KSpec::fixed(1);
  EXPECT_THROW(train(config, stream), std::runtime_error);
}

TEST(Train, DeterministicGivenConfigAndStream) {
  const auto stream = margin_stream(MarginKind::kWeak, 2, 1.0, 20, 25, 6, 4,
                                    11, nullptr);
  LearnerConfig config;
  config.method = Method::kSgdAvg;
  config.k_spec = KSpec::relative(0.5);
  config.passes = 3;
  config.seed = 77;
  const auto a = train(config, stream);
  const auto b = train(config, stream);
  EXPECT_EQ(a.final_model, b.final_model);
  EXPECT_EQ(*a.averaged_model, *b.averaged_model);
  EXPECT_EQ(a.cumulative, b.cumulative);
  ASSERT_EQ(a.per_batch.size(), b.per_batch.size());
  for (std::size_t i = 0; i < a.per_batch.size(); ++i) {
    EXPECT_EQ(a.per_batch[i].delta, b.per_batch[i].delta);
    EXPECT_EQ(a.per_batch[i].effective_k, b.per_batch[i].effective_k);
  }
}

TEST(Train, RelativeKappaResolvedPerBatch) {
  const auto stream = margin_stream(MarginKind::kStrong, 1, 1.0, 5, 20, 4, 4,
                                    13, nullptr);
  LearnerConfig config;
  config.method = Method::kPerceptronAvg;
  config.k_spec = KSpec::relative(0.25);
  const auto report = train(config, stream);
  for (const auto& rec : report.per_batch) EXPECT_EQ(rec.effective_k, 1);
}

TEST(Train, SgdReturnsAveragedModelAndPerceptronDoesNot) {
  const auto stream = margin_stream(MarginKind::kStrong, 1, 1.0, 5, 20, 4, 4,
                                    15, nullptr);
  LearnerConfig config;
  config.k_spec = KSpec::fixed(1);
  config.method = Method::kSgdAvg;
  EXPECT_TRUE(train(config, stream).averaged_model.has_value());
  config.method = Method::kPerceptronMax;
  EXPECT_FALSE(train(config, stream).averaged_model.has_value());
}

TEST(Train, SgdSuboptimalityShrinksAsStreamGrows) {
  // Statistical check: the averaged SGD iterate approaches the planted
  // model's population surrogate value as the number of batches grows.  The
  // deliberately small step scale keeps the one-batch run far from optimal.
  const int seeds = 5;
  Real gap1 = 0.0, gap8 = 0.0, gap64 = 0.0;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto data = generate_margin_dataset(
        {MarginKind::kMid, 20, 1.0}, 3200, 320, 6, 400 + seed, 1.0);
    const Dataset population = dataset_from_batch(data.batch);
    const auto pop_batch = batch_from_dataset(population);
    const auto pop_labels = Labeling::of_batch(pop_batch);
    const int k_pop = effective_k(0.25, population.n_plus);
    const Real planted_value =
        eval_avg(score_batch(data.model, pop_batch), pop_labels, k_pop).value /
        k_pop;

    auto gap_for = [&](int batches) {
      const auto stream =
          batcher(population, 50, mix_seed(1000 + seed, batches), 0);
      std::vector<Batch> prefix(stream.begin(), stream.begin() + batches);
      LearnerConfig config;
      config.method = Method::kSgdAvg;
      config.k_spec = KSpec::relative(0.25);
      config.passes = 1;
      config.eta0 = 0.05;
      config.seed = mix_seed(2000 + seed, batches);
      const auto report = train(config, prefix);
      const Real value = eval_avg(score_batch(*report.averaged_model,
                                              pop_batch),
                                  pop_labels, k_pop)
                             .value /
                         k_pop;
      return value - planted_value;
    };
    gap1 += gap_for(1);
    gap8 += gap_for(8);
    gap64 += gap_for(64);
  }
  EXPECT_GT(gap1 / seeds, 1e-6);  // the short run must not already be optimal
  EXPECT_LE(gap8 / seeds, gap1 / seeds + 1e-9);
  EXPECT_LE(gap64 / seeds, gap8 / seeds + 1e-9);
  EXPECT_LT(gap64 / seeds, gap1 / seeds);
}

TEST(KSpecParsing, MethodNamesRoundTrip) {
  for (Method m : {Method::kPerceptronAvg, Method::kPerceptronMax,
                   Method::kSgdAvg, Method::kSgdMax})
    EXPECT_EQ(method_from_string(to_string(m)), m);
  EXPECT_FALSE(method_from_string("nope").has_value());
  EXPECT_EQ(KSpec::fixed(5).to_string(), "k=5");
  EXPECT_EQ(KSpec::relative(0.25).to_string(), "kappa=0.25");
  EXPECT_THROW(KSpec::fixed(0), std::invalid_argument);
  EXPECT_THROW(KSpec::relative(1.5), std::invalid_argument);
}

}  // namespace
}  // namespace preck
