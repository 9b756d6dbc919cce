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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "preck/metrics.hpp"
#include "preck/surrogates.hpp"

namespace preck {

std::string to_string(Method method) {
  switch (method) {
    case Method::kPerceptronAvg: return "perceptron-avg";
    case Method::kPerceptronMax: return "perceptron-max";
    case Method::kSgdAvg: return "sgd-avg";
    case Method::kSgdMax: return "sgd-max";
  }
  return "unknown";
}

std::optional<Method> method_from_string(const std::string& name) {
  if (name == "perceptron-avg") return Method::kPerceptronAvg;
  if (name == "perceptron-max") return Method::kPerceptronMax;
  if (name == "sgd-avg") return Method::kSgdAvg;
  if (name == "sgd-max") return Method::kSgdMax;
  return std::nullopt;
}

bool is_sgd(Method method) {
  return method == Method::kSgdAvg || method == Method::kSgdMax;
}

KSpec KSpec::fixed(int k) {
  if (k < 1) throw std::invalid_argument("KSpec: fixed k must be >= 1");
  KSpec spec;
  spec.relative_ = false;
  spec.k_ = k;
  return spec;
}

KSpec KSpec::relative(Real kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0))
    throw std::invalid_argument("KSpec: kappa must lie in (0,1]");
  KSpec spec;
  spec.relative_ = true;
  spec.kappa_ = kappa;
  return spec;
}

int KSpec::resolve(int n_plus) const {
  if (n_plus < 1)
    throw std::invalid_argument("KSpec::resolve: n_plus must be >= 1");
  return relative_ ? effective_k(kappa_, n_plus) : std::min(k_, n_plus);
}

std::string KSpec::to_string() const {
  std::ostringstream os;
  if (relative_) {
    os.precision(9);
    os << "kappa=" << kappa_;
  } else {
    os << "k=" << k_;
  }
  return os.str();
}

namespace {

struct StepContext {
  ScoreVector s;
  Labeling y;
  Labeling yhat;
  int mistakes = 0;
  int matched = 0;  // K(y, yhat)
};

StepContext rank_batch(const LinearModel& model, const Batch& batch, int k,
                       const char* who) {
  if (k < 1 || k > batch.n_plus())
    throw std::invalid_argument(std::string(who) +
                                ": need 1 <= k <= n_plus(batch)");
  StepContext ctx;
  ctx.s = score_batch(model, batch);
  ctx.y = Labeling::of_batch(batch);
  ctx.yhat = top_k_labeling(ctx.s, k);
  ctx.mistakes = delta(ctx.y, ctx.yhat);
  ctx.matched = overlap(ctx.y, ctx.yhat);
  return ctx;
}

void subtract_false_positives(LinearModel& w, const Batch& batch,
                              const StepContext& ctx) {
  for (int i = 0; i < batch.size(); ++i)
    if (!ctx.y.is_positive(i) && ctx.yhat.is_positive(i))
      w.add_scaled(batch[i].x, -1.0);
}

}  // namespace

std::pair<LinearModel, int> perceptron_avg_step(const LinearModel& model,
                                                const Batch& batch, int k) {
  const auto ctx = rank_batch(model, batch, k, "perceptron_avg_step");
  if (ctx.mistakes == 0) return {model, 0};

  // mistakes > 0 forces n_plus - matched >= mistakes > 0, so the false
  // negative weight is well defined.
  const Real d = static_cast<Real>(ctx.mistakes) /
                 static_cast<Real>(batch.n_plus() - ctx.matched);
  LinearModel w = model;
  subtract_false_positives(w, batch, ctx);
  for (int i = 0; i < batch.size(); ++i)
    if (ctx.y.is_positive(i) && !ctx.yhat.is_positive(i))
      w.add_scaled(batch[i].x, d);
  return {std::move(w), ctx.mistakes};
}

std::pair<LinearModel, int> perceptron_max_step(const LinearModel& model,
                                                const Batch& batch, int k) {
  const auto ctx = rank_batch(model, batch, k, "perceptron_max_step");
  if (ctx.mistakes == 0) return {model, 0};

  // The mistakes highest-scored false negatives, lower index first on ties.
  std::vector<int> fn;
  for (int i = 0; i < batch.size(); ++i)
    if (ctx.y.is_positive(i) && !ctx.yhat.is_positive(i)) fn.push_back(i);
  std::sort(fn.begin(), fn.end(), [&ctx](int a, int b) {
    if (ctx.s[a] != ctx.s[b]) return ctx.s[a] > ctx.s[b];
    return a < b;
  });

  LinearModel w = model;
  subtract_false_positives(w, batch, ctx);
  for (int i = 0; i < ctx.mistakes; ++i) w.add_scaled(batch[fn[i]].x, 1.0);
  return {std::move(w), ctx.mistakes};
}

LinearModel sgd_step(const LinearModel& model, const Batch& batch, int k,
                     Real eta_t, Real radius, Method method) {
  if (!(radius > 0.0))
    throw std::invalid_argument("sgd_step: radius must be positive");
  if (batch.n_plus() == 0 || batch.n_minus() == 0) return model;  // skipped

  const Subgradient sg = method == Method::kSgdMax
                             ? subgradient_max(model, batch, k)
                             : subgradient_avg(model, batch, k);
  LinearModel w = model;
  auto& weights = w.mutable_weights();
  for (int j = 0; j < w.dim(); ++j) weights[j] -= eta_t * sg.g[j];
  const Real norm = w.norm();
  if (norm > radius) w.scale(radius / norm);
  return w;
}

TrainReport train(const LearnerConfig& config,
                  const std::vector<Batch>& stream) {
  if (stream.empty()) throw std::invalid_argument("train: empty stream");
  if (config.passes < 1)
    throw std::invalid_argument("train: passes must be >= 1");

  const int dim = stream.front().dim();
  const bool sgd = is_sgd(config.method);

  TrainReport report;
  report.per_batch.reserve(stream.size() * config.passes);
  LinearModel w(dim);
  std::vector<Real> averaged(dim, 0.0);

  std::vector<int> order(stream.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(mix_seed(config.seed, 0x70a5));

  long long steps = 0;
  for (int pass = 0; pass < config.passes; ++pass) {
    if (pass > 0) std::shuffle(order.begin(), order.end(), rng);
    for (int idx : order) {
      const Batch& batch = stream[idx];
      const bool degenerate =
          batch.n_plus() == 0 || (sgd && batch.n_minus() == 0);
      if (degenerate) {
        report.per_batch.push_back({0, 0, true});
        continue;
      }
      const int k = config.k_spec.resolve(batch.n_plus());
      ++steps;
      int mistakes = 0;
      switch (config.method) {
        case Method::kPerceptronAvg:
          std::tie(w, mistakes) = perceptron_avg_step(w, batch, k);
          break;
        case Method::kPerceptronMax:
          std::tie(w, mistakes) = perceptron_max_step(w, batch, k);
          break;
        case Method::kSgdAvg:
        case Method::kSgdMax: {
          // Mistake value of the pre-update model, as for the perceptrons.
          mistakes =
              prec_at_k(score_batch(w, batch), Labeling::of_batch(batch), k);
          const Real eta = config.eta0 / std::sqrt(static_cast<Real>(steps));
          w = sgd_step(w, batch, k, eta, config.radius, config.method);
          for (int j = 0; j < dim; ++j) averaged[j] += w.weights()[j];
          break;
        }
      }
      report.per_batch.push_back({mistakes, k, false});
      report.cumulative += mistakes;
    }
  }

  if (steps == 0)
    throw std::runtime_error("train: every batch in the stream was skipped");

  report.final_model = std::move(w);
  if (sgd) {
    for (auto& v : averaged) v /= static_cast<Real>(steps);
    report.averaged_model = LinearModel(std::move(averaged));
  }
  return report;
}

}  // namespace preck
