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

#ifndef PRECK_LEARNERS_HPP_
#define PRECK_LEARNERS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "preck/core.hpp"

namespace preck {

enum class Method {
  kPerceptronAvg,  // averaged false-negative update, all false negatives
  kPerceptronMax,  // unit update on the top-ranked false negatives only
  kSgdAvg,         // projected subgradient descent on the avg surrogate
  kSgdMax,         // projected subgradient descent on the max surrogate
};

std::string to_string(Method method);
// Parses the CLI names perceptron-avg / perceptron-max / sgd-avg / sgd-max.
std::optional<Method> method_from_string(const std::string& name);
bool is_sgd(Method method);

/// Per-batch target: either a fixed k (clamped to the batch positive count)
/// or a fraction kappa of the batch positive count.
class KSpec {
 public:
  static KSpec fixed(int k);
  static KSpec relative(Real kappa);

  bool is_relative() const { return relative_; }
  int fixed_k() const { return k_; }
  Real kappa() const { return kappa_; }

  // Effective k for a batch with n_plus positives (n_plus >= 1).
  int resolve(int n_plus) const;

  std::string to_string() const;

 private:
  bool relative_ = false;
  int k_ = 1;
  Real kappa_ = 0.0;
};

struct LearnerConfig {
  Method method = Method::kPerceptronAvg;
  KSpec k_spec = KSpec::fixed(1);
  int passes = 1;
  Real eta0 = 1.0;     // SGD step size eta_t = eta0 / sqrt(t)
  Real radius = 10.0;  // SGD projection ball radius
  std::uint64_t seed = 0;
};

struct BatchRecord {
  int delta = 0;        // Prec@k mistakes of the pre-update model
  int effective_k = 0;  // 0 when skipped
  bool skipped = false;
};

struct TrainReport {
  std::vector<BatchRecord> per_batch;
  long long cumulative = 0;  // sum of delta over non-skipped batches
  LinearModel final_model;
  std::optional<LinearModel> averaged_model;  // SGD only

  // Model the method is defined to return: the iterate average for SGD,
  // the final weights otherwise.
  const LinearModel& returned_model() const {
    return averaged_model ? *averaged_model : final_model;
  }
};

/// One perceptron step with the averaged false-negative update.  Requires
/// 1 <= k <= n_plus(batch).  Returns the updated model and the mistake value;
/// the model is returned unchanged when the mistake value is 0.
std::pair<LinearModel, int> perceptron_avg_step(const LinearModel& model,
                                                const Batch& batch, int k);

/// One perceptron step that adds only the delta_t highest-scored false
/// negatives with unit weight.  Same contract as perceptron_avg_step.
std::pair<LinearModel, int> perceptron_max_step(const LinearModel& model,
                                                const Batch& batch, int k);

/// One projected subgradient step on the surrogate selected by the method
/// (avg or max): w <- project(w - eta_t * g, ball of given radius).
LinearModel sgd_step(const LinearModel& model, const Batch& batch, int k,
                     Real eta_t, Real radius, Method method = Method::kSgdAvg);

/// Runs the configured learner over the stream.  Batches without positives
/// (and, for SGD, without negatives) are skipped.  Passes beyond the first
/// revisit the stream in an order reshuffled per pass from config.seed.
/// Throws when the stream is empty or every batch was skipped.
TrainReport train(const LearnerConfig& config,
                  const std::vector<Batch>& stream);

}  // namespace preck

#endif  // PRECK_LEARNERS_HPP_
