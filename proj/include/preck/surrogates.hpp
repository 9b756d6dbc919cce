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

#ifndef PRECK_SURROGATES_HPP_
#define PRECK_SURROGATES_HPP_

#include <span>
#include <string>
#include <vector>

#include "preck/core.hpp"
#include "preck/metrics.hpp"

namespace preck {

enum class SurrogateKind {
  kStruct,                // structural-SVM bracket, unnormalized
  kStructScaled,  // same bracket with 1/n score and 1/k label scaling
  kRamp,
  kMax,
  kAvg,
};

std::string to_string(SurrogateKind kind);

struct SurrogateValue {
  Real value = 0.0;
  // Number of true positives in the maximizing candidate labeling.
  int argmax_khat = 0;
  bool normalized = false;
};

struct Subgradient {
  std::vector<Real> g;
  int khat = 0;
};

/// Structural-SVM surrogate, exact maximum over all candidate labelings of
/// cardinality k.  The scaled form is the (1/n, 1/k)-scaled variant used by
/// the built-in 6-point counterexample.  Throws unless 1 <= k <= n.
SurrogateValue eval_struct(std::span<const Real> s, const Labeling& y, int k,
                           bool scaled);

/// Ramp surrogate: max over candidates of [mistakes + candidate score sum]
/// minus the sum of the k highest positive scores.  Throws unless
/// 1 <= k <= n_plus(y).
SurrogateValue eval_ramp(std::span<const Real> s, const Labeling& y, int k);

/// Max surrogate, evaluated exactly by a sweep over k' = number of true
/// positives in the candidate labeling.  Throws unless 1 <= k <= n_plus(y).
SurrogateValue eval_max(std::span<const Real> s, const Labeling& y, int k);

/// Avg surrogate, evaluated exactly by the k'-sweep over separately sorted
/// positive and negative scores.  Throws unless 1 <= k <= n_plus(y).
SurrogateValue eval_avg(std::span<const Real> s, const Labeling& y, int k);

// Dispatch by kind (kStruct selects the unnormalized bracket).
SurrogateValue eval_surrogate(SurrogateKind kind, std::span<const Real> s,
                              const Labeling& y, int k);
SurrogateValue eval_surrogate(SurrogateKind kind, const LinearModel& model,
                              const Batch& batch, int k);

// Per-k' bracket maxima of the avg / max sweeps, for diagnostics and
// argmax-uniqueness checks.  Entries run over the feasible k' range.
struct SweepPoint {
  int khat = 0;
  Real value = 0.0;
};
std::vector<SweepPoint> avg_sweep_values(std::span<const Real> s,
                                         const Labeling& y, int k);
std::vector<SweepPoint> max_sweep_values(std::span<const Real> s,
                                         const Labeling& y, int k);

/// Subgradient of w -> eval_avg(score_batch(w, batch), labels, k) at the
/// sweep argmax (ties broken toward smaller k').  Throws when k > n_plus or
/// either class is empty.
Subgradient subgradient_avg(const LinearModel& model, const Batch& batch,
                            int k);

/// Same sweep structure for the max surrogate.
Subgradient subgradient_max(const LinearModel& model, const Batch& batch,
                            int k);

/// Independent oracle: enumerates every candidate labeling (and, for kMax,
/// every inner completion) directly from the definitions.  Throws when
/// n > 20 or k is infeasible for the kind.
SurrogateValue brute_force_eval(SurrogateKind kind, std::span<const Real> s,
                                const Labeling& y, int k);

// value / k with the normalized flag set.  Throws unless k >= 1.
SurrogateValue normalize(SurrogateValue v, int k);

}  // namespace preck

#endif  // PRECK_SURROGATES_HPP_
