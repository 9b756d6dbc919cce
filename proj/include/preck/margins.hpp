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

#ifndef PRECK_MARGINS_HPP_
#define PRECK_MARGINS_HPP_

#include <cstdint>
#include <span>
#include <string>

#include "preck/core.hpp"
#include "preck/metrics.hpp"

namespace preck {

enum class MarginKind {
  kWeak,    // some k positives clear every negative by gamma
  kMid,     // every size-(n_plus - k + 1) positive subset clears on average
  kStrong,  // every positive clears every negative by gamma
};

std::string to_string(MarginKind kind);

struct MarginSpec {
  MarginKind kind = MarginKind::kStrong;
  int k = 1;  // ignored for kStrong
  Real gamma = 1.0;
};

struct MarginReport {
  bool satisfied = false;
  Real slack = 0.0;  // achieved margin minus gamma
};

/// Weak (k,gamma)-margin: achieved margin is the k-th largest positive score
/// minus the largest negative score.  Throws when n_plus < k or there is no
/// negative.
MarginReport check_weak_margin(std::span<const Real> s, const Labeling& y,
                               int k, Real gamma);

/// (k,gamma)-margin: achieved margin is the mean of the n_plus - k + 1 lowest
/// positive scores minus the largest negative score.  Same errors as above.
MarginReport check_mid_margin(std::span<const Real> s, const Labeling& y,
                              int k, Real gamma);

/// Strong gamma-margin: minimum positive score minus maximum negative score.
/// Throws when either class is empty.
MarginReport check_strong_margin(std::span<const Real> s, const Labeling& y,
                                 Real gamma);

MarginReport check_margin(const MarginSpec& spec, std::span<const Real> s,
                          const Labeling& y);

struct MarginDataset {
  Batch batch;
  LinearModel model;  // planted unit-norm model realizing the margin
  Real max_feature_norm = 0.0;
};

/// Builds a batch plus a planted unit-norm model whose scores satisfy the
/// requested margin with slack >= 0 (self-checked before returning).  Scores
/// are planted along the first axis; the remaining dim-1 coordinates carry
/// small seeded noise orthogonal to the planted model, rescaled so that every
/// feature norm stays <= feature_radius.
///
/// Weak datasets embed n_plus - k straggler positives inside the negative
/// score band (so they fail the mid margin); mid datasets tie one positive
/// with the top negative whenever the score budget allows (so they fail the
/// strong margin).  Throws on infeasible parameters.
MarginDataset generate_margin_dataset(const MarginSpec& spec, int n,
                                      int n_plus, int dim, std::uint64_t seed,
                                      Real feature_radius = 1.0);

}  // namespace preck

#endif  // PRECK_MARGINS_HPP_
