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

#ifndef PRECK_METRICS_HPP_
#define PRECK_METRICS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "preck/core.hpp"

namespace preck {

/// Binary label vector with its number of ones cached.
class Labeling {
 public:
  Labeling() = default;
  // Throws if any entry is outside {0,1}.
  explicit Labeling(std::vector<std::uint8_t> bits);

  static Labeling of_batch(const Batch& batch);

  int size() const { return static_cast<int>(bits_.size()); }
  int cardinality() const { return cardinality_; }
  bool is_positive(int i) const { return bits_[i] != 0; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  friend bool operator==(const Labeling&, const Labeling&) = default;

 private:
  std::vector<std::uint8_t> bits_;
  int cardinality_ = 0;
};

/// Permutation of [0, n) sorting scores in descending order; equal scores
/// are ordered by ascending original index so the result is deterministic.
/// Throws on empty input.
std::vector<int> rank(std::span<const Real> s);

/// Label vector assigning 1 exactly to the top-k ranked items of s.
/// Throws unless 1 <= k <= n.
Labeling top_k_labeling(std::span<const Real> s, int k);

// Number of positions labeled 0 by y1 but 1 by y2.  Throws on length mismatch.
int delta(const Labeling& y1, const Labeling& y2);

// Number of positions labeled 1 by both.  Throws on length mismatch.
int overlap(const Labeling& y1, const Labeling& y2);

/// Prec@k loss: the number of negatives among the top-k ranked items.
/// Integer in [0, k].  Throws unless 1 <= k <= n.
int prec_at_k(std::span<const Real> s, const Labeling& y, int k);

// k = max(1, ceil(kappa * n_plus)).  Throws unless kappa in (0,1], n_plus >= 1.
int effective_k(Real kappa, int n_plus);

/// Normalized Prec@kappa loss: prec_at_k(s, y, k) / k with
/// k = effective_k(kappa, n_plus(y)).  Throws when y has no positives.
Real prec_at_kappa(std::span<const Real> s, const Labeling& y, Real kappa);

}  // namespace preck

#endif  // PRECK_METRICS_HPP_
