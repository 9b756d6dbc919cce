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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace preck {

Labeling::Labeling(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  cardinality_ = 0;
  for (auto b : bits_) {
    if (b > 1) throw std::invalid_argument("Labeling: bits must be 0 or 1");
    cardinality_ += b;
  }
}

Labeling Labeling::of_batch(const Batch& batch) {
  std::vector<std::uint8_t> bits;
  bits.reserve(batch.size());
  for (const auto& p : batch.points())
    bits.push_back(static_cast<std::uint8_t>(p.y));
  return Labeling(std::move(bits));
}

std::vector<int> rank(std::span<const Real> s) {
  if (s.empty()) throw std::invalid_argument("rank: empty score vector");
  std::vector<int> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&s](int a, int b) {
    if (s[a] != s[b]) return s[a] > s[b];
    return a < b;
  });
  return order;
}

Labeling top_k_labeling(std::span<const Real> s, int k) {
  const int n = static_cast<int>(s.size());
  if (k < 1 || k > n)
    throw std::invalid_argument("top_k_labeling: k = " + std::to_string(k) +
                                " outside [1, " + std::to_string(n) + "]");
  const auto order = rank(s);
  std::vector<std::uint8_t> bits(n, 0);
  for (int i = 0; i < k; ++i) bits[order[i]] = 1;
  return Labeling(std::move(bits));
}

namespace {
void require_same_length(const Labeling& y1, const Labeling& y2,
                         const char* who) {
  if (y1.size() != y2.size())
    throw std::invalid_argument(std::string(who) + ": length mismatch (" +
                                std::to_string(y1.size()) + " vs " +
                                std::to_string(y2.size()) + ")");
}
}  // namespace

int delta(const Labeling& y1, const Labeling& y2) {
  require_same_length(y1, y2, "delta");
  int count = 0;
  for (int i = 0; i < y1.size(); ++i)
    if (!y1.is_positive(i) && y2.is_positive(i)) ++count;
  return count;
}

int overlap(const Labeling& y1, const Labeling& y2) {
  require_same_length(y1, y2, "overlap");
  int count = 0;
  for (int i = 0; i < y1.size(); ++i)
    if (y1.is_positive(i) && y2.is_positive(i)) ++count;
  return count;
}

int prec_at_k(std::span<const Real> s, const Labeling& y, int k) {
  const int n = static_cast<int>(s.size());
  if (y.size() != n) throw std::invalid_argument("prec_at_k: length mismatch");
  if (k < 1 || k > n)
    throw std::invalid_argument("prec_at_k: k = " + std::to_string(k) +
                                " outside [1, " + std::to_string(n) + "]");
  const auto order = rank(s);
  int loss = 0;
  for (int i = 0; i < k; ++i)
    if (!y.is_positive(order[i])) ++loss;
  return loss;
}

int effective_k(Real kappa, int n_plus) {
  if (!(kappa > 0.0 && kappa <= 1.0))
    throw std::invalid_argument("effective_k: kappa must lie in (0,1]");
  if (n_plus < 1)
    throw std::invalid_argument("effective_k: n_plus must be positive");
  // The 1e-9 guard keeps exact products like 0.25 * 4 from rounding up.
  const int k = static_cast<int>(std::ceil(kappa * n_plus - 1e-9));
  return std::min(n_plus, std::max(1, k));
}

Real prec_at_kappa(std::span<const Real> s, const Labeling& y, Real kappa) {
  if (y.cardinality() < 1)
    throw std::invalid_argument("prec_at_kappa: labeling has no positives");
  const int k = effective_k(kappa, y.cardinality());
  return static_cast<Real>(prec_at_k(s, y, k)) / static_cast<Real>(k);
}

}  // namespace preck
