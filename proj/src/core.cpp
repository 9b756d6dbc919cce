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

#include "preck/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace preck {

SparseVector::SparseVector(std::vector<FeatureEntry> entries, int dim)
    : entries_(std::move(entries)), dim_(dim) {
  if (dim_ < 0) throw std::invalid_argument("SparseVector: negative dim");
  int prev = -1;
  for (const auto& e : entries_) {
    if (e.index <= prev)
      throw std::invalid_argument(
          "SparseVector: indices must be strictly increasing (index " +
          std::to_string(e.index) + " after " + std::to_string(prev) + ")");
    if (e.index >= dim_)
      throw std::invalid_argument("SparseVector: index " +
                                  std::to_string(e.index) + " >= dim " +
                                  std::to_string(dim_));
    if (e.value == 0.0)
      throw std::invalid_argument(
          "SparseVector: explicit zero at index " + std::to_string(e.index) +
          " (canonical form stores no zeros)");
    if (!std::isfinite(e.value))
      throw std::invalid_argument("SparseVector: non-finite value at index " +
                                  std::to_string(e.index));
    prev = e.index;
  }
}

Real SparseVector::norm() const {
  Real acc = 0.0;
  for (const auto& e : entries_) acc += e.value * e.value;
  return std::sqrt(acc);
}

Batch Batch::from_points(std::vector<LabeledPoint> points, int dim) {
  Batch b;
  b.dim_ = dim;
  b.n_plus_ = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (p.y != 0 && p.y != 1)
      throw std::invalid_argument("Batch: label must be 0 or 1, got " +
                                  std::to_string(p.y) + " at point " +
                                  std::to_string(i));
    if (p.x.dim() != dim)
      throw std::invalid_argument(
          "Batch: point " + std::to_string(i) + " has dim " +
          std::to_string(p.x.dim()) + ", batch dim is " + std::to_string(dim));
    b.n_plus_ += p.y;
  }
  b.points_ = std::move(points);
  return b;
}

LinearModel::LinearModel(std::vector<Real> w) : w_(std::move(w)) {
  for (Real v : w_)
    if (!std::isfinite(v))
      throw std::invalid_argument("LinearModel: non-finite weight");
}

Real LinearModel::norm() const { return l2_norm(std::span<const Real>(w_)); }

void LinearModel::add_scaled(const SparseVector& x, Real alpha) {
  if (x.dim() != dim())
    throw std::invalid_argument("LinearModel::add_scaled: dim mismatch");
  for (const auto& e : x.entries()) w_[e.index] += alpha * e.value;
}

void LinearModel::scale(Real alpha) {
  for (Real& v : w_) v *= alpha;
}

Real dot(const LinearModel& model, const SparseVector& x) {
  if (x.dim() != model.dim())
    throw std::invalid_argument("dot: model dim " +
                                std::to_string(model.dim()) +
                                " != point dim " + std::to_string(x.dim()));
  const auto w = model.weights();
  Real acc = 0.0;
  for (const auto& e : x.entries()) acc += w[e.index] * e.value;
  return acc;
}

ScoreVector score_batch(const LinearModel& model, const Batch& batch) {
  if (batch.size() > 0 && batch.dim() != model.dim())
    throw std::invalid_argument("score_batch: dim mismatch");
  ScoreVector s;
  s.reserve(batch.size());
  for (const auto& p : batch.points()) s.push_back(dot(model, p.x));
  return s;
}

Real l2_norm(std::span<const Real> v) {
  Real acc = 0.0;
  for (Real x : v) acc += x * x;
  return std::sqrt(acc);
}

Real l2_norm(const SparseVector& x) { return x.norm(); }

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace preck
