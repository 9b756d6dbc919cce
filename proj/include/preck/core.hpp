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

#ifndef PRECK_CORE_HPP_
#define PRECK_CORE_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace preck {

using Real = double;

// One (index, value) entry of a sparse feature vector.
struct FeatureEntry {
  int index;
  Real value;

  friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

/// Sparse feature vector in canonical form: indices strictly increasing,
/// all < dim, no explicitly stored zeros, all values finite.
class SparseVector {
 public:
  SparseVector() = default;

  // Throws std::invalid_argument if the entries are not canonical.
  SparseVector(std::vector<FeatureEntry> entries, int dim);

  int dim() const { return dim_; }
  const std::vector<FeatureEntry>& entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }

  Real norm() const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::vector<FeatureEntry> entries_;
  int dim_ = 0;
};

/// A data point with a binary relevance label (1 = positive, 0 = negative).
struct LabeledPoint {
  SparseVector x;
  int y = 0;

  friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

/// A finite set of labeled points sharing one feature dimension, with the
/// positive count cached.
class Batch {
 public:
  Batch() = default;

  // Throws if a label is outside {0,1} or a point dimension differs from dim.
  static Batch from_points(std::vector<LabeledPoint> points, int dim);

  int size() const { return static_cast<int>(points_.size()); }
  int dim() const { return dim_; }
  int n_plus() const { return n_plus_; }
  int n_minus() const { return size() - n_plus_; }
  const std::vector<LabeledPoint>& points() const { return points_; }
  const LabeledPoint& operator[](int i) const { return points_[i]; }

 private:
  std::vector<LabeledPoint> points_;
  int dim_ = 0;
  int n_plus_ = 0;
};

/// Dense weight vector w defining the linear scorer x -> <w, x>.
class LinearModel {
 public:
  LinearModel() = default;
  explicit LinearModel(int dim) : w_(dim, 0.0) {}
  // Throws if any weight is non-finite.
  explicit LinearModel(std::vector<Real> w);

  int dim() const { return static_cast<int>(w_.size()); }
  std::span<const Real> weights() const { return w_; }
  std::vector<Real>& mutable_weights() { return w_; }

  Real norm() const;

  // w += alpha * x.  Throws on dimension mismatch.
  void add_scaled(const SparseVector& x, Real alpha);
  void scale(Real alpha);

  friend bool operator==(const LinearModel&, const LinearModel&) = default;

 private:
  std::vector<Real> w_;
};

// Per-point scores of a batch, in batch order.
using ScoreVector = std::vector<Real>;

// <w, x>.  Throws on dimension mismatch.
Real dot(const LinearModel& model, const SparseVector& x);

// s[i] = dot(model, batch[i].x).  Empty batch yields an empty vector.
ScoreVector score_batch(const LinearModel& model, const Batch& batch);

Real l2_norm(std::span<const Real> v);
Real l2_norm(const SparseVector& x);

// Deterministic seed derivation for independent RNG streams (splitmix64).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace preck

#endif  // PRECK_CORE_HPP_
