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

#include "preck/surrogates.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace preck {

namespace {

void require_lengths(std::span<const Real> s, const Labeling& y,
                     const char* who) {
  if (static_cast<int>(s.size()) != y.size())
    throw std::invalid_argument(std::string(who) + ": length mismatch");
}

void require_k_le(int k, int limit, const char* who, const char* what) {
  if (k < 1 || k > limit)
    throw std::invalid_argument(std::string(who) + ": k = " +
                                std::to_string(k) + " outside [1, " +
                                std::string(what) + " = " +
                                std::to_string(limit) + "]");
}

// Indices [0, n) ordered by (key descending, index ascending).
std::vector<int> order_by_key_desc(std::span<const Real> key) {
  std::vector<int> order(key.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&key](int a, int b) {
    if (key[a] != key[b]) return key[a] > key[b];
    return a < b;
  });
  return order;
}

// Positive and negative scores, each sorted descending, plus prefix sums.
struct ClassScores {
  std::vector<Real> pos;        // descending
  std::vector<Real> neg;        // descending
  std::vector<Real> neg_prefix; // neg_prefix[m] = sum of top m negatives
  std::vector<Real> pos_suffix; // pos_suffix[j] = sum of pos[j..)
};

ClassScores split_scores(std::span<const Real> s, const Labeling& y) {
  ClassScores cs;
  for (int i = 0; i < y.size(); ++i)
    (y.is_positive(i) ? cs.pos : cs.neg).push_back(s[i]);
  std::sort(cs.pos.begin(), cs.pos.end(), std::greater<Real>());
  std::sort(cs.neg.begin(), cs.neg.end(), std::greater<Real>());
  cs.neg_prefix.assign(cs.neg.size() + 1, 0.0);
  for (std::size_t m = 0; m < cs.neg.size(); ++m)
    cs.neg_prefix[m + 1] = cs.neg_prefix[m] + cs.neg[m];
  cs.pos_suffix.assign(cs.pos.size() + 1, 0.0);
  for (int j = static_cast<int>(cs.pos.size()) - 1; j >= 0; --j)
    cs.pos_suffix[j] = cs.pos_suffix[j + 1] + cs.pos[j];
  return cs;
}

Real sum_positive_scores(std::span<const Real> s, const Labeling& y) {
  Real acc = 0.0;
  for (int i = 0; i < y.size(); ++i)
    if (y.is_positive(i)) acc += s[i];
  return acc;
}

}  // namespace

std::string to_string(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::kStruct: return "struct";
    case SurrogateKind::kStructScaled: return "struct-scaled";
    case SurrogateKind::kRamp: return "ramp";
    case SurrogateKind::kMax: return "max";
    case SurrogateKind::kAvg: return "avg";
  }
  return "unknown";
}

SurrogateValue eval_struct(std::span<const Real> s, const Labeling& y, int k,
                           bool scaled) {
  require_lengths(s, y, "eval_struct");
  const int n = y.size();
  require_k_le(k, n, "eval_struct", "n");

  // The candidate bracket decomposes over indices, so the maximizing
  // labeling keeps the k largest per-index keys.
  std::vector<Real> key(n);
  for (int i = 0; i < n; ++i) {
    key[i] = scaled ? s[i] / n - (y.is_positive(i) ? 1.0 / k : 0.0)
                             : s[i] + (y.is_positive(i) ? 0.0 : 1.0);
  }
  const auto order = order_by_key_desc(key);
  Real picked = 0.0;
  int khat = 0;
  for (int i = 0; i < k; ++i) {
    picked += key[order[i]];
    khat += y.is_positive(order[i]) ? 1 : 0;
  }
  const Real pos_sum = sum_positive_scores(s, y);
  SurrogateValue out;
  out.value = scaled ? 1.0 + picked - pos_sum / n : picked - pos_sum;
  out.argmax_khat = khat;
  return out;
}

SurrogateValue eval_ramp(std::span<const Real> s, const Labeling& y, int k) {
  require_lengths(s, y, "eval_ramp");
  require_k_le(k, y.cardinality(), "eval_ramp", "n_plus");

  std::vector<Real> key(y.size());
  for (int i = 0; i < y.size(); ++i)
    key[i] = s[i] + (y.is_positive(i) ? 0.0 : 1.0);
  const auto order = order_by_key_desc(key);
  Real first = 0.0;
  int khat = 0;
  for (int i = 0; i < k; ++i) {
    first += key[order[i]];
    khat += y.is_positive(order[i]) ? 1 : 0;
  }
  const auto cs = split_scores(s, y);
  const Real top_pos = cs.pos_suffix[0] - cs.pos_suffix[k];  // k best positives
  SurrogateValue out;
  out.value = first - top_pos;
  out.argmax_khat = khat;
  return out;
}

namespace {

// Shared k'-sweep.  For each feasible count k' of true positives in the
// candidate labeling, `value_at` returns the exact maximum of the bracket;
// the smallest maximizing k' wins ties.
template <typename ValueFn>
SurrogateValue sweep_max(int k, int n_minus, ValueFn value_at) {
  const int lo = std::max(0, k - n_minus);
  Real best = -std::numeric_limits<Real>::infinity();
  int best_k = lo;
  for (int kp = lo; kp <= k; ++kp) {
    const Real v = value_at(kp);
    if (v > best) {
      best = v;
      best_k = kp;
    }
  }
  SurrogateValue out;
  out.value = best;
  out.argmax_khat = best_k;
  return out;
}

}  // namespace

SurrogateValue eval_max(std::span<const Real> s, const Labeling& y, int k) {
  require_lengths(s, y, "eval_max");
  const int n_plus = y.cardinality();
  require_k_le(k, n_plus, "eval_max", "n_plus");
  const auto cs = split_scores(s, y);
  const int n_minus = static_cast<int>(cs.neg.size());
  return sweep_max(k, n_minus, [&](int kp) {
    const int m = k - kp;  // negatives picked; also positives left uncovered
    return static_cast<Real>(m) + cs.neg_prefix[m] - cs.pos_suffix[n_plus - m];
  });
}

SurrogateValue eval_avg(std::span<const Real> s, const Labeling& y, int k) {
  require_lengths(s, y, "eval_avg");
  const int n_plus = y.cardinality();
  require_k_le(k, n_plus, "eval_avg", "n_plus");
  const auto cs = split_scores(s, y);
  const int n_minus = static_cast<int>(cs.neg.size());
  return sweep_max(k, n_minus, [&](int kp) {
    const int m = k - kp;
    // At kp == n_plus the tail sum is empty; its weight is defined as 0.
    const Real d = (kp == n_plus)
                       ? 0.0
                       : static_cast<Real>(k - kp) / (n_plus - kp);
    return static_cast<Real>(m) - d * cs.pos_suffix[kp] + cs.neg_prefix[m];
  });
}

namespace {

template <typename ValueFn>
std::vector<SweepPoint> sweep_points(int k, int n_minus,
                                     ValueFn value_at) {
  std::vector<SweepPoint> pts;
  for (int kp = std::max(0, k - n_minus); kp <= k; ++kp)
    pts.push_back({kp, value_at(kp)});
  return pts;
}

}  // namespace

std::vector<SweepPoint> avg_sweep_values(std::span<const Real> s,
                                         const Labeling& y, int k) {
  require_lengths(s, y, "avg_sweep_values");
  const int n_plus = y.cardinality();
  require_k_le(k, n_plus, "avg_sweep_values", "n_plus");
  const auto cs = split_scores(s, y);
  return sweep_points(k, static_cast<int>(cs.neg.size()),
                      [&](int kp) {
                        const int m = k - kp;
                        const Real d =
                            (kp == n_plus)
                                ? 0.0
                                : static_cast<Real>(k - kp) / (n_plus - kp);
                        return static_cast<Real>(m) - d * cs.pos_suffix[kp] +
                               cs.neg_prefix[m];
                      });
}

std::vector<SweepPoint> max_sweep_values(std::span<const Real> s,
                                         const Labeling& y, int k) {
  require_lengths(s, y, "max_sweep_values");
  const int n_plus = y.cardinality();
  require_k_le(k, n_plus, "max_sweep_values", "n_plus");
  const auto cs = split_scores(s, y);
  return sweep_points(k, static_cast<int>(cs.neg.size()),
                      [&](int kp) {
                        const int m = k - kp;
                        return static_cast<Real>(m) + cs.neg_prefix[m] -
                               cs.pos_suffix[n_plus - m];
                      });
}

SurrogateValue eval_surrogate(SurrogateKind kind, std::span<const Real> s,
                              const Labeling& y, int k) {
  switch (kind) {
    case SurrogateKind::kStruct: return eval_struct(s, y, k, false);
    case SurrogateKind::kStructScaled:
      return eval_struct(s, y, k, true);
    case SurrogateKind::kRamp: return eval_ramp(s, y, k);
    case SurrogateKind::kMax: return eval_max(s, y, k);
    case SurrogateKind::kAvg: return eval_avg(s, y, k);
  }
  throw std::invalid_argument("eval_surrogate: unknown kind");
}

SurrogateValue eval_surrogate(SurrogateKind kind, const LinearModel& model,
                              const Batch& batch, int k) {
  const auto s = score_batch(model, batch);
  return eval_surrogate(kind, s, Labeling::of_batch(batch), k);
}

namespace {

// Positive / negative point indices of a batch, each sorted by
// (score descending, index ascending).
struct ClassIndices {
  std::vector<int> pos;
  std::vector<int> neg;
};

ClassIndices split_indices(const Batch& batch, std::span<const Real> s) {
  ClassIndices ci;
  for (int i = 0; i < batch.size(); ++i)
    (batch[i].y == 1 ? ci.pos : ci.neg).push_back(i);
  auto by_score = [&s](int a, int b) {
    if (s[a] != s[b]) return s[a] > s[b];
    return a < b;
  };
  std::sort(ci.pos.begin(), ci.pos.end(), by_score);
  std::sort(ci.neg.begin(), ci.neg.end(), by_score);
  return ci;
}

enum class SweepKind { kAvg, kMax };

Subgradient subgradient_sweep(const LinearModel& model, const Batch& batch,
                              int k, SweepKind kind) {
  const char* who =
      kind == SweepKind::kAvg ? "subgradient_avg" : "subgradient_max";
  const int n_plus = batch.n_plus();
  const int n_minus = batch.n_minus();
  if (n_plus < 1 || n_minus < 1)
    throw std::invalid_argument(std::string(who) +
                                ": batch needs at least one positive and one "
                                "negative point");
  require_k_le(k, n_plus, who, "n_plus");

  const auto s = score_batch(model, batch);
  const auto y = Labeling::of_batch(batch);
  const SurrogateValue v = kind == SweepKind::kAvg ? eval_avg(s, y, k)
                                                   : eval_max(s, y, k);
  const int kstar = v.argmax_khat;
  const int m = k - kstar;
  const auto ci = split_indices(batch, s);

  LinearModel g(batch.dim());
  for (int i = 0; i < m; ++i) g.add_scaled(batch[ci.neg[i]].x, 1.0);
  if (kind == SweepKind::kAvg) {
    const Real d = (kstar == n_plus)
                       ? 0.0
                       : static_cast<Real>(k - kstar) / (n_plus - kstar);
    if (d != 0.0)
      for (int i = kstar; i < n_plus; ++i)
        g.add_scaled(batch[ci.pos[i]].x, -d);
  } else {
    for (int j = 0; j < m; ++j)
      g.add_scaled(batch[ci.pos[n_plus - 1 - j]].x, -1.0);
  }

  Subgradient out;
  out.g.assign(g.weights().begin(), g.weights().end());
  out.khat = kstar;
  return out;
}

}  // namespace

Subgradient subgradient_avg(const LinearModel& model, const Batch& batch,
                            int k) {
  return subgradient_sweep(model, batch, k, SweepKind::kAvg);
}

Subgradient subgradient_max(const LinearModel& model, const Batch& batch,
                            int k) {
  return subgradient_sweep(model, batch, k, SweepKind::kMax);
}

namespace {

using Mask = std::uint32_t;

Real mask_score_sum(Mask mask, std::span<const Real> s) {
  Real acc = 0.0;
  while (mask) {
    acc += s[std::countr_zero(mask)];
    mask &= mask - 1;
  }
  return acc;
}

// Calls fn for every subset of `universe` with exactly `size` bits set.
template <typename Fn>
void for_each_subset(Mask universe, int size, Fn fn) {
  std::vector<int> positions;
  for (Mask m = universe; m; m &= m - 1)
    positions.push_back(std::countr_zero(m));
  const int t = static_cast<int>(positions.size());
  if (size > t) return;
  if (size == 0) {
    fn(Mask{0});
    return;
  }
  // Gosper's hack over the compressed t-bit space.
  for (Mask c = (Mask{1} << size) - 1; c < (Mask{1} << t);) {
    Mask expanded = 0;
    for (Mask bits = c; bits; bits &= bits - 1)
      expanded |= Mask{1} << positions[std::countr_zero(bits)];
    fn(expanded);
    const Mask low = c & -c;
    const Mask ripple = c + low;
    c = ripple | (((c ^ ripple) >> 2) / low);
  }
}

}  // namespace

SurrogateValue brute_force_eval(SurrogateKind kind, std::span<const Real> s,
                                const Labeling& y, int k) {
  require_lengths(s, y, "brute_force_eval");
  const int n = y.size();
  if (n > 20)
    throw std::invalid_argument("brute_force_eval: n = " + std::to_string(n) +
                                " exceeds the enumeration guard (20)");
  const int n_plus = y.cardinality();
  const bool needs_positives = kind == SurrogateKind::kRamp ||
                               kind == SurrogateKind::kMax ||
                               kind == SurrogateKind::kAvg;
  require_k_le(k, needs_positives ? n_plus : n, "brute_force_eval",
               needs_positives ? "n_plus" : "n");

  Mask ybits = 0;
  for (int i = 0; i < n; ++i)
    if (y.is_positive(i)) ybits |= Mask{1} << i;
  const Mask all = (n == 32) ? ~Mask{0} : (Mask{1} << n) - 1;
  const Real pos_sum = mask_score_sum(ybits, s);

  Real best = -std::numeric_limits<Real>::infinity();
  int best_khat = 0;
  auto consider = [&](Real value, int khat) {
    if (value > best) {
      best = value;
      best_khat = khat;
    }
  };

  switch (kind) {
    case SurrogateKind::kStruct:
      for_each_subset(all, k, [&](Mask yh) {
        const int mistakes = std::popcount(yh & ~ybits);
        consider(mistakes + mask_score_sum(yh, s) - pos_sum,
                 std::popcount(yh & ybits));
      });
      break;
    case SurrogateKind::kStructScaled:
      for_each_subset(all, k, [&](Mask yh) {
        Real acc = 0.0;
        for (Mask m = yh; m; m &= m - 1) {
          const int i = std::countr_zero(m);
          acc += s[i] / n - (y.is_positive(i) ? 1.0 / k : 0.0);
        }
        consider(1.0 + acc - pos_sum / n, std::popcount(yh & ybits));
      });
      break;
    case SurrogateKind::kRamp: {
      for_each_subset(all, k, [&](Mask yh) {
        const int mistakes = std::popcount(yh & ~ybits);
        consider(mistakes + mask_score_sum(yh, s),
                 std::popcount(yh & ybits));
      });
      Real second = -std::numeric_limits<Real>::infinity();
      for_each_subset(ybits, k, [&](Mask yt) {
        second = std::max(second, mask_score_sum(yt, s));
      });
      best -= second;
      break;
    }
    case SurrogateKind::kAvg:
      for_each_subset(all, k, [&](Mask yh) {
        const int kk = std::popcount(yh & ybits);
        const int mistakes = k - kk;
        const Real inv_c =
            (n_plus == k) ? 0.0
                          : static_cast<Real>(n_plus - k) / (n_plus - kk);
        consider(mistakes + mask_score_sum(yh, s) - pos_sum +
                     inv_c * mask_score_sum(ybits & ~yh, s),
                 kk);
      });
      break;
    case SurrogateKind::kMax:
      for_each_subset(all, k, [&](Mask yh) {
        const int kk = std::popcount(yh & ybits);
        const Real base =
            (k - kk) + mask_score_sum(yh, s) - pos_sum;
        Real inner = -std::numeric_limits<Real>::infinity();
        for_each_subset(ybits & ~yh, n_plus - k, [&](Mask yt) {
          inner = std::max(inner, mask_score_sum(yt, s));
        });
        consider(base + inner, kk);
      });
      break;
  }

  SurrogateValue out;
  out.value = best;
  out.argmax_khat = best_khat;
  return out;
}

SurrogateValue normalize(SurrogateValue v, int k) {
  if (k < 1) throw std::invalid_argument("normalize: k must be positive");
  v.value /= k;
  v.normalized = true;
  return v;
}

}  // namespace preck
