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

#include "preck/margins.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace preck {

namespace {

struct ClassSplit {
  std::vector<Real> pos;  // descending
  std::vector<Real> neg;  // descending
};

ClassSplit split_sorted(std::span<const Real> s, const Labeling& y,
                        const char* who) {
  if (static_cast<int>(s.size()) != y.size())
    throw std::invalid_argument(std::string(who) + ": length mismatch");
  ClassSplit cs;
  for (int i = 0; i < y.size(); ++i)
    (y.is_positive(i) ? cs.pos : cs.neg).push_back(s[i]);
  std::sort(cs.pos.begin(), cs.pos.end(), std::greater<Real>());
  std::sort(cs.neg.begin(), cs.neg.end(), std::greater<Real>());
  return cs;
}

void require_gamma(Real gamma, const char* who) {
  if (!(gamma > 0.0))
    throw std::invalid_argument(std::string(who) + ": gamma must be > 0");
}

MarginReport report_from(Real achieved, Real gamma) {
  MarginReport r;
  r.slack = achieved - gamma;
  r.satisfied = r.slack >= 0.0;
  return r;
}

}  // namespace

std::string to_string(MarginKind kind) {
  switch (kind) {
    case MarginKind::kWeak: return "weak";
    case MarginKind::kMid: return "mid";
    case MarginKind::kStrong: return "strong";
  }
  return "unknown";
}

MarginReport check_weak_margin(std::span<const Real> s, const Labeling& y,
                               int k, Real gamma) {
  require_gamma(gamma, "check_weak_margin");
  const auto cs = split_sorted(s, y, "check_weak_margin");
  if (cs.neg.empty())
    throw std::invalid_argument("check_weak_margin: no negative points");
  if (k < 1 || k > static_cast<int>(cs.pos.size()))
    throw std::invalid_argument("check_weak_margin: need n_plus >= k >= 1");
  // The best witness set of k positives is the top-k scored ones.
  return report_from(cs.pos[k - 1] - cs.neg.front(), gamma);
}

MarginReport check_mid_margin(std::span<const Real> s, const Labeling& y,
                              int k, Real gamma) {
  require_gamma(gamma, "check_mid_margin");
  const auto cs = split_sorted(s, y, "check_mid_margin");
  if (cs.neg.empty())
    throw std::invalid_argument("check_mid_margin: no negative points");
  const int n_plus = static_cast<int>(cs.pos.size());
  if (k < 1 || k > n_plus)
    throw std::invalid_argument("check_mid_margin: need n_plus >= k >= 1");
  // The universal quantifier binds at the lowest-scored positive subset.
  const int m = n_plus - k + 1;
  Real sum = 0.0;
  for (int i = n_plus - m; i < n_plus; ++i) sum += cs.pos[i];
  return report_from(sum / m - cs.neg.front(), gamma);
}

MarginReport check_strong_margin(std::span<const Real> s, const Labeling& y,
                                 Real gamma) {
  require_gamma(gamma, "check_strong_margin");
  const auto cs = split_sorted(s, y, "check_strong_margin");
  if (cs.pos.empty() || cs.neg.empty())
    throw std::invalid_argument(
        "check_strong_margin: both classes must be non-empty");
  return report_from(cs.pos.back() - cs.neg.front(), gamma);
}

MarginReport check_margin(const MarginSpec& spec, std::span<const Real> s,
                          const Labeling& y) {
  switch (spec.kind) {
    case MarginKind::kWeak:
      return check_weak_margin(s, y, spec.k, spec.gamma);
    case MarginKind::kMid:
      return check_mid_margin(s, y, spec.k, spec.gamma);
    case MarginKind::kStrong:
      return check_strong_margin(s, y, spec.gamma);
  }
  throw std::invalid_argument("check_margin: unknown kind");
}

namespace {

// Planted score levels for one dataset: each point gets (level, label).
struct PlantedPoint {
  Real level;
  int label;
};

using Rng = std::mt19937_64;

Real uniform(Rng& rng, Real lo, Real hi) {
  if (hi <= lo) return lo;
  return std::uniform_real_distribution<Real>(lo, hi)(rng);
}

// The tiny headroom added to constructed levels keeps the checker's
// floating-point slack from landing a rounding error below zero.
constexpr Real kSlackBump = 1e-7;

std::vector<PlantedPoint> plant_levels(const MarginSpec& spec, int n,
                                       int n_plus, Real radius, Rng& rng) {
  const Real gamma = spec.gamma;
  const int n_minus = n - n_plus;
  const Real bump =
      std::max(0.0, std::min(kSlackBump * radius, (2.0 * radius - gamma) / 4));
  std::vector<PlantedPoint> pts;
  pts.reserve(n);

  auto push_band = [&](int count, int label, Real lo, Real hi, Real first) {
    for (int i = 0; i < count; ++i)
      pts.push_back({i == 0 ? first : uniform(rng, lo, hi), label});
  };

  const bool strong_like =
      spec.kind == MarginKind::kStrong ||
      (spec.kind == MarginKind::kMid && spec.k == n_plus);
  if (strong_like) {
    // Mid with k == n_plus degenerates to the strong condition.
    const Real band = std::max(0.0, std::min(0.1 * radius,
                                             radius - gamma / 2 - bump));
    push_band(n_minus, 0, -gamma / 2 - band, -gamma / 2, -gamma / 2);
    push_band(n_plus, 1, gamma / 2 + bump, gamma / 2 + bump + band,
              gamma / 2 + bump);
    return pts;
  }

  // Keep the band widths inside the score budget as gamma approaches the
  // 2 * radius limit.

  const Real neg_band =
      std::max(0.0, std::min(0.05 * (2.0 * radius - gamma),
                             2.0 * radius - gamma - 2.0 * bump));
  const Real m = -radius + neg_band;  // top of the negative score band

  if (spec.kind == MarginKind::kWeak) {
    const int k = spec.k;
    const int q = n_plus - k;  // stragglers buried in the negative band
    const Real top_lo = m + gamma + bump;
    if (top_lo > radius)
      throw std::invalid_argument(
          "generate_margin_dataset: weak margin infeasible, needs gamma <= " +
          std::to_string(2.0 * radius - neg_band));
    const Real top_hi = std::min(radius, top_lo + 0.1 * radius);
    push_band(n_minus, 0, -radius, m, m);
    push_band(k, 1, top_lo, top_hi, top_lo);
    // First straggler pinned to the band floor so the mid margin provably
    // fails; the rest mix with the negatives.
    push_band(q, 1, -radius, m, -radius);
    return pts;
  }

  // Mid: one violator positive low in the negative band when the score
  // budget allows, high positives raised just enough that the lowest
  // (n_plus - k + 1)-average still clears the margin.
  const int k = spec.k;
  const int q = n_plus - k;
  auto high_floor = [&](Real violator) {
    return m + gamma + (m + gamma - violator) / q + bump;
  };
  Real violator = m - 0.5 * neg_band;
  Real high_lo = high_floor(violator);
  if (high_lo > radius) {
    violator = m;
    high_lo = high_floor(violator);
  }
  if (high_lo > radius) {
    // Tight budget (gamma close to 2 * radius): raise the violator instead;
    // the strong-margin failure certificate is no longer available.
    high_lo = radius;
    violator = (q + 1) * (m + gamma) - q * radius + bump;
    if (violator > radius)
      throw std::invalid_argument(
          "generate_margin_dataset: mid margin infeasible for gamma = " +
          std::to_string(gamma) + ", radius = " + std::to_string(radius));
  }
  const Real high_hi = std::max(high_lo, std::min(radius, high_lo + 0.1 * radius));
  push_band(n_minus, 0, -radius, m, m);
  push_band(n_plus - 1, 1, high_lo, high_hi, high_lo);
  pts.push_back({violator, 1});
  return pts;
}

}  // namespace

MarginDataset generate_margin_dataset(const MarginSpec& spec, int n,
                                      int n_plus, int dim, std::uint64_t seed,
                                      Real feature_radius) {
  if (n < 2 || n_plus < 1 || n_plus > n - 1)
    throw std::invalid_argument(
        "generate_margin_dataset: need n >= 2 and 1 <= n_plus <= n - 1");
  if (dim < 2)
    throw std::invalid_argument("generate_margin_dataset: need dim >= 2");
  if (!(spec.gamma > 0.0) || !(feature_radius > 0.0))
    throw std::invalid_argument(
        "generate_margin_dataset: gamma and radius must be positive");
  if (spec.gamma > 2.0 * feature_radius)
    throw std::invalid_argument(
        "generate_margin_dataset: gamma > 2 * radius cannot be realized with "
        "unit-norm weights");
  if (spec.kind != MarginKind::kStrong && (spec.k < 1 || spec.k > n_plus))
    throw std::invalid_argument(
        "generate_margin_dataset: need 1 <= k <= n_plus");

  Rng rng(mix_seed(seed, 0x9a6c));
  auto levels = plant_levels(spec, n, n_plus, feature_radius, rng);
  std::shuffle(levels.begin(), levels.end(), rng);

  Real max_norm = 0.0;
  std::vector<LabeledPoint> points;
  points.reserve(n);
  for (const auto& pp : levels) {
    std::vector<FeatureEntry> entries;
    if (pp.level != 0.0) entries.push_back({0, pp.level});
    // Noise orthogonal to the planted axis, kept inside the norm budget.
    const Real headroom2 =
        feature_radius * feature_radius - pp.level * pp.level;
    const Real budget =
        headroom2 > 0.0 ? std::sqrt(headroom2) : 0.0;
    const Real target = std::min(0.2 * feature_radius, 0.9 * budget);
    if (target > 0.0 && dim > 1) {
      std::vector<Real> noise(dim - 1);
      Real norm2 = 0.0;
      for (auto& v : noise) {
        v = uniform(rng, -1.0, 1.0);
        norm2 += v * v;
      }
      if (norm2 > 0.0) {
        const Real scale = target * uniform(rng, 0.2, 1.0) / std::sqrt(norm2);
        for (int j = 0; j < dim - 1; ++j)
          if (noise[j] != 0.0) entries.push_back({j + 1, noise[j] * scale});
      }
    }
    LabeledPoint p{SparseVector(std::move(entries), dim), pp.label};
    max_norm = std::max(max_norm, p.x.norm());
    points.push_back(std::move(p));
  }

  MarginDataset out{Batch::from_points(std::move(points), dim),
                    LinearModel(dim), max_norm};
  out.model.mutable_weights()[0] = 1.0;

  const auto s = score_batch(out.model, out.batch);
  const auto y = Labeling::of_batch(out.batch);
  const auto report = check_margin(spec, s, y);
  if (!report.satisfied)
    throw std::logic_error(
        "generate_margin_dataset: self-check failed, planted slack = " +
        std::to_string(report.slack));
  return out;
}

}  // namespace preck
