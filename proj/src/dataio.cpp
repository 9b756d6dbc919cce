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

#include "preck/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace preck {

namespace {

struct RawPoint {
  int label;
  std::vector<FeatureEntry> entries;  // already 0-based
};

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
  throw std::runtime_error("parse_libsvm: line " + std::to_string(line_no) +
                           ": " + what);
}

int parse_label(const std::string& tok, int line_no) {
  if (tok == "+1" || tok == "1") return 1;
  if (tok == "-1" || tok == "0") return 0;
  parse_fail(line_no, "unknown label token '" + tok + "'");
}

}  // namespace

Dataset parse_libsvm(std::istream& in) {
  std::vector<RawPoint> raw;
  int dim = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank or comment-only line

    RawPoint p;
    p.label = parse_label(tok, line_no);
    int prev_index = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 ||
          colon + 1 == tok.size())
        parse_fail(line_no, "malformed feature '" + tok + "'");
      int index = 0;
      double value = 0.0;
      try {
        std::size_t used = 0;
        index = std::stoi(tok.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("trailing");
        value = std::stod(tok.substr(colon + 1), &used);
        if (used != tok.size() - colon - 1)
          throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        parse_fail(line_no, "malformed feature '" + tok + "'");
      }
      if (index < 1) parse_fail(line_no, "feature index must be >= 1");
      if (index <= prev_index)
        parse_fail(line_no, "feature indices must be strictly ascending");
      if (!std::isfinite(value))
        parse_fail(line_no, "non-finite feature value");
      prev_index = index;
      dim = std::max(dim, index);
      if (value != 0.0) p.entries.push_back({index - 1, value});
    }
    raw.push_back(std::move(p));
  }

  Dataset ds;
  ds.dim = dim;
  ds.points.reserve(raw.size());
  for (auto& p : raw) {
    ds.n_plus += p.label;
    ds.points.push_back({SparseVector(std::move(p.entries), dim), p.label});
  }
  return ds;
}

Dataset parse_libsvm(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in);
}

Dataset load_libsvm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  return parse_libsvm(in);
}

void serialize_libsvm(const Dataset& ds, std::ostream& out) {
  char buf[64];
  for (const auto& p : ds.points) {
    out << (p.y == 1 ? "+1" : "-1");
    for (const auto& e : p.x.entries()) {
      std::snprintf(buf, sizeof(buf), "%.17g", e.value);
      out << ' ' << (e.index + 1) << ':' << buf;
    }
    out << '\n';
  }
}

std::string serialize_libsvm(const Dataset& ds) {
  std::ostringstream out;
  serialize_libsvm(ds, out);
  return out.str();
}

std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec,
                                  int repeat_index) {
  if (ds.points.empty()) throw std::invalid_argument("split: empty dataset");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw std::invalid_argument("split: train_fraction must lie in (0,1)");

  std::vector<int> perm(ds.points.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(
      mix_seed(spec.seed, 0x5917 + static_cast<std::uint64_t>(repeat_index)));
  std::shuffle(perm.begin(), perm.end(), rng);

  const int n = ds.size();
  const int n_train = std::min(
      n, std::max(1, static_cast<int>(
                         std::ceil(spec.train_fraction * n - 1e-9))));

  auto take = [&](int lo, int hi) {
    Dataset part;
    part.dim = ds.dim;
    part.points.reserve(hi - lo);
    for (int i = lo; i < hi; ++i) {
      part.points.push_back(ds.points[perm[i]]);
      part.n_plus += ds.points[perm[i]].y;
    }
    return part;
  };
  return {take(0, n_train), take(n_train, n)};
}

std::vector<Batch> batcher(const Dataset& ds, int b, std::uint64_t seed,
                           int pass_index) {
  if (b < 1) throw std::invalid_argument("batcher: b must be >= 1");
  std::vector<int> perm(ds.points.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(
      mix_seed(seed, 0xba7c + static_cast<std::uint64_t>(pass_index)));
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<Batch> batches;
  for (std::size_t lo = 0; lo < perm.size(); lo += b) {
    const std::size_t hi = std::min(perm.size(), lo + b);
    std::vector<LabeledPoint> pts;
    pts.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) pts.push_back(ds.points[perm[i]]);
    batches.push_back(Batch::from_points(std::move(pts), ds.dim));
  }
  return batches;
}

Dataset dataset_from_batch(const Batch& batch) {
  Dataset ds;
  ds.dim = batch.dim();
  ds.n_plus = batch.n_plus();
  ds.points = batch.points();
  return ds;
}

Batch batch_from_dataset(const Dataset& ds) {
  return Batch::from_points(ds.points, ds.dim);
}

Dataset rescale_to_max_norm(const Dataset& ds, Real target_norm) {
  if (!(target_norm > 0.0))
    throw std::invalid_argument("rescale_to_max_norm: target must be > 0");
  Real max_norm = 0.0;
  for (const auto& p : ds.points) max_norm = std::max(max_norm, p.x.norm());
  if (max_norm == 0.0) return ds;
  const Real scale = target_norm / max_norm;
  Dataset out;
  out.dim = ds.dim;
  out.n_plus = ds.n_plus;
  out.points.reserve(ds.points.size());
  for (const auto& p : ds.points) {
    std::vector<FeatureEntry> entries = p.x.entries();
    for (auto& e : entries) e.value *= scale;
    out.points.push_back({SparseVector(std::move(entries), ds.dim), p.y});
  }
  return out;
}

}  // namespace preck
