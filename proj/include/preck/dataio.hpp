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

#ifndef PRECK_DATAIO_HPP_
#define PRECK_DATAIO_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "preck/core.hpp"

namespace preck {

struct Dataset {
  std::vector<LabeledPoint> points;
  int dim = 0;  // max feature index + 1
  int n_plus = 0;

  int size() const { return static_cast<int>(points.size()); }
};

struct SplitSpec {
  Real train_fraction = 0.7;  // must lie in (0,1)
  std::uint64_t seed = 0;
  int repeats = 1;
};

/// Parses LIBSVM/SVMlight text: one point per line as
/// "<label> idx:val idx:val ...", labels +1/1 -> 1 and -1/0 -> 0, feature
/// indices 1-based and strictly ascending, '#' starting a comment.  Zero
/// values are dropped to keep vectors canonical.  Throws std::runtime_error
/// naming the offending line on malformed input.
Dataset parse_libsvm(std::istream& in);
Dataset parse_libsvm(const std::string& text);
Dataset load_libsvm_file(const std::string& path);

/// Writes the dataset back in LIBSVM format (labels +1/-1, 1-based indices,
/// values with enough digits to round-trip).
void serialize_libsvm(const Dataset& ds, std::ostream& out);
std::string serialize_libsvm(const Dataset& ds);

/// Seeded uniform shuffle, then the first ceil(fraction * n) points form the
/// train side.  Deterministic per (spec.seed, repeat_index).  Throws on an
/// empty dataset or a fraction outside (0,1).
std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec,
                                  int repeat_index);

/// Seeded shuffle for the given pass, then consecutive chunks of size b (the
/// last chunk may be short).  Throws unless b >= 1.
std::vector<Batch> batcher(const Dataset& ds, int b, std::uint64_t seed,
                           int pass_index);

// Convenience: a dataset from batch points / a single-batch view of a dataset.
Dataset dataset_from_batch(const Batch& batch);
Batch batch_from_dataset(const Dataset& ds);

/// Rescales features so the maximum point norm equals target_norm (no-op on
/// all-zero data).  Used to pin the feature radius for bound audits.
Dataset rescale_to_max_norm(const Dataset& ds, Real target_norm);

}  // namespace preck

#endif  // PRECK_DATAIO_HPP_
