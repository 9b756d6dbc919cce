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

#include "preck/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "preck/metrics.hpp"

namespace preck::harness {

namespace {

using Rng = std::mt19937_64;

Real uniform(Rng& rng, Real lo, Real hi) {
  return std::uniform_real_distribution<Real>(lo, hi)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::string fmt9(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// Runs fn(0..n_units) on up to `workers` threads; exceptions are re-thrown
// on the calling thread in unit order.
void parallel_for(int n_units, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n_units));
  if (workers == 1) {
    for (int i = 0; i < n_units; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(n_units);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n_units; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

ExperimentRow run_unit(const Dataset& ds, const RunSpec& spec, int repeat,
                       LinearModel* model_out) {
  SplitSpec split_spec{spec.train_fraction, spec.seed, spec.splits};
  auto [train_ds, test_ds] = split(ds, split_spec, repeat);
  if (train_ds.size() == 0 || test_ds.size() == 0)
    throw std::runtime_error("run_train: degenerate train/test split");
  if (test_ds.n_plus < 1)
    throw std::runtime_error(
        "run_train: held-out split has no positives to evaluate");

  // Stream and pass order depend only on (seed, repeat), so every method
  // sees identical data schedules.
  const auto stream =
      batcher(train_ds, spec.b, mix_seed(spec.seed, 0xb000 + repeat), 0);
  LearnerConfig config;
  config.method = spec.method;
  config.k_spec = spec.k_spec;
  config.passes = spec.passes;
  config.eta0 = spec.eta0;
  config.radius = spec.radius;
  config.seed = mix_seed(spec.seed, 0xc000 + repeat);

  const auto t0 = std::chrono::steady_clock::now();
  const TrainReport report = train(config, stream);
  const Real seconds =
      std::chrono::duration<Real>(std::chrono::steady_clock::now() - t0)
          .count();

  const LinearModel& model = report.returned_model();
  const Batch test_batch = batch_from_dataset(test_ds);
  const auto scores = score_batch(model, test_batch);
  const auto labels = Labeling::of_batch(test_batch);
  const int k_test = spec.k_spec.resolve(test_ds.n_plus);
  const Real loss =
      static_cast<Real>(prec_at_k(scores, labels, k_test)) / k_test;

  ExperimentRow row;
  row.method = to_string(spec.method);
  row.dataset = spec.dataset_name;
  row.k_spec = spec.k_spec.to_string();
  row.b = spec.b;
  row.repeat = repeat;
  row.train_time_s = seconds;
  row.test_prec_loss = loss;
  row.test_prec_accuracy = 1.0 - loss;
  row.cumulative_mistakes = report.cumulative;
  if (spec.margin) row.bound_value = spec.margin->bound();
  if (model_out) *model_out = model;
  return row;
}

}  // namespace

TrainOutput run_train(const Dataset& ds, const RunSpec& spec) {
  if (spec.splits < 1)
    throw std::invalid_argument("run_train: splits must be >= 1");
  TrainOutput out;
  out.rows.resize(spec.splits);
  parallel_for(spec.splits, spec.workers, [&](int r) {
    out.rows[r] = run_unit(ds, spec, r, r == 0 ? &out.model : nullptr);
  });
  return out;
}

BenchResult run_bench(const Dataset& ds, const BenchSpec& spec) {
  if (spec.methods.empty())
    throw std::invalid_argument("run_bench: no methods given");
  if (spec.batch_lens.empty())
    throw std::invalid_argument("run_bench: no batch lengths given");
  const int repeats = spec.base.splits;

  struct Unit {
    Method method;
    int b;
    int repeat;
  };
  std::vector<Unit> units;
  for (Method m : spec.methods)
    for (int b : spec.batch_lens)
      for (int r = 0; r < repeats; ++r) units.push_back({m, b, r});

  BenchResult result;
  result.rows.resize(units.size());
  parallel_for(static_cast<int>(units.size()), spec.base.workers, [&](int i) {
    RunSpec rs = spec.base;
    rs.method = units[i].method;
    rs.b = units[i].b;
    result.rows[i] = run_unit(ds, rs, units[i].repeat, nullptr);
  });

  if (spec.batch_lens.size() > 1) {
    for (Method m : spec.methods) {
      Real max_acc = -std::numeric_limits<Real>::infinity();
      Real min_acc = std::numeric_limits<Real>::infinity();
      for (int b : spec.batch_lens) {
        Real acc = 0.0;
        int count = 0;
        for (const auto& row : result.rows)
          if (row.method == to_string(m) && row.b == b) {
            acc += row.test_prec_accuracy;
            ++count;
          }
        acc /= std::max(1, count);
        max_acc = std::max(max_acc, acc);
        min_acc = std::min(min_acc, acc);
      }
      const Real variation =
          (max_acc - min_acc) / std::max(std::abs(max_acc), Real{1e-12});
      if (variation >= 0.05)
        result.warnings.push_back(
            to_string(m) + ": mean accuracy varies by " +
            fmt9(100.0 * variation) + "% across batch lengths");
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::string csv_header() {
  return "method,dataset,k_spec,b,repeat,train_time_s,test_prec_loss,"
         "test_prec_accuracy,cumulative_mistakes,bound_value";
}

void write_csv(std::ostream& out, std::span<const ExperimentRow> rows) {
  out << csv_header() << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << r.dataset << ',' << r.k_spec << ',' << r.b << ','
        << r.repeat << ',' << fmt9(r.train_time_s) << ','
        << fmt9(r.test_prec_loss) << ',' << fmt9(r.test_prec_accuracy) << ','
        << r.cumulative_mistakes << ','
        << (r.bound_value ? fmt9(*r.bound_value) : "") << '\n';
  }
}

std::vector<ExperimentRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_header())
    throw std::runtime_error("parse_csv: missing or unexpected header");
  std::vector<ExperimentRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 10)
      throw std::runtime_error("parse_csv: expected 10 fields, got " +
                               std::to_string(fields.size()));
    ExperimentRow r;
    r.method = fields[0];
    r.dataset = fields[1];
    r.k_spec = fields[2];
    r.b = std::stoi(fields[3]);
    r.repeat = std::stoi(fields[4]);
    r.train_time_s = std::stod(fields[5]);
    r.test_prec_loss = std::stod(fields[6]);
    r.test_prec_accuracy = std::stod(fields[7]);
    r.cumulative_mistakes = std::stoll(fields[8]);
    if (!fields[9].empty()) r.bound_value = std::stod(fields[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

void save_model(const LinearModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << "preck-model 1\n" << model.dim() << '\n';
  char buf[40];
  for (Real w : model.weights()) {
    std::snprintf(buf, sizeof(buf), "%.17g", w);
    out << buf << '\n';
  }
}

LinearModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::string magic;
  int version = 0, dim = 0;
  in >> magic >> version >> dim;
  if (magic != "preck-model" || version != 1 || dim < 0 || !in)
    throw std::runtime_error("bad model file: " + path);
  std::vector<Real> w(dim);
  for (auto& v : w)
    if (!(in >> v)) throw std::runtime_error("truncated model file: " + path);
  return LinearModel(std::move(w));
}

// ---------------------------------------------------------------------------
// Counterexample
// ---------------------------------------------------------------------------

CounterexampleReport run_counterexample() {
  const std::vector<Real> xs = {-1.0, -1.0, -2.0, -3.0, -3.0, -3.0};
  const Labeling y(std::vector<std::uint8_t>{1, 1, 1, 0, 0, 0});
  constexpr Real kTol = 1e-9;

  CounterexampleReport rep;
  rep.rows.reserve(301);
  Real best_value = std::numeric_limits<Real>::infinity();
  bool prec_ok = true, dips = false, negative_beyond = true, upper = true;

  for (int iw = -150; iw <= 150; ++iw) {
    const Real w = iw / 10.0;
    std::vector<Real> s(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) s[i] = w * xs[i];

    CounterexampleRow row;
    row.w = w;
    row.struct_scaled =
        brute_force_eval(SurrogateKind::kStructScaled, s, y, 1).value;
    row.ramp = brute_force_eval(SurrogateKind::kRamp, s, y, 1).value;
    row.avg = brute_force_eval(SurrogateKind::kAvg, s, y, 1).value;
    row.max = brute_force_eval(SurrogateKind::kMax, s, y, 1).value;
    row.prec1 = prec_at_k(s, y, 1);
    rep.rows.push_back(row);

    if (row.struct_scaled < best_value) {
      best_value = row.struct_scaled;
      rep.argmin_w = w;
    }
    if (iw > 0 && row.prec1 != 0) prec_ok = false;
    if (iw < 0 && row.prec1 != 1) prec_ok = false;
    if (row.struct_scaled < row.prec1 - kTol) dips = true;
    if (iw < -60 && !(row.struct_scaled < 0.0)) negative_beyond = false;
    if (row.ramp < row.prec1 - kTol || row.avg < row.prec1 - kTol ||
        row.max < row.prec1 - kTol)
      upper = false;
  }

  rep.argmin_negative = rep.argmin_w < 0.0;
  rep.prec_pattern_ok = prec_ok;
  rep.dips_below_prec = dips;
  rep.negative_beyond = negative_beyond;
  rep.upper_bounds_hold = upper;
  return rep;
}

// ---------------------------------------------------------------------------
// Property verification
// ---------------------------------------------------------------------------

namespace {

struct Failure {
  bool failed = false;
  std::string detail;
};

// Random score/label instance used by the seeded sweeps.  Half of the draws
// use a coarse score grid so that exact ties are exercised.
struct Instance {
  std::vector<Real> s;
  Labeling y;
};

Instance random_instance(Rng& rng, int n_min, int n_max, bool need_negative) {
  const int n = uniform_int(rng, n_min, n_max);
  std::vector<std::uint8_t> bits(n);
  while (true) {
    const Real p = uniform(rng, 0.2, 0.8);
    int ones = 0;
    for (auto& b : bits) {
      b = uniform(rng, 0.0, 1.0) < p ? 1 : 0;
      ones += b;
    }
    if (ones >= 1 && (!need_negative || ones < n)) break;
  }
  std::vector<Real> s(n);
  if (uniform_int(rng, 0, 1) == 0) {
    for (auto& v : s) v = uniform(rng, -1.0, 1.0);
  } else {
    for (auto& v : s) v = 0.5 * uniform_int(rng, -2, 2);
  }
  return {std::move(s), Labeling(std::move(bits))};
}

std::string describe_instance(std::span<const Real> s, const Labeling& y,
                              int k) {
  std::ostringstream os;
  os << "n=" << y.size() << " k=" << k << " y=";
  for (int i = 0; i < y.size(); ++i) os << (y.is_positive(i) ? '1' : '0');
  os << " s=[";
  for (std::size_t i = 0; i < s.size(); ++i)
    os << (i ? "," : "") << fmt9(s[i]);
  os << "]";
  return os.str();
}

// Fills scores for one (n, labeling_mask, draw) cell of the exhaustive sweep.
void sweep_scores(std::uint64_t seed, int n, std::uint32_t ymask, int draw,
                  std::vector<Real>& s) {
  Rng rng(mix_seed(seed, (static_cast<std::uint64_t>(n) << 40) ^
                             (static_cast<std::uint64_t>(ymask) << 4) ^
                             static_cast<std::uint64_t>(draw)));
  s.resize(n);
  if (draw == 0) {
    for (auto& v : s) v = uniform(rng, -1.0, 1.0);
  } else {
    for (auto& v : s) v = 0.5 * uniform_int(rng, -2, 2);
  }
}

constexpr SurrogateKind kAllKinds[] = {
    SurrogateKind::kStruct, SurrogateKind::kStructScaled,
    SurrogateKind::kRamp, SurrogateKind::kMax, SurrogateKind::kAvg};

// Exhaustive oracle-equivalence and hierarchy sweep over every labeling of
// every n <= max_n, two score draws each, every feasible k.
void run_exhaustive_sweep(const VerifyOptions& opt,
                          const SurrogateEvalFn& evaluate,
                          PropertyResult* oracle_result,
                          PropertyResult* hierarchy_result) {
  std::atomic<long long> oracle_checked{0};
  std::atomic<long long> hierarchy_checked{0};
  std::atomic<bool> stop{false};
  std::mutex failure_mutex;
  Failure oracle_failure, hierarchy_failure;

  for (int n = 1; n <= opt.max_n && !stop.load(); ++n) {
    const std::uint32_t mask_count = 1u << n;
    const int chunks = std::max(1, opt.workers * 4);
    const std::uint32_t chunk =
        std::max<std::uint32_t>(1, mask_count / chunks);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> ranges;
    for (std::uint32_t lo = 0; lo < mask_count; lo += chunk)
      ranges.emplace_back(lo, std::min(mask_count, lo + chunk));

    parallel_for(static_cast<int>(ranges.size()), opt.workers, [&](int ri) {
      long long local_oracle = 0, local_hierarchy = 0;
      std::vector<Real> s;
      for (std::uint32_t ymask = ranges[ri].first;
           ymask < ranges[ri].second && !stop.load(); ++ymask) {
        std::vector<std::uint8_t> bits(n);
        for (int i = 0; i < n; ++i) bits[i] = (ymask >> i) & 1u;
        const Labeling y(std::move(bits));
        const int n_plus = y.cardinality();

        for (int draw = 0; draw < 2; ++draw) {
          sweep_scores(opt.seed, n, ymask, draw, s);
          for (SurrogateKind kind : kAllKinds) {
            const bool needs_pos = kind == SurrogateKind::kRamp ||
                                   kind == SurrogateKind::kMax ||
                                   kind == SurrogateKind::kAvg;
            const int k_max = needs_pos ? n_plus : n;
            for (int k = 1; k <= k_max; ++k) {
              const Real efficient = evaluate(kind, s, y, k).value;
              const Real oracle = brute_force_eval(kind, s, y, k).value;
              ++local_oracle;
              if (std::abs(efficient - oracle) > 1e-9) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!oracle_failure.failed) {
                  oracle_failure.failed = true;
                  oracle_failure.detail =
                      to_string(kind) + " draw=" + std::to_string(draw) +
                      " efficient=" + fmt9(efficient) + " oracle=" +
                      fmt9(oracle) + " at " + describe_instance(s, y, k);
                }
                stop.store(true);
              }
            }
          }
          for (int k = 1; k <= n_plus; ++k) {
            const Real prec = prec_at_k(s, y, k);
            const Real ramp = evaluate(SurrogateKind::kRamp, s, y, k).value;
            const Real avg = evaluate(SurrogateKind::kAvg, s, y, k).value;
            const Real mx = evaluate(SurrogateKind::kMax, s, y, k).value;
            ++local_hierarchy;
            if (ramp < prec - 1e-9 || avg < ramp - 1e-9 || mx < avg - 1e-9) {
              std::lock_guard<std::mutex> lock(failure_mutex);
              if (!hierarchy_failure.failed) {
                hierarchy_failure.failed = true;
                hierarchy_failure.detail =
                    "prec=" + fmt9(prec) + " ramp=" + fmt9(ramp) + " avg=" +
                    fmt9(avg) + " max=" + fmt9(mx) + " at " +
                    describe_instance(s, y, k);
              }
              stop.store(true);
            }
          }
        }
      }
      oracle_checked += local_oracle;
      hierarchy_checked += local_hierarchy;
    });
  }

  oracle_result->name = "oracle-equivalence";
  oracle_result->passed = !oracle_failure.failed;
  oracle_result->checked = oracle_checked.load();
  oracle_result->detail = oracle_failure.detail;

  hierarchy_result->name = "surrogate-hierarchy";
  hierarchy_result->passed = !hierarchy_failure.failed;
  hierarchy_result->checked = hierarchy_checked.load();
  hierarchy_result->detail = hierarchy_failure.detail;
}

// Seeded random hierarchy instances with n up to 64, folded into the
// hierarchy property result.
void run_random_hierarchy(const VerifyOptions& opt,
                          const SurrogateEvalFn& evaluate,
                          PropertyResult* hierarchy_result) {
  if (!hierarchy_result->passed) return;
  const int workers = std::max(1, opt.workers);
  const long long total = opt.hierarchy_instances;
  std::atomic<long long> checked{0};
  std::mutex failure_mutex;
  Failure failure;

  parallel_for(workers, workers, [&](int wi) {
    Rng rng(mix_seed(opt.seed, 0x41e2 + wi));
    const long long share = total / workers + (wi < total % workers ? 1 : 0);
    long long local = 0;
    for (long long i = 0; i < share && !failure.failed; ++i) {
      const Instance inst = random_instance(rng, 2, 64, false);
      const int k = uniform_int(rng, 1, inst.y.cardinality());
      const Real prec = prec_at_k(inst.s, inst.y, k);
      const Real ramp =
          evaluate(SurrogateKind::kRamp, inst.s, inst.y, k).value;
      const Real avg = evaluate(SurrogateKind::kAvg, inst.s, inst.y, k).value;
      const Real mx = evaluate(SurrogateKind::kMax, inst.s, inst.y, k).value;
      ++local;
      if (ramp < prec - 1e-9 || avg < ramp - 1e-9 || mx < avg - 1e-9) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure.failed) {
          failure.failed = true;
          failure.detail = "prec=" + fmt9(prec) + " ramp=" + fmt9(ramp) +
                           " avg=" + fmt9(avg) + " max=" + fmt9(mx) + " at " +
                           describe_instance(inst.s, inst.y, k);
        }
      }
    }
    checked += local;
  });

  hierarchy_result->checked += checked.load();
  if (failure.failed) {
    hierarchy_result->passed = false;
    hierarchy_result->detail = failure.detail;
  }
}

PropertyResult verify_consistency_at_zero(const VerifyOptions& opt) {
  PropertyResult result;
  result.name = "consistency-at-zero";
  result.passed = true;
  Rng rng(mix_seed(opt.seed, 0xc025));
  const MarginKind kinds[] = {MarginKind::kWeak, MarginKind::kMid,
                              MarginKind::kStrong};
  for (MarginKind kind : kinds) {
    for (int i = 0; i < opt.consistency_instances; ++i) {
      const int n = uniform_int(rng, 6, 36);
      const int n_plus = uniform_int(rng, 2, n - 2);
      const int k = uniform_int(rng, 1, n_plus);
      const int dim = uniform_int(rng, 2, 8);
      MarginSpec spec{kind, k, 1.0};
      const auto data = generate_margin_dataset(
          spec, n, n_plus, dim, mix_seed(opt.seed, 0xd000 + i), 1.0);
      const auto s = score_batch(data.model, data.batch);
      const auto y = Labeling::of_batch(data.batch);
      Real value = 0.0;
      switch (kind) {
        case MarginKind::kWeak: value = eval_ramp(s, y, k).value; break;
        case MarginKind::kMid: value = eval_avg(s, y, k).value; break;
        case MarginKind::kStrong: value = eval_max(s, y, k).value; break;
      }
      ++result.checked;
      if (std::abs(value) > 1e-9) {
        result.passed = false;
        result.detail = to_string(kind) + "-margin instance " +
                        std::to_string(i) + " has surrogate value " +
                        fmt9(value) + " at " + describe_instance(s, y, k);
        return result;
      }
    }
  }
  return result;
}

struct FdBatch {
  Batch batch;
  LinearModel model;
  int k = 1;
};

// Random dense batch + model with well-separated scores and a unique sweep
// argmax for both surrogates, so central differences are exact.
std::optional<FdBatch> make_fd_batch(Rng& rng) {
  const int n = uniform_int(rng, 6, 14);
  const int dim = uniform_int(rng, 3, 6);
  const int n_plus = uniform_int(rng, 2, n - 2);
  std::vector<LabeledPoint> pts;
  for (int i = 0; i < n; ++i) {
    std::vector<FeatureEntry> entries;
    for (int j = 0; j < dim; ++j) {
      const Real v = uniform(rng, -1.0, 1.0);
      if (v != 0.0) entries.push_back({j, v});
    }
    pts.push_back({SparseVector(std::move(entries), dim), i < n_plus ? 1 : 0});
  }
  std::shuffle(pts.begin(), pts.end(), rng);
  FdBatch out{Batch::from_points(std::move(pts), dim), LinearModel(dim), 1};
  for (auto& w : out.model.mutable_weights()) w = uniform(rng, -1.0, 1.0);
  out.k = uniform_int(rng, 1, n_plus);

  const auto s = score_batch(out.model, out.batch);
  const auto y = Labeling::of_batch(out.batch);
  std::vector<Real> sorted(s.begin(), s.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] - sorted[i - 1] < 1e-3) return std::nullopt;
  for (auto sweep : {avg_sweep_values(s, y, out.k),
                     max_sweep_values(s, y, out.k)}) {
    Real best = -std::numeric_limits<Real>::infinity();
    Real second = best;
    for (const auto& p : sweep) {
      if (p.value > best) {
        second = best;
        best = p.value;
      } else if (p.value > second) {
        second = p.value;
      }
    }
    if (sweep.size() > 1 && best - second < 1e-3) return std::nullopt;
  }
  return out;
}

PropertyResult verify_subgradient_fd(const VerifyOptions& opt) {
  PropertyResult result;
  result.name = "subgradient-finite-difference";
  result.passed = true;
  Rng rng(mix_seed(opt.seed, 0xfd01));
  constexpr Real kStep = 1e-6;

  for (int t = 0; t < opt.fd_triples; ++t) {
    std::optional<FdBatch> fd;
    for (int attempt = 0; attempt < 500 && !fd; ++attempt)
      fd = make_fd_batch(rng);
    if (!fd) {
      result.passed = false;
      result.detail = "could not build a non-degenerate instance";
      return result;
    }
    const auto y = Labeling::of_batch(fd->batch);
    for (bool use_max : {false, true}) {
      const Subgradient g = use_max
                                ? subgradient_max(fd->model, fd->batch, fd->k)
                                : subgradient_avg(fd->model, fd->batch, fd->k);
      for (int j = 0; j < fd->model.dim(); ++j) {
        auto value_at = [&](Real delta) {
          LinearModel m = fd->model;
          m.mutable_weights()[j] += delta;
          const auto s = score_batch(m, fd->batch);
          return use_max ? eval_max(s, y, fd->k).value
                         : eval_avg(s, y, fd->k).value;
        };
        const Real fd_grad =
            (value_at(kStep) - value_at(-kStep)) / (2 * kStep);
        const Real tol = std::max(
            1e-7, 1e-4 * std::max(std::abs(fd_grad), std::abs(g.g[j])));
        ++result.checked;
        if (std::abs(fd_grad - g.g[j]) > tol) {
          result.passed = false;
          result.detail = std::string(use_max ? "max" : "avg") +
                          " coordinate " + std::to_string(j) +
                          ": finite difference " + fmt9(fd_grad) +
                          " vs subgradient " + fmt9(g.g[j]) + " (triple " +
                          std::to_string(t) + ")";
          return result;
        }
      }
    }
  }
  return result;
}

PropertyResult verify_subgradient_first_order(const VerifyOptions& opt) {
  PropertyResult result;
  result.name = "subgradient-first-order";
  result.passed = true;
  Rng rng(mix_seed(opt.seed, 0xf02d));

  for (int t = 0; t < opt.firstorder_pairs; ++t) {
    const int n = uniform_int(rng, 4, 20);
    const int dim = uniform_int(rng, 2, 6);
    const int n_plus = uniform_int(rng, 1, n - 1);
    std::vector<LabeledPoint> pts;
    for (int i = 0; i < n; ++i) {
      std::vector<FeatureEntry> entries;
      for (int j = 0; j < dim; ++j) {
        const Real v = uniform(rng, -1.0, 1.0);
        if (v != 0.0) entries.push_back({j, v});
      }
      pts.push_back(
          {SparseVector(std::move(entries), dim), i < n_plus ? 1 : 0});
    }
    std::shuffle(pts.begin(), pts.end(), rng);
    const Batch batch = Batch::from_points(std::move(pts), dim);
    const auto y = Labeling::of_batch(batch);
    const int k = uniform_int(rng, 1, n_plus);

    LinearModel w(dim), w2(dim);
    for (auto& v : w.mutable_weights()) v = uniform(rng, -2.0, 2.0);
    for (auto& v : w2.mutable_weights()) v = uniform(rng, -2.0, 2.0);

    for (bool use_max : {false, true}) {
      const Subgradient g = use_max ? subgradient_max(w, batch, k)
                                    : subgradient_avg(w, batch, k);
      auto value_of = [&](const LinearModel& m) {
        const auto s = score_batch(m, batch);
        return use_max ? eval_max(s, y, k).value : eval_avg(s, y, k).value;
      };
      Real inner = 0.0;
      for (int j = 0; j < dim; ++j)
        inner += g.g[j] * (w2.weights()[j] - w.weights()[j]);
      ++result.checked;
      if (value_of(w2) < value_of(w) + inner - 1e-9) {
        result.passed = false;
        result.detail = std::string(use_max ? "max" : "avg") +
                        " first-order inequality violated on pair " +
                        std::to_string(t);
        return result;
      }
    }
  }
  return result;
}

PropertyResult verify_margin_hierarchy(const VerifyOptions& opt) {
  PropertyResult result;
  result.name = "margin-hierarchy";
  result.passed = true;
  Rng rng(mix_seed(opt.seed, 0x3a6e));
  const Real gammas[] = {0.25, 0.5, 1.0, 2.0};

  for (long long t = 0; t < opt.margin_hierarchy_instances; ++t) {
    const Instance inst = random_instance(rng, 3, 40, true);
    const int n_plus = inst.y.cardinality();
    const int k = uniform_int(rng, 1, n_plus);
    const Real gamma = gammas[uniform_int(rng, 0, 3)];
    const auto strong = check_strong_margin(inst.s, inst.y, gamma);
    const auto mid = check_mid_margin(inst.s, inst.y, k, gamma);
    const auto weak = check_weak_margin(inst.s, inst.y, k, gamma);
    ++result.checked;
    const bool implications =
        (!strong.satisfied || mid.satisfied) &&
        (!mid.satisfied || weak.satisfied);
    const bool slack_order =
        weak.slack >= mid.slack - 1e-12 && mid.slack >= strong.slack - 1e-12;
    if (!implications || !slack_order) {
      result.passed = false;
      result.detail = "gamma=" + fmt9(gamma) + " strong=" +
                      fmt9(strong.slack) + " mid=" + fmt9(mid.slack) +
                      " weak=" + fmt9(weak.slack) + " at " +
                      describe_instance(inst.s, inst.y, k);
      return result;
    }
  }
  return result;
}

PropertyResult verify_rank_inequality(const VerifyOptions& opt) {
  PropertyResult result;
  result.name = "rank-inequality";
  result.passed = true;
  Rng rng(mix_seed(opt.seed, 0x4a9b));

  for (int t = 0; t < opt.rank_ineq_multisets; ++t) {
    const int n = uniform_int(rng, 1, 10);
    std::vector<Real> xs(n);
    for (auto& v : xs) v = uniform_int(rng, -3, 3);

    // Exhaustive minimum subset mean per subset size.
    std::vector<Real> min_mean(n + 1,
                               std::numeric_limits<Real>::infinity());
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      Real sum = 0.0;
      int size = 0;
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) {
          sum += xs[i];
          ++size;
        }
      min_mean[size] = std::min(min_mean[size], sum / size);
    }
    for (int k = 1; k <= n; ++k)
      for (int k2 = k; k2 <= n; ++k2) {
        ++result.checked;
        if (min_mean[k] > min_mean[k2] + 1e-12) {
          result.passed = false;
          std::ostringstream os;
          os << "multiset [";
          for (int i = 0; i < n; ++i) os << (i ? "," : "") << xs[i];
          os << "] k=" << k << " k'=" << k2 << ": " << fmt9(min_mean[k])
             << " > " << fmt9(min_mean[k2]);
          result.detail = os.str();
          return result;
        }
      }
  }
  return result;
}

PropertyResult verify_mistake_bounds(const VerifyOptions& opt) {
  PropertyResult result;
  result.name = "mistake-bound-audit";
  result.passed = true;
  constexpr int kBatches = 60;
  constexpr int kBatchLen = 30;
  constexpr int kPositives = 8;
  constexpr int kDim = 5;

  struct Setting {
    MarginKind margin;
    Method method;
    SurrogateKind surrogate;
  };
  const Setting settings[] = {
      {MarginKind::kMid, Method::kPerceptronAvg, SurrogateKind::kAvg},
      {MarginKind::kStrong, Method::kPerceptronMax, SurrogateKind::kMax}};

  for (const auto& setting : settings) {
    for (int k : {1, 3}) {
      for (Real gamma : {0.5, 1.0}) {
        for (int seed_i = 0; seed_i < opt.mistake_audit_seeds; ++seed_i) {
          MarginSpec spec{setting.margin, k, gamma};
          std::vector<Batch> stream;
          LinearModel planted;
          for (int t = 0; t < kBatches; ++t) {
            auto data = generate_margin_dataset(
                spec, kBatchLen, kPositives, kDim,
                mix_seed(opt.seed, 0xae00 + 977 * seed_i + t), 1.0);
            planted = data.model;
            stream.push_back(std::move(data.batch));
          }
          LearnerConfig config;
          config.method = setting.method;
          config.k_spec = KSpec::fixed(k);
          config.passes = 1;
          config.seed = mix_seed(opt.seed, 0xaf00 + seed_i);
          const TrainReport report = train(config, stream);

          const Real bound = 4.0 * k / (gamma * gamma);
          Real surrogate_total = 0.0;
          for (const auto& batch : stream)
            surrogate_total +=
                eval_surrogate(setting.surrogate, planted, batch, k).value;
          const Real shape_bound =
              std::pow(std::sqrt(4.0 * k) + std::sqrt(surrogate_total), 2.0);

          ++result.checked;
          if (report.cumulative > bound ||
              report.cumulative > shape_bound + 1e-6) {
            result.passed = false;
            result.detail =
                to_string(setting.method) + " k=" + std::to_string(k) +
                " gamma=" + fmt9(gamma) + " seed=" + std::to_string(seed_i) +
                ": cumulative=" + std::to_string(report.cumulative) +
                " bound=" + fmt9(bound) + " shape=" + fmt9(shape_bound);
            return result;
          }
        }
      }
    }
  }
  return result;
}

}  // namespace

std::vector<PropertyResult> run_verify(const VerifyOptions& options) {
  SurrogateEvalFn evaluate = options.evaluator_override;
  if (!evaluate)
    evaluate = [](SurrogateKind kind, std::span<const Real> s,
                  const Labeling& y, int k) {
      return eval_surrogate(kind, s, y, k);
    };

  std::vector<PropertyResult> results(2);
  run_exhaustive_sweep(options, evaluate, &results[0], &results[1]);
  run_random_hierarchy(options, evaluate, &results[1]);
  results.push_back(verify_consistency_at_zero(options));
  results.push_back(verify_subgradient_fd(options));
  results.push_back(verify_subgradient_first_order(options));
  results.push_back(verify_margin_hierarchy(options));
  results.push_back(verify_rank_inequality(options));
  results.push_back(verify_mistake_bounds(options));
  return results;
}

bool all_passed(std::span<const PropertyResult> results) {
  return std::all_of(results.begin(), results.end(),
                     [](const PropertyResult& r) { return r.passed; });
}

void print_verify_report(std::ostream& out,
                         std::span<const PropertyResult> results) {
  for (const auto& r : results) {
    if (r.passed) {
      out << "PASS " << r.name << " (" << r.checked << " checks)\n";
    } else {
      out << "FAIL " << r.name << ": " << r.detail << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Uniform-convergence decay study
// ---------------------------------------------------------------------------

namespace {

struct UcPopulation {
  std::vector<Real> features;  // row-major population x dim
  Labeling labels;
  int dim = 0;

  Real score(int row, std::span<const Real> w) const {
    Real acc = 0.0;
    const Real* x = features.data() + static_cast<std::size_t>(row) * dim;
    for (int j = 0; j < dim; ++j) acc += x[j] * w[j];
    return acc;
  }
};

UcPopulation make_uc_population(const UcOptions& opt, Rng& rng) {
  const int n = opt.population;
  const int dim = opt.dim;
  UcPopulation pop;
  pop.dim = dim;
  pop.features.resize(static_cast<std::size_t>(n) * dim);
  for (int i = 0; i < n; ++i) {
    Real norm2 = 0.0;
    Real* x = pop.features.data() + static_cast<std::size_t>(i) * dim;
    for (int j = 0; j < dim; ++j) {
      x[j] = uniform(rng, -1.0, 1.0);
      norm2 += x[j] * x[j];
    }
    const Real norm = std::sqrt(norm2);
    if (norm > 1.0)
      for (int j = 0; j < dim; ++j) x[j] /= norm;
  }

  // Labels follow a noisy linear direction; the exact positive count is set
  // by thresholding the latent values at the requested quantile.
  std::vector<Real> direction(dim);
  Real dnorm2 = 0.0;
  for (auto& v : direction) {
    v = uniform(rng, -1.0, 1.0);
    dnorm2 += v * v;
  }
  for (auto& v : direction) v /= std::sqrt(std::max(dnorm2, Real{1e-12}));
  std::vector<std::pair<Real, int>> latent(n);
  for (int i = 0; i < n; ++i) {
    Real s = pop.score(i, direction) + uniform(rng, -0.3, 0.3);
    latent[i] = {s, i};
  }
  std::sort(latent.begin(), latent.end(), std::greater<>());
  const int n_plus = std::max(
      1, std::min(n - 1, static_cast<int>(
                             std::lround(opt.positive_fraction * n))));
  std::vector<std::uint8_t> bits(n, 0);
  for (int i = 0; i < n_plus; ++i) bits[latent[i].second] = 1;
  pop.labels = Labeling(std::move(bits));
  return pop;
}

// Normalized prec / ramp / avg / max of the given scores and labels.
std::array<Real, 4> normalized_measures(std::span<const Real> s,
                                        const Labeling& y, Real kappa) {
  const int k = effective_k(kappa, y.cardinality());
  return {static_cast<Real>(prec_at_k(s, y, k)) / k,
          eval_ramp(s, y, k).value / k, eval_avg(s, y, k).value / k,
          eval_max(s, y, k).value / k};
}

Real percentile(std::vector<Real> values, Real p) {
  std::sort(values.begin(), values.end());
  if (values.empty()) return 0.0;
  const auto idx = static_cast<std::size_t>(
      std::llround(p * (values.size() - 1)));
  return values[std::min(idx, values.size() - 1)];
}

}  // namespace

UcResult run_uc_study(const UcOptions& opt) {
  if (opt.population < 2 || opt.dim < 2 || opt.models < 1 || opt.trials < 1)
    throw std::invalid_argument("uc-study: bad population/dim/models/trials");
  if (!(opt.kappa > 0.0 && opt.kappa <= 1.0))
    throw std::invalid_argument("uc-study: kappa must lie in (0,1]");
  if (!(opt.positive_fraction > 0.0 && opt.positive_fraction < 1.0))
    throw std::invalid_argument("uc-study: positive fraction must be in (0,1)");
  for (int b : opt.sample_sizes)
    if (b < 1 || b > opt.population)
      throw std::invalid_argument(
          "uc-study: sample size " + std::to_string(b) +
          " outside [1, population]");

  Rng rng(mix_seed(opt.seed, 0x0c5d));
  const UcPopulation pop = make_uc_population(opt, rng);
  const int n = opt.population;

  std::vector<std::vector<Real>> models;
  for (int m = 0; m < opt.models; ++m) {
    std::vector<Real> w(opt.dim);
    Real norm2 = 0.0;
    for (auto& v : w) {
      v = uniform(rng, -1.0, 1.0);
      norm2 += v * v;
    }
    for (auto& v : w) v /= std::sqrt(std::max(norm2, Real{1e-12}));
    models.push_back(std::move(w));
  }

  // Population reference values per model.
  std::vector<std::array<Real, 4>> pop_values(opt.models);
  {
    std::vector<Real> s(n);
    for (int m = 0; m < opt.models; ++m) {
      for (int i = 0; i < n; ++i) s[i] = pop.score(i, models[m]);
      pop_values[m] = normalized_measures(s, pop.labels, opt.kappa);
    }
  }

  static const char* kMeasureNames[4] = {"prec", "ramp", "avg", "max"};
  std::vector<int> all_indices(n);
  std::iota(all_indices.begin(), all_indices.end(), 0);

  UcResult result;
  for (int b : opt.sample_sizes) {
    std::array<std::vector<Real>, 4> devs;
    for (auto& d : devs) d.reserve(opt.trials);

    for (int trial = 0; trial < opt.trials; ++trial) {
      std::vector<int> sample;
      int n_plus = 0;
      // Degenerate all-negative samples cannot be scored; redraw.
      for (int attempt = 0; attempt < 1000; ++attempt) {
        sample.clear();
        std::sample(all_indices.begin(), all_indices.end(),
                    std::back_inserter(sample), b, rng);
        n_plus = 0;
        for (int i : sample) n_plus += pop.labels.is_positive(i) ? 1 : 0;
        if (n_plus >= 1) break;
      }
      if (n_plus < 1)
        throw std::runtime_error("uc-study: could not draw a sample with "
                                 "positives");

      std::vector<std::uint8_t> bits(sample.size());
      for (std::size_t i = 0; i < sample.size(); ++i)
        bits[i] = pop.labels.is_positive(sample[i]) ? 1 : 0;
      const Labeling sample_labels(std::move(bits));

      std::array<Real, 4> max_dev = {0.0, 0.0, 0.0, 0.0};
      std::vector<Real> s(sample.size());
      for (int m = 0; m < opt.models; ++m) {
        for (std::size_t i = 0; i < sample.size(); ++i)
          s[i] = pop.score(sample[i], models[m]);
        const auto vals = normalized_measures(s, sample_labels, opt.kappa);
        for (int q = 0; q < 4; ++q)
          max_dev[q] =
              std::max(max_dev[q], std::abs(vals[q] - pop_values[m][q]));
      }
      for (int q = 0; q < 4; ++q) devs[q].push_back(max_dev[q]);
    }

    for (int q = 0; q < 4; ++q) {
      UcRow row;
      row.b = b;
      row.measure = kMeasureNames[q];
      row.median_dev = percentile(devs[q], 0.5);
      row.p90_dev = percentile(devs[q], 0.9);
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

void write_uc_csv(std::ostream& out, const UcResult& result) {
  out << "b,measure,median_dev,p90_dev\n";
  for (const auto& r : result.rows)
    out << r.b << ',' << r.measure << ',' << fmt9(r.median_dev) << ','
        << fmt9(r.p90_dev) << '\n';
}

}  // namespace preck::harness
