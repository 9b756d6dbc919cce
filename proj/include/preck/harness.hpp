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

#ifndef PRECK_HARNESS_HPP_
#define PRECK_HARNESS_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "preck/core.hpp"
#include "preck/dataio.hpp"
#include "preck/learners.hpp"
#include "preck/margins.hpp"
#include "preck/surrogates.hpp"

namespace preck::harness {

// Margin metadata of a generated dataset; enables the 4 k R^2 / gamma^2
// bound column in result rows.
struct MarginInfo {
  int k = 1;
  Real gamma = 1.0;
  Real radius = 1.0;

  Real bound() const { return 4.0 * k * radius * radius / (gamma * gamma); }
};

struct RunSpec {
  std::string dataset_name = "dataset";
  Method method = Method::kPerceptronAvg;
  KSpec k_spec = KSpec::relative(0.25);
  int b = 500;
  int passes = 25;
  int splits = 5;
  Real train_fraction = 0.7;
  Real eta0 = 1.0;
  Real radius = 10.0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::optional<MarginInfo> margin;
};

struct ExperimentRow {
  std::string method;
  std::string dataset;
  std::string k_spec;  // "k=<int>" or "kappa=<float>"
  int b = 0;
  int repeat = 0;
  Real train_time_s = 0.0;
  Real test_prec_loss = 0.0;
  Real test_prec_accuracy = 0.0;
  long long cumulative_mistakes = 0;
  std::optional<Real> bound_value;
};

struct TrainOutput {
  std::vector<ExperimentRow> rows;  // one per repeat, in repeat order
  LinearModel model;                // model trained on the first repeat
};

/// Split / train / evaluate for one method.  Split and batch schedules depend
/// only on (seed, repeat), so different methods see identical streams.
TrainOutput run_train(const Dataset& ds, const RunSpec& spec);

struct BenchSpec {
  std::vector<Method> methods;
  std::vector<int> batch_lens = {500};
  RunSpec base;  // method and b fields are overridden per unit
};

struct BenchResult {
  std::vector<ExperimentRow> rows;  // ordered by (method, b, repeat)
  // One note per method whose mean accuracy varies by >= 5% across batch
  // lengths (soft stability target, reported but not fatal).
  std::vector<std::string> warnings;
};

BenchResult run_bench(const Dataset& ds, const BenchSpec& spec);

// ---- CSV ----
std::string csv_header();
void write_csv(std::ostream& out, std::span<const ExperimentRow> rows);
std::vector<ExperimentRow> parse_csv(std::istream& in);

// ---- model files ----
void save_model(const LinearModel& model, const std::string& path);
LinearModel load_model(const std::string& path);

// ---- built-in 6-point counterexample ----
struct CounterexampleRow {
  Real w = 0.0;
  Real struct_scaled = 0.0;
  Real ramp = 0.0;
  Real avg = 0.0;
  Real max = 0.0;
  int prec1 = 0;
};

struct CounterexampleReport {
  std::vector<CounterexampleRow> rows;  // w from -15 to 15, step 0.1
  Real argmin_w = 0.0;                  // grid argmin of struct_scaled
  bool argmin_negative = false;         // argmin_w < 0 with the prec pattern
  bool prec_pattern_ok = false;         // prec1 = 0 for w > 0, = 1 for w < 0
  bool dips_below_prec = false;         // struct_scaled < prec1 somewhere
  bool negative_beyond = false;         // struct_scaled < 0 for all w < -6
  bool upper_bounds_hold = false;       // ramp/avg/max >= prec1 everywhere

  bool all_ok() const {
    return argmin_negative && prec_pattern_ok && dips_below_prec &&
           negative_beyond && upper_bounds_hold;
  }
};

CounterexampleReport run_counterexample();

// ---- property verification ----
using SurrogateEvalFn = std::function<SurrogateValue(
    SurrogateKind, std::span<const Real>, const Labeling&, int)>;

struct VerifyOptions {
  int max_n = 12;  // exhaustive sweep covers every labeling with n <= max_n
  std::uint64_t seed = 7;
  long long hierarchy_instances = 100000;  // random instances, n <= 64
  int consistency_instances = 100;         // per margin kind
  int fd_triples = 50;
  int firstorder_pairs = 1000;
  long long margin_hierarchy_instances = 10000;
  int rank_ineq_multisets = 1000;
  int mistake_audit_seeds = 3;  // small matrix; the full one is in acceptance
  int workers = 2;
  // Test hook: replaces the efficient evaluators in the oracle-equivalence
  // and hierarchy sweeps.  Defaults to eval_surrogate.
  SurrogateEvalFn evaluator_override;
};

struct PropertyResult {
  std::string name;
  bool passed = false;
  long long checked = 0;
  std::string detail;  // names the first counterexample on failure
};

std::vector<PropertyResult> run_verify(const VerifyOptions& options);
bool all_passed(std::span<const PropertyResult> results);
void print_verify_report(std::ostream& out,
                         std::span<const PropertyResult> results);

// ---- uniform-convergence decay study ----
struct UcOptions {
  int population = 20000;
  std::vector<int> sample_sizes = {125, 500, 2000};
  int trials = 200;
  int models = 16;
  Real kappa = 0.25;
  Real positive_fraction = 0.2;
  int dim = 12;
  std::uint64_t seed = 11;
};

struct UcRow {
  int b = 0;
  std::string measure;  // prec | ramp | avg | max
  Real median_dev = 0.0;
  Real p90_dev = 0.0;
};

struct UcResult {
  std::vector<UcRow> rows;  // grouped by b in input order, measures in
                            // prec/ramp/avg/max order
};

/// Fixed synthetic population; for each sample size draws `trials` samples
/// without replacement and records the max-over-models deviation between
/// population and sample values of normalized Prec@kappa and the three
/// normalized surrogates.  Throws when a sample size exceeds the population.
UcResult run_uc_study(const UcOptions& options);
void write_uc_csv(std::ostream& out, const UcResult& result);

}  // namespace preck::harness

#endif  // PRECK_HARNESS_HPP_
