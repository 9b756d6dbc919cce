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

// Command-line driver: train / bench / counterexample / verify / uc-study /
// gen.  Exit codes: 0 success, 1 property or runtime failure, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "preck/dataio.hpp"
#include "preck/harness.hpp"
#include "preck/learners.hpp"
#include "preck/margins.hpp"

namespace {

using namespace preck;

struct CommonFlags {
  std::string data;
  std::vector<std::string> methods;
  std::optional<int> k;
  std::optional<double> kappa;
  std::vector<int> b = {500};
  int passes = 25;
  int splits = 5;
  std::uint64_t seed = 0;
  double eta0 = 1.0;
  double radius = 10.0;
  std::string out;
  std::string model_out;
  int workers = 1;
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags, bool multi_method,
                      bool multi_b) {
  cmd->add_option("--data", flags->data, "LIBSVM dataset path")->required();
  auto* method =
      cmd->add_option("--method", flags->methods,
                      "perceptron-avg | perceptron-max | sgd-avg | sgd-max")
          ->required()
          ->delimiter(',');
  if (!multi_method) method->expected(1);
  auto* k = cmd->add_option("--k", flags->k, "fixed Prec@k target");
  auto* kappa =
      cmd->add_option("--kappa", flags->kappa, "relative target in (0,1]");
  k->excludes(kappa);
  auto* b = cmd->add_option("--b", flags->b, "mini-batch length(s)")
                ->delimiter(',');
  if (!multi_b) b->expected(1);
  cmd->add_option("--passes", flags->passes, "passes over the training data");
  cmd->add_option("--splits", flags->splits, "random train/test splits");
  cmd->add_option("--seed", flags->seed, "master seed");
  cmd->add_option("--eta0", flags->eta0, "SGD step scale (eta_t = eta0/sqrt t)");
  cmd->add_option("--radius", flags->radius, "SGD projection ball radius");
  cmd->add_option("--out", flags->out, "output CSV path (default: stdout)");
  cmd->add_option("--model-out", flags->model_out, "model file path");
  cmd->add_option("--workers", flags->workers, "parallel worker threads");
}

KSpec k_spec_from(const CommonFlags& flags) {
  if (flags.k) return KSpec::fixed(*flags.k);
  return KSpec::relative(flags.kappa.value_or(0.25));
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> methods;
  for (const auto& name : names) {
    const auto m = method_from_string(name);
    if (!m)
      throw CLI::ValidationError("--method", "unknown method '" + name + "'");
    methods.push_back(*m);
  }
  return methods;
}

void emit_csv(const std::string& path,
              std::span<const harness::ExperimentRow> rows) {
  if (path.empty()) {
    harness::write_csv(std::cout, rows);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV file: " + path);
  harness::write_csv(out, rows);
}

std::string default_model_path(const CommonFlags& flags) {
  if (!flags.model_out.empty()) return flags.model_out;
  if (!flags.out.empty()) return flags.out + ".model";
  return "";
}

int cmd_train(const CommonFlags& flags) {
  const auto methods = parse_methods(flags.methods);
  const Dataset ds = load_libsvm_file(flags.data);

  harness::RunSpec spec;
  spec.dataset_name = std::filesystem::path(flags.data).stem().string();
  spec.method = methods.front();
  spec.k_spec = k_spec_from(flags);
  spec.b = flags.b.front();
  spec.passes = flags.passes;
  spec.splits = flags.splits;
  spec.seed = flags.seed;
  spec.eta0 = flags.eta0;
  spec.radius = flags.radius;
  spec.workers = flags.workers;

  const auto output = harness::run_train(ds, spec);
  emit_csv(flags.out, output.rows);
  if (const auto model_path = default_model_path(flags); !model_path.empty()) {
    harness::save_model(output.model, model_path);
    std::cerr << "model written to " << model_path << '\n';
  }
  return 0;
}

int cmd_bench(const CommonFlags& flags) {
  harness::BenchSpec spec;
  spec.methods = parse_methods(flags.methods);
  spec.batch_lens = flags.b;
  spec.base.dataset_name = std::filesystem::path(flags.data).stem().string();
  spec.base.k_spec = k_spec_from(flags);
  spec.base.passes = flags.passes;
  spec.base.splits = flags.splits;
  spec.base.seed = flags.seed;
  spec.base.eta0 = flags.eta0;
  spec.base.radius = flags.radius;
  spec.base.workers = flags.workers;

  const Dataset ds = load_libsvm_file(flags.data);
  const auto result = harness::run_bench(ds, spec);
  emit_csv(flags.out, result.rows);
  for (const auto& warning : result.warnings)
    std::cerr << "warning: " << warning << '\n';
  return 0;
}

int cmd_counterexample(bool print_table) {
  const auto report = harness::run_counterexample();
  if (print_table) {
    std::printf("%8s %14s %14s %14s %14s %6s\n", "w", "struct", "ramp", "avg",
                "max", "prec1");
    for (const auto& row : report.rows)
      std::printf("%8.1f %14.9g %14.9g %14.9g %14.9g %6d\n", row.w,
                  row.struct_scaled, row.ramp, row.avg, row.max, row.prec1);
  }
  auto verdict = [](const char* name, bool ok) {
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", name);
  };
  verdict("struct argmin has negative sign while Prec@1 prefers positive",
          report.argmin_negative && report.prec_pattern_ok);
  verdict("struct dips below the Prec@1 loss", report.dips_below_prec);
  verdict("struct goes negative for all grid w < -6", report.negative_beyond);
  verdict("ramp/avg/max stay above Prec@1 on the whole grid",
          report.upper_bounds_hold);
  return report.all_ok() ? 0 : 1;
}

int cmd_verify(harness::VerifyOptions options) {
  const auto results = harness::run_verify(options);
  harness::print_verify_report(std::cout, results);
  return harness::all_passed(results) ? 0 : 1;
}

int cmd_uc_study(const harness::UcOptions& options, const std::string& out) {
  const auto result = harness::run_uc_study(options);
  if (out.empty()) {
    harness::write_uc_csv(std::cout, result);
  } else {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write CSV file: " + out);
    harness::write_uc_csv(os, result);
  }
  return 0;
}

struct GenFlags {
  std::string kind = "strong";
  int n = 1000;
  int n_plus = 100;
  int dim = 8;
  int k = 1;
  double gamma = 1.0;
  double radius = 1.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string model_out;
};

int cmd_gen(const GenFlags& flags) {
  MarginSpec spec;
  if (flags.kind == "weak") spec.kind = MarginKind::kWeak;
  else if (flags.kind == "mid") spec.kind = MarginKind::kMid;
  else if (flags.kind == "strong") spec.kind = MarginKind::kStrong;
  else throw CLI::ValidationError("--kind", "expected weak | mid | strong");
  spec.k = flags.k;
  spec.gamma = flags.gamma;

  const auto data = generate_margin_dataset(spec, flags.n, flags.n_plus,
                                            flags.dim, flags.seed,
                                            flags.radius);
  std::ofstream out(flags.out);
  if (!out) throw std::runtime_error("cannot write dataset file: " + flags.out);
  serialize_libsvm(dataset_from_batch(data.batch), out);
  if (!flags.model_out.empty())
    harness::save_model(data.model, flags.model_out);
  std::cerr << "wrote " << flags.n << " points (" << flags.n_plus
            << " positive), max feature norm " << data.max_feature_norm
            << ", margin bound 4kR^2/gamma^2 = "
            << 4.0 * flags.k * flags.radius * flags.radius /
                   (flags.gamma * flags.gamma)
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prec@k surrogate losses, margin checkers, and learners"};
  app.require_subcommand(1);

  CommonFlags train_flags, bench_flags;
  auto* train_cmd =
      app.add_subcommand("train", "train one method over random splits");
  add_common_flags(train_cmd, &train_flags, false, false);
  auto* bench_cmd = app.add_subcommand(
      "bench", "compare methods under a shared split schedule");
  add_common_flags(bench_cmd, &bench_flags, true, true);

  bool ce_table = false;
  auto* ce_cmd = app.add_subcommand(
      "counterexample",
      "evaluate the built-in 6-point instance over a grid of models");
  ce_cmd->add_flag("--table", ce_table, "print the full grid table");

  harness::VerifyOptions verify_options;
  auto* verify_cmd =
      app.add_subcommand("verify", "run the property verification suites");
  verify_cmd->add_option("--max-n", verify_options.max_n,
                         "exhaustive sweep size bound");
  verify_cmd->add_option("--seed", verify_options.seed, "sweep seed");
  verify_cmd->add_option("--random-instances",
                         verify_options.hierarchy_instances,
                         "random hierarchy instances");
  verify_cmd->add_option("--workers", verify_options.workers,
                         "parallel worker threads");

  harness::UcOptions uc_options;
  std::string uc_out;
  auto* uc_cmd = app.add_subcommand(
      "uc-study", "sample-vs-population deviation decay study");
  uc_cmd->add_option("--n", uc_options.population, "population size");
  uc_cmd->add_option("--b", uc_options.sample_sizes, "sample sizes")
      ->delimiter(',');
  uc_cmd->add_option("--trials", uc_options.trials, "trials per sample size");
  uc_cmd->add_option("--models", uc_options.models, "random unit models");
  uc_cmd->add_option("--kappa", uc_options.kappa, "relative target");
  uc_cmd->add_option("--seed", uc_options.seed, "seed");
  uc_cmd->add_option("--out", uc_out, "output CSV path (default: stdout)");

  GenFlags gen_flags;
  auto* gen_cmd = app.add_subcommand(
      "gen", "generate a margin-realizable synthetic dataset");
  gen_cmd->add_option("--kind", gen_flags.kind, "weak | mid | strong");
  gen_cmd->add_option("--n", gen_flags.n, "number of points");
  gen_cmd->add_option("--n-plus", gen_flags.n_plus, "number of positives");
  gen_cmd->add_option("--dim", gen_flags.dim, "feature dimension");
  gen_cmd->add_option("--k", gen_flags.k, "margin k (weak/mid)");
  gen_cmd->add_option("--gamma", gen_flags.gamma, "margin width");
  gen_cmd->add_option("--radius", gen_flags.radius, "max feature norm");
  gen_cmd->add_option("--seed", gen_flags.seed, "seed");
  gen_cmd->add_option("--out", gen_flags.out, "LIBSVM output path")
      ->required();
  gen_cmd->add_option("--model-out", gen_flags.model_out,
                      "planted model output path");

  try {
    app.parse(argc, argv);
    if (train_cmd->parsed()) return cmd_train(train_flags);
    if (bench_cmd->parsed()) return cmd_bench(bench_flags);
    if (ce_cmd->parsed()) return cmd_counterexample(ce_table);
    if (verify_cmd->parsed()) return cmd_verify(verify_options);
    if (uc_cmd->parsed()) return cmd_uc_study(uc_options, uc_out);
    if (gen_cmd->parsed()) return cmd_gen(gen_flags);
    return 2;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
