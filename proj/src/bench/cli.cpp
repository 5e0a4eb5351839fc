#include "aap/bench.hpp"
#include "aap/errors.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace aap::bench {

namespace {

struct RunArgs {
  std::string problem;
  std::size_t size = 0;
  std::string mask = "none";
  std::string adapt = "none";
  double sketch = 30.0;
  int window = 0;
  int alternation = 1;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  std::string trace;
  std::string out;
  int max_iterations = 1000;
  double omega = 0.0;
  bool strict = false;
  double eta_exponent = 1.1;
  int sigma_iters = 3;
  std::string init = "zero";
};

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw InvalidConfig("cannot write '" + path + "'");
  return f;
}

int cmd_run(const RunArgs& a) {
  const ProblemInfo& info = problem_info(a.problem);
  RunOptions opt;
  opt.problem = a.problem;
  opt.size = a.size > 0 ? a.size : info.default_size;
  opt.seed = a.seed;
  if (a.init == "poisson")
    opt.init = PLaplaceInit::Poisson;
  else if (a.init != "zero")
    throw InvalidConfig("--init must be zero or poisson");

  SolverConfig& c = opt.config;
  c.window = a.window > 0 ? a.window : info.default_window;
  c.alternation = a.alternation;
  c.rel_tolerance = a.tolerance > 0.0 ? a.tolerance : info.default_tolerance;
  c.max_iterations = a.max_iterations;
  if (a.omega > 0.0) c.omega = a.omega;
  if (a.mask != "none") c.mask_field = a.mask;
  c.adaptivity = parse_adaptivity(a.adapt);
  c.sketch_percent = a.sketch;
  c.eta_exponent = a.eta_exponent;
  c.sigma_min_iterations = a.sigma_iters;
  c.strict_lhs = a.strict;
  c.rng_seed = a.seed;
  c.validate();

  std::ofstream trace;
  if (!a.trace.empty()) trace = open_output(a.trace);
  const RunRecord row = run_single(opt, a.trace.empty() ? nullptr : &trace, true);
  if (!a.out.empty()) {
    auto out = open_output(a.out);
    write_table(out, {row});
  }
  std::cout << row.problem << " n=" << row.n << " mask=" << row.mask << " adapt=" << row.adapt << " p=" << row.p
            << ": " << (row.converged ? "converged" : "not converged") << " after " << row.iterations
            << " iterations, residual " << format_double(row.final_residual) << ", accepted masks "
            << row.accepted_masks << '\n';
  return row.converged ? kOk : kNotConverged;
}

int cmd_sweep(const std::string& plan_path, int threads) {
  std::ifstream in(plan_path);
  if (!in) throw InvalidConfig("cannot read plan '" + plan_path + "'");
  ExperimentPlan plan = parse_plan(in);
  if (threads > 0) plan.threads = threads;
  apply_mode(plan);
  validate_plan(plan);

  const auto rows = run_experiment(plan);
  {
    auto out = open_output(plan.out);
    write_table(out, rows);
  }
  {
    auto out = open_output(plan.out + ".best.csv");
    write_table(out, best_per_size(rows));
  }
  {
    auto out = open_output(plan.out + ".meta");
    write_plan_metadata(out, plan);
  }
  std::size_t converged = 0;
  for (const auto& r : rows) converged += r.converged ? 1 : 0;
  std::cout << rows.size() << " runs, " << converged << " converged; table written to " << plan.out << '\n';
  return kOk;
}

int cmd_bench(const KernelBenchOptions& o, const std::string& out_path) {
  const auto records = bench_masked_kernels(o);
  const auto thresholds = summarize_thresholds(records);
  {
    auto out = open_output(out_path);
    write_bench_records(out, records);
  }
  {
    auto out = open_output(out_path + ".thresholds.csv");
    write_thresholds(out, thresholds);
  }
  for (const auto& t : thresholds)
    std::cout << "n=" << t.n << ' ' << t.op << " threshold " << format_double(t.threshold) << '\n';
  // Informational only: depends on the machine.
  for (const auto& r : records)
    if (r.n == records.back().n && r.op == "matvec" && std::abs(r.retention - 0.05) < 1e-12)
      std::cout << "masked matvec at 5% retention, n=" << r.n << ": masked/full = "
                << format_double(r.masked_s / r.full_s) << '\n';
  return kOk;
}

int cmd_verify(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot read trace '" + path + "'");
  const Trace trace = parse_trace(in);
  const VerificationReport report = verify_theorem_trace(trace);
  for (const auto& s : report.steps) {
    std::printf("step %d %s delta=%.6e bound=%.6e sigma=%.6e L=%.6e eps=%.6e hypotheses=%s bound=%s%s%s\n",
                s.iteration, s.fallback ? "fallback" : (s.masked ? "masked" : "full"), s.delta, s.bound, s.sigma_min,
                s.lipschitz, s.epsilon, s.hypotheses ? "yes" : "no", s.bound_holds ? "ok" : "VIOLATED",
                s.problem.empty() ? "" : " : ", s.problem.c_str());
  }
  std::printf("%zu mixing steps, %zu with verified hypotheses, %zu failures\n", report.steps.size(),
              report.hypothesis_steps, report.failures);
  return report.passed() ? kOk : kVerificationFailed;
}

} // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Two-level sketching alternating Anderson-Picard solver"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Solve one built-in problem");
  run->add_option("--problem", ra.problem, "linear | saddle | plaplace | bidomain")->required();
  run->add_option("--size", ra.size, "Unknowns (linear) or points per side; default per problem");
  run->add_option("--mask", ra.mask, "Field for the static restriction, or none");
  run->add_option("--adapt", ra.adapt, "none | sub-pow | sub-const | rand-pow | rand-const");
  run->add_option("--sketch", ra.sketch, "Percent of rows kept by the adaptive step");
  run->add_option("-m,--window", ra.window, "Window size; default per problem");
  run->add_option("-p,--alternation", ra.alternation, "Anderson step every p iterations");
  run->add_option("--tol", ra.tolerance, "Relative residual tolerance; default per problem");
  run->add_option("--seed", ra.seed, "Seed for the generator and the random masks");
  run->add_option("--trace", ra.trace, "Write the mixing-step trace here");
  run->add_option("--out", ra.out, "Write the result table here");
  run->add_option("--max-iter", ra.max_iterations, "Iteration cap");
  run->add_option("--omega", ra.omega, "Relaxation; default per problem");
  run->add_flag("--strict", ra.strict, "Take the smallest column bound instead of the largest");
  run->add_option("--eta-exponent", ra.eta_exponent, "Exponent of the power eta sequence");
  run->add_option("--sigma-iters", ra.sigma_iters, "Inverse power iterations for sigma_min");
  run->add_option("--init", ra.init, "plaplace initial guess: zero | poisson");

  std::string plan_path;
  int sweep_threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Run an experiment plan");
  sweep->add_option("--plan", plan_path, "Plan file (key = value)")->required();
  sweep->add_option("--threads", sweep_threads, "Override the plan's thread count");

  KernelBenchOptions ko;
  std::string bench_out;
  bool no_pin = false;
  auto* bench = app.add_subcommand("bench-kernels", "Masked versus full matvec and QR timings");
  bench->add_option("--min-n", ko.min_n, "Smallest row count");
  bench->add_option("--max-n", ko.max_n, "Largest row count (doubling from min-n)");
  bench->add_option("--cols", ko.columns, "Columns of the random matrix");
  bench->add_option("--reps", ko.max_reps, "Repetition cap per cell");
  bench->add_option("--seed", ko.seed, "Seed for the matrix and index sets");
  bench->add_flag("--no-pin", no_pin, "Do not pin to one CPU");
  bench->add_option("--out", bench_out, "Record table")->required();

  std::string trace_path;
  auto* verify = app.add_subcommand("verify-trace", "Check a trace against the perturbation bound");
  verify->add_option("path", trace_path, "Trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalidInput;
  }

  try {
    if (*run) return cmd_run(ra);
    if (*sweep) return cmd_sweep(plan_path, sweep_threads);
    if (*bench) {
      ko.pin_cpu = !no_pin;
      return cmd_bench(ko, bench_out);
    }
    if (*verify) return cmd_verify(trace_path);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const Error& e) {
    // InvalidConfig, UnknownField, InvalidMask, ResourceLimit and friends
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
  return kInvalidInput;
}

} // namespace aap::bench
