// Acceptance checks, one line per criterion. Exit status is nonzero if any fails.

#include "aap/bench.hpp"
#include "aap/lsq.hpp"
#include "aap/problems.hpp"
#include "aap/solver.hpp"

#include "alloc_counter.hpp"
#include "oracles.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace aap;
namespace fs = std::filesystem;

namespace {

std::string g_aap = "aap";

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

SolverConfig defaults_for(const std::string& name) {
  const ProblemInfo& info = problem_info(name);
  SolverConfig c;
  c.window = info.default_window;
  c.rel_tolerance = info.default_tolerance;
  return c;
}

const Adaptivity kAllStrategies[] = {Adaptivity::None, Adaptivity::SubselectPower, Adaptivity::SubselectConstant,
                                     Adaptivity::RandomizedPower, Adaptivity::RandomizedConstant};
const Adaptivity kAdaptive[] = {Adaptivity::SubselectPower, Adaptivity::SubselectConstant,
                                Adaptivity::RandomizedPower, Adaptivity::RandomizedConstant};

// 1. AAP(m = n, p = 1) reproduces full-memory GMRES residuals.
Outcome gmres_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = 50;
  const std::uint64_t seed = 2024;
  const auto sys = generate_spd_system(n, seed);
  const auto p = make_linear(n, seed);
  SolverConfig c;
  c.window = 50;
  c.alternation = 1;
  c.rel_tolerance = 1e-12;
  c.max_iterations = 200;
  const auto rep = solve(p, c);

  // AAP's x^{k} equals g(x_G^{k-1}) for the GMRES iterate x_G^{k-1}.
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  const auto xs = testing::gmres_iterates(sys.A, sys.b, x0, int(n));
  const double omega = p.recommended_omega();
  const double r0 = (sys.A * x0 - sys.b).norm();
  double worst = 0.0;
  int compared = 0, first_miss = 0;
  double miss_residual = 0.0;
  bool ok = true;
  for (std::size_t k = 1; k - 1 < xs.size(); ++k) {
    const Eigen::VectorXd xg = xs[k - 1] - omega * (sys.A * xs[k - 1] - sys.b);
    const double expect = (sys.A * xg - sys.b).norm() / r0;
    if (expect < 1e-10) break;
    if (k >= rep.residual_history.size()) {
      ok = false;
      break;
    }
    const double dev = std::abs(rep.residual_history[k] - expect) / expect;
    if (dev > 1e-8 && first_miss == 0) {
      first_miss = int(k);
      miss_residual = expect;
    }
    worst = std::max(worst, dev);
    ++compared;
  }
  const double elapsed = seconds_since(t0);
  ok = ok && compared > 0 && worst <= 1e-8 && elapsed < 1.0;
  std::string detail = std::to_string(compared) + " iterations compared, max relative deviation " +
                       fmt("%.2e", worst) + ", " + fmt("%.3f", elapsed) + " s";
  if (first_miss)
    detail += "; first above 1e-8 at k=" + std::to_string(first_miss) + " (residual " + fmt("%.1e", miss_residual) + ")";
  return {ok, detail};
}

class IterateRecorder : public SolveObserver {
public:
  void on_iterate(int, std::span<const double> x) override { iterates.emplace_back(x.begin(), x.end()); }
  std::vector<std::vector<double>> iterates;
};

// 2. Identity masks, S = 100 % and no adaptivity give the plain iterates exactly.
Outcome transparency() {
  std::string detail;
  bool ok = true;
  for (const auto& info : problem_catalog()) {
    const auto p = make_problem(info.name, info.smallest_size);
    SolverConfig c = defaults_for(info.name);
    c.sketch_percent = 100.0;
    c.adaptivity = Adaptivity::None;
    IterateRecorder two_level, plain;
    const auto a = solve(p, c, p.initial_state(), &two_level);
    const auto b = solve_reference(p, c, p.initial_state(), &plain);
    const bool same = two_level.iterates == plain.iterates && a.residual_history == b.residual_history;
    ok = ok && same && a.converged;
    detail += info.name + ":" + std::to_string(two_level.iterates.size()) + (same ? " equal" : " DIFFER") + "  ";
  }
  return {ok, detail};
}

// 3. Guard soundness on every accepted mask and the perturbation bound on every
//    step whose hypotheses verify.
Outcome guard_and_bound() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::size_t accepted = 0, steps = 0, hypothesis_steps = 0, failures = 0, guard_violations = 0;
  for (const auto& info : problem_catalog())
    for (Adaptivity a : kAllStrategies) {
      bench::RunOptions opt;
      opt.problem = info.name;
      opt.size = info.smallest_size;
      opt.seed = 1;
      opt.config = defaults_for(info.name);
      opt.config.adaptivity = a;
      opt.config.rng_seed = 1;
      std::stringstream trace;
      bench::run_single(opt, &trace, false);
      const auto parsed = bench::parse_trace(trace);
      for (const auto& s : parsed.steps)
        if (s.accepted) {
          ++accepted;
          if (!(s.eps_rhs > 0.0 && s.eps_rhs <= s.eps_lhs)) ++guard_violations;
        }
      const auto report = bench::verify_theorem_trace(parsed);
      steps += report.steps.size();
      hypothesis_steps += report.hypothesis_steps;
      failures += report.failures;
      for (const auto& s : report.steps)
        if (s.hypotheses && s.delta > s.bound + bench::kBoundSlack) ok = false;
    }
  const double elapsed = seconds_since(t0);
  ok = ok && guard_violations == 0 && failures == 0 && elapsed < 30.0;
  return {ok, std::to_string(steps) + " mixing steps, " + std::to_string(accepted) + " accepted masks, " +
                  std::to_string(hypothesis_steps) + " with verified hypotheses, " + std::to_string(failures) +
                  " verifier failures, " + fmt("%.1f", elapsed) + " s"};
}

// 4. Every adaptive strategy converges within twice the non-adapted count.
Outcome adaptivity_trend() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (auto [name, size] : {std::pair<std::string, std::size_t>{"plaplace", 31}, {"saddle", 33}}) {
    const auto p = make_problem(name, size);
    SolverConfig c = defaults_for(name);
    c.rel_tolerance = 1e-6;
    const auto base = solve(p, c);
    ok = ok && base.converged;
    detail += name + " none=" + std::to_string(base.iterations);
    for (Adaptivity a : kAdaptive) {
      c.adaptivity = a;
      c.rng_seed = 7;
      int iters = -1;
      bool conv = false;
      try {
        const auto rep = solve(p, c);
        iters = rep.iterations;
        conv = rep.converged;
      } catch (const SolveBreakdown& e) {
        iters = e.partial_report().iterations;
      }
      const bool good = conv && iters <= 2 * base.iterations;
      ok = ok && good;
      detail += " " + to_string(a) + "=" + std::to_string(iters) + (conv ? "" : "(nc)") + (good ? "" : "!");
    }
    detail += "; ";
  }
  const double elapsed = seconds_since(t0);
  ok = ok && elapsed < 120.0;
  return {ok, detail + fmt("%.1f", elapsed) + " s"};
}

// 5. The pressure mask converges within 1.5 times the unmasked count.
Outcome pressure_mask_trend() {
  bool ok = true;
  std::string detail;
  for (std::size_t size : {17, 33}) {
    const auto p = make_problem("saddle", size);
    SolverConfig c = defaults_for("saddle");
    const auto none = solve(p, c);
    c.mask_field = "pressure";
    const auto masked = solve(p, c);
    const bool good = none.converged && masked.converged && masked.iterations <= 1.5 * none.iterations;
    ok = ok && good;
    detail += std::to_string(size) + "x" + std::to_string(size) + ": none=" + std::to_string(none.iterations) +
              " pressure=" + std::to_string(masked.iterations) + (masked.converged ? "" : "(nc)") +
              " ratio=" + fmt("%.2f", double(masked.iterations) / none.iterations) + "; ";
  }
  return {ok, detail};
}

class AllocationProbe : public SolveObserver {
public:
  void on_iterate(int k, std::span<const double>) override {
    if (k == 2) at_two = testing::allocation_count();
    last = testing::allocation_count();
    last_k = k;
  }
  std::size_t at_two = 0, last = 0;
  int last_k = 0;
};

// 6. F_Pi has one row per pressure unknown and the loop never allocates.
Outcome memory_shape() {
  const std::size_t size = 17;
  const auto p = make_problem("saddle", size);
  const auto sys = assemble_saddle_point(GridSpec{2, size});
  SolverConfig c = defaults_for("saddle");
  c.mask_field = "pressure";
  const auto ws = allocate_workspace(p, c);
  const bool rows_ok = ws.F_pi.rows() == sys.pressure_unknowns && ws.G.rows() == p.dimension();

  AllocationProbe probe;
  const auto rep = solve(p, c, &probe);
  const long growth = long(probe.last) - long(probe.at_two);
  const bool ok = rows_ok && rep.converged && probe.last_k > 2 && growth == 0;
  return {ok, "F_Pi " + std::to_string(ws.F_pi.rows()) + " x " + std::to_string(ws.F_pi.cols()) + " for " +
                  std::to_string(sys.pressure_unknowns) + " pressure unknowns; " + std::to_string(growth) +
                  " allocations across iterations 2.." + std::to_string(probe.last_k)};
}

// 7. Inverse power estimate of sigma_min against a dense SVD.
Outcome sigma_estimator() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int within = 0, generated = 0;
  while (generated < 100) {
    Eigen::MatrixXd M = testing::random_matrix(10, 10, rng());
    Eigen::MatrixXd R = M.householderQr().matrixQR().triangularView<Eigen::Upper>();
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(R).singularValues();
    if (sv(9) / sv(8) > 0.5) continue;  // keep only gapped factors
    ++generated;
    TriangularFactor f{DenseMatrix(10, 10)};
    for (int j = 0; j < 10; ++j)
      for (int i = 0; i <= j; ++i) f.r(i, j) = R(i, j);
    const double est = estimate_sigma_min(f, 5);
    if (std::abs(est - sv(9)) <= 0.1 * sv(9)) ++within;
  }
  const double elapsed = seconds_since(t0);
  return {within >= 95 && elapsed < 5.0,
          std::to_string(within) + "/100 within 10%, " + fmt("%.2f", elapsed) + " s"};
}

int run_aap(const std::string& args) {
  const std::string cmd = g_aap + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// 8. bench-kernels emits the full record grid and the threshold summary.
Outcome kernel_benchmark(const fs::path& dir) {
  const auto out = dir / "kernels.csv";
  const int rc = run_aap("bench-kernels --min-n 1024 --max-n 262144 --cols 50 --reps 3 --out " + out.string());
  const auto records = lines_of(out);
  const auto thresholds = lines_of(out.string() + ".thresholds.csv");
  const bench::KernelBenchOptions defaults;
  const std::size_t sizes = 9, cells = sizes * defaults.retentions.size() * 2;
  bool ok = rc == 0 && records.size() == cells + 1 && thresholds.size() == sizes * 2 + 1;

  std::string informational = "n/a";
  std::size_t previous_n = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    std::stringstream ss(records[i]);
    std::string n, cols, retention, op, masked, full;
    std::getline(ss, n, ',');
    std::getline(ss, cols, ',');
    std::getline(ss, retention, ',');
    std::getline(ss, op, ',');
    std::getline(ss, masked, ',');
    std::getline(ss, full, ',');
    const std::size_t nv = std::stoul(n);
    if (nv < previous_n || std::stod(masked) <= 0.0 || std::stod(full) <= 0.0) ok = false;
    previous_n = nv;
    if (nv == 262144 && op == "matvec" && retention == "0.05")
      informational = fmt("%.3f", std::stod(masked) / std::stod(full));
  }
  return {ok, std::to_string(records.size() ? records.size() - 1 : 0) + " records, " +
                  std::to_string(thresholds.size() ? thresholds.size() - 1 : 0) +
                  " thresholds; masked/full matvec at 5% for n=2^18 = " + informational + " (informational)"};
}

// 9. Identical flags give byte-identical tables (time excluded) and traces.
Outcome determinism(const fs::path& dir) {
  bool ok = true;
  std::string detail;
  const std::vector<std::string> configs = {
      "--problem plaplace --size 15 --adapt rand-pow --seed 42",
      "--problem saddle --size 17 --mask pressure --adapt sub-const --seed 3",
      "--problem bidomain --size 13 --adapt rand-const --sketch 40 --seed 9",
      "--problem linear --size 40 --adapt sub-pow --seed 5"};
  int i = 0;
  for (const auto& flags : configs) {
    std::vector<std::string> tables[2], traces[2];
    int codes[2] = {-1, -1};
    for (int r = 0; r < 2; ++r) {
      const auto base = dir / ("det" + std::to_string(i) + "_" + std::to_string(r));
      codes[r] = run_aap("run " + flags + " --out " + base.string() + ".csv --trace " + base.string() + ".trace");
      if (codes[r] != 0 && codes[r] != 1) ok = false;
      tables[r] = lines_of(base.string() + ".csv");
      for (auto& line : tables[r]) line = line.substr(0, line.rfind(','));  // drop time_s
      traces[r] = lines_of(base.string() + ".trace");
    }
    const bool same = codes[0] == codes[1] && !tables[0].empty() && tables[0] == tables[1] && !traces[0].empty() && traces[0] == traces[1];
    ok = ok && same;
    detail += std::string(same ? "identical" : "DIFFER") + "(" + std::to_string(traces[0].size()) + " trace lines) ";
    ++i;
  }
  return {ok, detail};
}

} // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--aap" && i + 1 < argc)
      g_aap = argv[++i];
    else if (a == "--only" && i + 1 < argc)
      only = std::atoi(argv[++i]);
  }
  const fs::path dir = fs::temp_directory_path() / "aap-acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"GMRES equivalence", gmres_equivalence},
      {"transparency", transparency},
      {"guard soundness and perturbation bound", guard_and_bound},
      {"adaptivity stability trend", adaptivity_trend},
      {"pressure mask trend", pressure_mask_trend},
      {"memory shape", memory_shape},
      {"sigma_min estimator", sigma_estimator},
      {"masked kernel benchmark", [&] { return kernel_benchmark(dir); }},
      {"determinism", [&] { return determinism(dir); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && int(i + 1) != only) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
