#include "aap/solver.hpp"

#include <chrono>
#include <cstring>
#include <numeric>

namespace aap {

namespace {

// Drops the oldest column when full and appends `v` as the newest.
void shift_append(DenseMatrix& M, std::size_t& filled, std::span<const double> v) {
  const std::size_t rows = M.rows();
  if (filled == M.cols()) {
    std::memmove(M.data(), M.data() + rows, sizeof(double) * rows * (M.cols() - 1));
  } else {
    ++filled;
  }
  std::copy(v.begin(), v.end(), M.col(filled - 1).begin());
}

} // namespace

SolveReport solve_reference(const FixedPointProblem& problem, const SolverConfig& config,
                            std::span<const double> x0, SolveObserver* observer) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  config.validate();
  const std::size_t n = problem.dimension();
  const std::size_t m = static_cast<std::size_t>(config.window);
  if (x0.size() != n) throw InvalidConfig("initial state has wrong length");
  const double omega = config.omega.value_or(problem.recommended_omega());

  std::vector<double> x(x0.begin(), x0.end()), f(n), g(n), f_prev(n), g_prev(n), df(n), dg(n);
  DenseMatrix F(n, m), G(n, m);
  std::size_t filled_f = 0, filled_g = 0;
  std::vector<std::size_t> rows(n), order(m);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> ls_matrix(n * m), ls_rhs(n), alpha(m);

  SolveReport report;
  report.residual_history.reserve(static_cast<std::size_t>(config.max_iterations) + 1);

  evaluate_residual(problem, x, f);
  for (std::size_t i = 0; i < n; ++i) g[i] = x[i] - omega * f[i];
  const double norm0 = norm2(f);
  report.residual_history.push_back(1.0);
  if (norm0 > 0.0) {
    picard_update(x, f, omega);
    if (observer) observer->on_iterate(0, x);
    for (int k = 1; k <= config.max_iterations; ++k) {
      f_prev = f;
      g_prev = g;
      evaluate_residual(problem, x, f);
      for (std::size_t i = 0; i < n; ++i) {
        g[i] = x[i] - omega * f[i];
        df[i] = f[i] - f_prev[i];
        dg[i] = g[i] - g_prev[i];
      }
      report.iterations = k;
      const double rel = norm2(f) / norm0;
      report.residual_history.push_back(rel);
      if (rel < config.rel_tolerance) {
        report.converged = true;
        break;
      }

      shift_append(F, filled_f, df);
      shift_append(G, filled_g, dg);

      if (k % config.alternation != 0) {
        picard_update(x, f, omega);
      } else {
        const std::size_t cols = filled_f;
        auto a = std::span<double>(alpha).first(cols);
        ++report.ls_solves;
        if (masked_lsq(F, f, rows, 0, cols, ls_matrix, ls_rhs, a) == LsqStatus::Ok) {
          for (auto& v : a) v = -v;
          anderson_mix(x, f, omega, G, std::span<const std::size_t>(order).first(cols), a);
        } else {
          picard_update(x, f, omega);
        }
      }
      if (observer) observer->on_iterate(k, x);
    }
  } else {
    report.converged = true;
  }

  report.residual_evaluations = report.iterations + 1;
  report.final_state = x;
  report.wall_time_seconds = std::chrono::duration<double>(clock::now() - start).count();
  return report;
}

} // namespace aap
