#include "aap/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>

namespace aap {

void picard_update(std::span<double> x, std::span<const double> f, double omega) noexcept {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= omega * f[i];
}

void update_increments(Workspace& ws, const FixedPointProblem& problem, double omega) {
  const std::size_t n = ws.n;
  std::copy_n(ws.f.begin(), n, ws.df.begin());
  std::copy_n(ws.g.begin(), n, ws.dg.begin());
  evaluate_residual(problem, ws.x, ws.f);
  for (std::size_t i = 0; i < n; ++i) {
    ws.g[i] = ws.x[i] - omega * ws.f[i];
    ws.df[i] = ws.f[i] - ws.df[i];
    ws.dg[i] = ws.g[i] - ws.dg[i];
  }
}

void push_window(Workspace& ws, std::span<const double> df_restricted, std::span<const double> dg, int k,
                 double dx_norm) {
  const std::size_t m = ws.m;
  if (ws.filled_columns == m) {
    if (m > 1) {
      std::memmove(ws.F_pi.data(), ws.F_pi.data() + ws.l1, sizeof(double) * ws.l1 * (m - 1));
      std::copy(ws.dx_norms.begin() + 1, ws.dx_norms.end(), ws.dx_norms.begin());
      std::copy(ws.column_order.begin() + 1, ws.column_order.end(), ws.column_order.begin());
    }
  } else {
    ++ws.filled_columns;
  }
  const std::size_t slot = ws.filled_columns - 1;
  std::copy(df_restricted.begin(), df_restricted.end(), ws.F_pi.col(slot).begin());
  ws.dx_norms[slot] = dx_norm;

  const std::size_t physical = static_cast<std::size_t>(k + 1) % m;
  std::copy(dg.begin(), dg.end(), ws.G.col(physical).begin());
  ws.newest_column = physical;
  ws.column_order[slot] = physical;
}

void anderson_mix(std::span<double> x, std::span<const double> f, double omega, const DenseMatrix& G,
                  std::span<const std::size_t> order, std::span<const double> alpha) noexcept {
  picard_update(x, f, omega);
  for (std::size_t j = 0; j < alpha.size(); ++j) axpy(alpha[j], G.col(order[j]), x);
}

void anderson_update(Workspace& ws, std::span<const double> alpha, double omega) noexcept {
  anderson_mix(ws.x, ws.f, omega, ws.G, std::span<const std::size_t>(ws.column_order).first(alpha.size()), alpha);
}

namespace {

double increment_norm(const Workspace& ws, double omega) noexcept {
  // x = g + omega f, so dx = dg + omega df
  double s = 0.0;
  for (std::size_t i = 0; i < ws.n; ++i) {
    const double d = ws.dg[i] + omega * ws.df[i];
    s += d * d;
  }
  return std::sqrt(s);
}

void reserve_report(SolveReport& report, const SolverConfig& config) {
  report.residual_history.reserve(static_cast<std::size_t>(config.max_iterations) + 1);
  report.mask_trace.reserve(static_cast<std::size_t>(config.max_iterations / config.alternation) + 1);
}

} // namespace

SolveReport solve(const FixedPointProblem& problem, const SolverConfig& config, std::span<const double> x0,
                  SolveObserver* observer) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();

  config.validate();
  if (x0.size() != problem.dimension()) throw InvalidConfig("initial state has wrong length");
  Workspace ws = allocate_workspace(problem, config);
  const double omega = config.omega.value_or(problem.recommended_omega());

  SolveReport report;
  reserve_report(report, config);
  std::copy(x0.begin(), x0.end(), ws.x.begin());

  auto finish = [&] {
    report.residual_evaluations = report.iterations + 1;
    report.final_state = ws.x;
    report.wall_time_seconds = std::chrono::duration<double>(clock::now() - start).count();
  };

  try {
    evaluate_residual(problem, ws.x, ws.f);
    for (std::size_t i = 0; i < ws.n; ++i) ws.g[i] = ws.x[i] - omega * ws.f[i];
    const double norm0 = norm2(ws.f);
    report.residual_history.push_back(1.0);
    if (norm0 == 0.0) {
      report.converged = true;
      finish();
      return report;
    }
    picard_update(ws.x, ws.f, omega);
    if (observer) observer->on_iterate(0, ws.x);

    for (int k = 1; k <= config.max_iterations; ++k) {
      update_increments(ws, problem, omega);
      report.iterations = k;
      const double rel = norm2(ws.f) / norm0;
      report.residual_history.push_back(rel);
      if (rel < config.rel_tolerance) {
        report.converged = true;
        break;
      }

      const double dx_norm = increment_norm(ws, omega);
      ws.lipschitz = update_lipschitz(ws.lipschitz, norm2(ws.df), dx_norm);

      if (ws.projected) {
        for (std::size_t i = 0; i < ws.l1; ++i) {
          ws.f_pi[i] = ws.f[ws.static_rows[i]];
          ws.df_pi[i] = ws.df[ws.static_rows[i]];
        }
      }
      push_window(ws, ws.df_restricted(), ws.dg, k, dx_norm);

      if (k % config.alternation != 0) {
        picard_update(ws.x, ws.f, omega);
      } else {
        StabilityRecord record;
        record.iteration = k;
        const auto rows = adaptive_step(ws, config, record);
        const std::size_t cols = std::min(ws.filled_columns, rows.size());
        const std::size_t offset = ws.filled_columns - cols;
        record.l2 = rows.size();

        auto alpha = std::span<double>(ws.alpha).first(cols);
        const auto status =
            masked_lsq(ws.F_pi, ws.f_restricted(), rows, offset, cols, ws.ls_matrix, ws.ls_rhs, alpha);
        ++report.ls_solves;
        const bool ok = status == LsqStatus::Ok;
        record.ls_fallback = !ok;

        if (ok && ws.has_factor_buffer()) {
          const std::size_t ld = rows.size();
          for (std::size_t j = 0; j < cols; ++j)
            for (std::size_t i = 0; i <= j; ++i) ws.R(i, j) = ws.ls_matrix[j * ld + i];
          ws.stored_factor_size = cols;
        }

        if (observer) {
          MixingStepView view;
          view.iteration = k;
          view.n = ws.n;
          view.l1 = ws.l1;
          view.first_column = offset;
          view.columns = cols;
          view.increments = &ws.F_pi;
          view.f_restricted = ws.f_restricted();
          view.dx_norms = std::span<const double>(ws.dx_norms).subspan(offset, cols);
          view.rows = rows;
          view.masked = record.accepted;
          if (ok) view.ls_solution = alpha;
          view.record = &record;
          observer->on_mixing_step(view);
        }

        if (ok) {
          // The LS minimises |F a - f|; the mixing step uses G (-a).
          for (auto& a : alpha) a = -a;
          anderson_mix(ws.x, ws.f, omega, ws.G, std::span<const std::size_t>(ws.column_order).subspan(offset, cols),
                       alpha);
        } else {
          picard_update(ws.x, ws.f, omega);
        }
        report.mask_trace.push_back(record);
      }
      if (observer) observer->on_iterate(k, ws.x);
    }
  } catch (const NumericalBreakdown& e) {
    finish();
    throw SolveBreakdown(e, std::move(report));
  }
  finish();
  return report;
}

SolveReport solve(const FixedPointProblem& problem, const SolverConfig& config, SolveObserver* observer) {
  return solve(problem, config, problem.initial_state(), observer);
}

} // namespace aap
