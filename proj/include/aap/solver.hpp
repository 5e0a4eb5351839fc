#pragma once

#include "aap/errors.hpp"
#include "aap/fixed_point.hpp"
#include "aap/lsq.hpp"
#include "aap/sketching.hpp"
#include "aap/workspace.hpp"

#include <span>
#include <vector>

namespace aap {

struct SolveReport {
  bool converged = false;
  int iterations = 0;                      // residual evaluations after the initial one
  int residual_evaluations = 0;            // iterations + 1
  int ls_solves = 0;
  std::vector<double> residual_history;    // |f^k| / |f^0|, k = 0..iterations
  std::vector<StabilityRecord> mask_trace; // one per mixing step
  double wall_time_seconds = 0.0;
  StateVector final_state;
};

/// Raised when a residual evaluation breaks down mid-solve; carries the
/// report accumulated so far.
class SolveBreakdown : public NumericalBreakdown {
public:
  SolveBreakdown(const NumericalBreakdown& cause, SolveReport partial)
      : NumericalBreakdown(cause), partial_(std::move(partial)) {}

  const SolveReport& partial_report() const noexcept { return partial_; }

private:
  SolveReport partial_;
};

/// Everything the trace writer needs about one mixing step. Views are only
/// valid during the callback.
struct MixingStepView {
  int iteration = 0;
  std::size_t n = 0;
  std::size_t l1 = 0;
  std::size_t first_column = 0;              // columns used: [first_column, first_column + columns)
  std::size_t columns = 0;
  const DenseMatrix* increments = nullptr;   // F_pi, chronological
  std::span<const double> f_restricted;
  std::span<const double> dx_norms;          // chronological, length columns
  std::span<const std::size_t> rows;         // rows handed to the LS solve (into [0, l1))
  bool masked = false;                       // rows is a strict subset
  std::span<const double> ls_solution;       // minimiser of |F alpha - f| on `rows`; empty on fallback
  const StabilityRecord* record = nullptr;
};

/// Hooks into a running solve. Default implementations do nothing.
class SolveObserver {
public:
  virtual ~SolveObserver() = default;
  /// Called once per loop iteration with the updated iterate x^{k+1}.
  virtual void on_iterate(int /*k*/, std::span<const double> /*x*/) {}
  virtual void on_mixing_step(const MixingStepView& /*step*/) {}
};

/// x <- x - omega f, in place.
void picard_update(std::span<double> x, std::span<const double> f, double omega) noexcept;

/// Shifts the previous f, g into the increment buffers, evaluates the
/// residual once at ws.x, and completes df = f_new - f_old, dg = g_new - g_old.
void update_increments(Workspace& ws, const FixedPointProblem& problem, double omega);

/// Appends the restricted increment to F_pi (dropping the oldest column when
/// full) and writes dg into column (k + 1) mod m of G.
void push_window(Workspace& ws, std::span<const double> df_restricted, std::span<const double> dg, int k,
                 double dx_norm = 0.0);

/// x <- x - omega f + G alpha with alpha in chronological order.
void anderson_update(Workspace& ws, std::span<const double> alpha, double omega) noexcept;

/// Shared mixing kernel: x <- x - omega f, then x += alpha_j G(:, order_j)
/// for j oldest to newest.
void anderson_mix(std::span<double> x, std::span<const double> f, double omega, const DenseMatrix& G,
                  std::span<const std::size_t> order, std::span<const double> alpha) noexcept;

/// Two-level sketching AAP.
SolveReport solve(const FixedPointProblem& problem, const SolverConfig& config, std::span<const double> x0,
                  SolveObserver* observer = nullptr);

SolveReport solve(const FixedPointProblem& problem, const SolverConfig& config, SolveObserver* observer = nullptr);

/// Plain alternating Anderson-Picard with full-length shift-based F and G and
/// no masks. Kept as the reference the two-level path is tested against.
SolveReport solve_reference(const FixedPointProblem& problem, const SolverConfig& config,
                            std::span<const double> x0, SolveObserver* observer = nullptr);

} // namespace aap
