#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace aap {

using StateVector = std::vector<double>;

/// Residual operator T. Writes T(x) into `out`; must not retain either span.
using ResidualFn = std::function<void(std::span<const double> x, std::span<double> out)>;

/// Fixed-point map S of the form x = S(x), same calling convention as ResidualFn.
using FixedPointMap = ResidualFn;

/// Half-open index range [begin, end) owned by one physical field.
struct FieldRange {
  std::string name;
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
};

using FieldLayout = std::vector<FieldRange>;

/// A nonlinear system T(x) = 0 over n reals, in residual form.
///
/// Immutable after construction. The residual callable is shared between
/// copies and must be re-entrant, so one problem can back several concurrent
/// solves.
class FixedPointProblem {
public:
  struct Options {
    FieldLayout layout;          // empty: one field "x" covering [0, n)
    double recommended_omega = 1.0;
    int recommended_window = 10;
    StateVector initial_state;   // empty: zeros
    std::string name;
  };

  FixedPointProblem(std::size_t dimension, ResidualFn residual, Options options);
  FixedPointProblem(std::size_t dimension, ResidualFn residual)
      : FixedPointProblem(dimension, std::move(residual), Options{}) {}

  std::size_t dimension() const noexcept { return n_; }
  const FieldLayout& field_layout() const noexcept { return layout_; }
  double recommended_omega() const noexcept { return omega_; }
  int recommended_window() const noexcept { return window_; }
  const StateVector& initial_state() const noexcept { return initial_; }
  const std::string& name() const noexcept { return name_; }

  /// Raw residual evaluation without the finiteness check.
  void residual(std::span<const double> x, std::span<double> out) const { residual_(x, out); }

private:
  std::size_t n_;
  ResidualFn residual_;
  FieldLayout layout_;
  double omega_;
  int window_;
  StateVector initial_;
  std::string name_;
};

/// Evaluates f = T(x) into `out`. Throws NumericalBreakdown naming the first
/// non-finite entry.
void evaluate_residual(const FixedPointProblem& problem, std::span<const double> x, std::span<double> out);

StateVector evaluate_residual(const FixedPointProblem& problem, std::span<const double> x);

/// Wraps x = S(x) as T(x) = x - S(x). S is evaluated first, then subtracted
/// from x in place, matching the fixed-point ordering g -> f.
FixedPointProblem from_fixed_point_form(std::size_t dimension, FixedPointMap map,
                                        FixedPointProblem::Options options = {});

/// Contiguous index range registered for `field_name`. Throws UnknownField.
std::vector<std::size_t> field_indices(const FixedPointProblem& problem, const std::string& field_name);

const FieldRange& find_field(const FixedPointProblem& problem, const std::string& field_name);

} // namespace aap
