#include "aap/fixed_point.hpp"

#include "aap/errors.hpp"

#include <cmath>
#include <numeric>

namespace aap {

namespace {

void validate_layout(const FieldLayout& layout, std::size_t n) {
  std::size_t cursor = 0;
  for (const auto& field : layout) {
    if (field.begin != cursor || field.end <= field.begin)
      throw InvalidConfig("field '" + field.name + "' does not continue the layout at index " +
                          std::to_string(cursor));
    cursor = field.end;
  }
  if (cursor != n)
    throw InvalidConfig("field layout covers [0, " + std::to_string(cursor) + ") but dimension is " +
                        std::to_string(n));
}

} // namespace

FixedPointProblem::FixedPointProblem(std::size_t dimension, ResidualFn residual, Options options)
    : n_(dimension), residual_(std::move(residual)), layout_(std::move(options.layout)),
      omega_(options.recommended_omega), window_(options.recommended_window),
      initial_(std::move(options.initial_state)), name_(std::move(options.name)) {
  if (n_ == 0) throw InvalidConfig("problem dimension must be positive");
  if (!residual_) throw InvalidConfig("problem requires a residual operator");
  if (!(omega_ > 0.0)) throw InvalidConfig("recommended omega must be positive");
  if (window_ < 1) throw InvalidConfig("recommended window must be positive");
  if (layout_.empty()) layout_.push_back({"x", 0, n_});
  validate_layout(layout_, n_);
  if (initial_.empty()) initial_.assign(n_, 0.0);
  if (initial_.size() != n_) throw InvalidConfig("initial state has wrong length");
}

void evaluate_residual(const FixedPointProblem& problem, std::span<const double> x, std::span<double> out) {
  problem.residual(x, out);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!std::isfinite(out[i])) throw NumericalBreakdown(i, out[i]);
}

StateVector evaluate_residual(const FixedPointProblem& problem, std::span<const double> x) {
  if (x.size() != problem.dimension()) throw InvalidConfig("state vector has wrong length");
  StateVector f(problem.dimension());
  evaluate_residual(problem, x, f);
  return f;
}

FixedPointProblem from_fixed_point_form(std::size_t dimension, FixedPointMap map,
                                        FixedPointProblem::Options options) {
  auto residual = [map = std::move(map)](std::span<const double> x, std::span<double> out) {
    map(x, out);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - out[i];
  };
  return FixedPointProblem(dimension, std::move(residual), std::move(options));
}

const FieldRange& find_field(const FixedPointProblem& problem, const std::string& field_name) {
  for (const auto& field : problem.field_layout())
    if (field.name == field_name) return field;
  std::string valid;
  for (const auto& field : problem.field_layout()) valid += (valid.empty() ? "" : ", ") + field.name;
  throw UnknownField("unknown field '" + field_name + "' (valid: " + valid + ")");
}

std::vector<std::size_t> field_indices(const FixedPointProblem& problem, const std::string& field_name) {
  const auto& field = find_field(problem, field_name);
  std::vector<std::size_t> idx(field.size());
  std::iota(idx.begin(), idx.end(), field.begin);
  return idx;
}

} // namespace aap
