#include "aap/bench.hpp"
#include "aap/errors.hpp"
#include "aap/lsq.hpp"
#include "aap/sketching.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aap::bench {

namespace {

constexpr double kAlphaTolerance = 1e-8;

double smallest_singular_value(const DenseMatrix& F, std::span<const std::size_t> rows) {
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(F.cols()));
  for (std::size_t j = 0; j < F.cols(); ++j)
    for (std::size_t i = 0; i < rows.size(); ++i)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = F(rows[i], j);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues().minCoeff();
}

StepCheck check_step(const TraceHeader& h, const TraceStep& s, EtaKind kind) {
  StepCheck c;
  c.iteration = s.iteration;
  c.masked = s.mask.has_value();
  const std::size_t l1 = h.l1, cols = s.columns;

  DenseMatrix F(l1, cols);
  for (std::size_t j = 0; j < cols; ++j) std::copy(s.increments[j].begin(), s.increments[j].end(), F.col(j).begin());
  std::vector<std::size_t> rows;
  if (s.mask) {
    rows = *s.mask;
    c.epsilon = epsilon_rhs(s.f, rows);
  } else {
    rows.resize(l1);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
  }

  if (s.accepted != c.masked) {
    c.problem = "acceptance flag disagrees with the recorded mask";
    return c;
  }
  if (s.accepted && !(s.eps_rhs > 0.0 && s.eps_rhs <= s.eps_lhs)) {
    c.problem = "accepted mask violates 0 < eps_rhs <= eps_lhs";
    return c;
  }

  std::vector<double> scratch(rows.size() * cols), rhs(rows.size()), alpha(cols);
  const bool solvable = masked_lsq(F, s.f, rows, 0, cols, scratch, rhs, alpha) == LsqStatus::Ok;
  if (!s.alpha) {
    c.fallback = true;
    if (solvable) c.problem = "fallback recorded but the restricted problem has full rank";
    return c;
  }
  if (!solvable) {
    c.problem = "restricted least-squares matrix is singular";
    return c;
  }
  double diff = 0.0, scale = 1.0;
  for (std::size_t j = 0; j < cols; ++j) {
    diff = std::max(diff, std::abs(alpha[j] - (*s.alpha)[j]));
    scale = std::max(scale, std::abs(alpha[j]));
  }
  if (diff > kAlphaTolerance * scale) {
    c.problem = "recorded coefficients do not solve the restricted problem";
    return c;
  }

  for (std::size_t j = 1; j <= cols; ++j) c.bound += eta(static_cast<int>(j), kind, h.eta_exponent);

  if (!s.mask) {
    c.hypotheses = true;
    c.delta = 0.0;
    c.bound_holds = true;
    return c;
  }

  const MaskOperator P(rows, l1);
  const std::vector<MaskOperator> masks(cols, P);
  c.delta = perturbation_norm(F, masks, *s.alpha);
  c.sigma_min = smallest_singular_value(F, rows);
  c.lipschitz = s.lipschitz;
  for (std::size_t j = 0; j < cols; ++j)
    if (s.dx_norms[j] > 0.0) c.lipschitz = std::max(c.lipschitz, norm2(F.col(j)) / s.dx_norms[j]);

  const double norm_f = norm2(s.f);
  c.hypotheses = c.lipschitz > 0.0 && norm_f > 0.0;
  for (std::size_t j = 0; j < cols && c.hypotheses; ++j) {
    const double denom = c.lipschitz * norm_f * s.dx_norms[j] * (1.0 + c.epsilon);
    const double budget = eta(static_cast<int>(j + 1), kind, h.eta_exponent) * c.sigma_min;
    if (!(s.dx_norms[j] > 0.0) || budget < denom) c.hypotheses = false;
  }
  c.bound_holds = !c.hypotheses || c.delta <= c.bound + kBoundSlack;
  if (!c.bound_holds) c.problem = "perturbation norm exceeds the eta budget";
  return c;
}

} // namespace

VerificationReport verify_theorem_trace(const Trace& trace) {
  const Adaptivity adapt = parse_adaptivity(trace.header.adapt);
  const EtaKind kind = adapt == Adaptivity::None ? EtaKind::Constant : eta_kind(adapt);
  VerificationReport report;
  for (const auto& step : trace.steps) {
    report.steps.push_back(check_step(trace.header, step, kind));
    const StepCheck& c = report.steps.back();
    if (c.hypotheses) ++report.hypothesis_steps;
    if (!c.problem.empty()) ++report.failures;
  }
  return report;
}

} // namespace aap::bench
