#include "aap/workspace.hpp"

#include "aap/errors.hpp"
#include "aap/sketching.hpp"

#include <numeric>

namespace aap {

bool is_randomized(Adaptivity a) noexcept {
  return a == Adaptivity::RandomizedPower || a == Adaptivity::RandomizedConstant;
}

EtaKind eta_kind(Adaptivity a) noexcept {
  return (a == Adaptivity::SubselectPower || a == Adaptivity::RandomizedPower) ? EtaKind::Power : EtaKind::Constant;
}

std::string to_string(Adaptivity a) {
  switch (a) {
  case Adaptivity::None: return "none";
  case Adaptivity::SubselectPower: return "sub-pow";
  case Adaptivity::SubselectConstant: return "sub-const";
  case Adaptivity::RandomizedPower: return "rand-pow";
  case Adaptivity::RandomizedConstant: return "rand-const";
  }
  return "none";
}

Adaptivity parse_adaptivity(const std::string& text) {
  for (auto a : {Adaptivity::None, Adaptivity::SubselectPower, Adaptivity::SubselectConstant,
                 Adaptivity::RandomizedPower, Adaptivity::RandomizedConstant})
    if (to_string(a) == text) return a;
  throw InvalidConfig("unknown adaptivity strategy '" + text +
                      "' (expected none, sub-pow, sub-const, rand-pow, rand-const)");
}

void SolverConfig::validate() const {
  if (window < 1) throw InvalidConfig("window m must be >= 1");
  if (alternation < 1) throw InvalidConfig("alternation p must be >= 1");
  if (omega && !(*omega > 0.0)) throw InvalidConfig("relaxation omega must be positive");
  if (!(rel_tolerance > 0.0)) throw InvalidConfig("relative tolerance must be positive");
  if (max_iterations < 1) throw InvalidConfig("max_iterations must be >= 1");
  if (!(sketch_percent > 0.0 && sketch_percent <= 100.0)) throw InvalidConfig("sketch percent must lie in (0, 100]");
  if (sigma_min_iterations < 1 || sigma_min_iterations > 5)
    throw InvalidConfig("sigma_min_iterations must lie in [1, 5]");
  if (mask_field && !mask_indices.empty()) throw InvalidConfig("give a mask field or explicit indices, not both");
}

Workspace allocate_workspace(std::size_t n, const SolverConfig& config, const MaskOperator& static_mask) {
  config.validate();
  if (n == 0) throw InvalidConfig("dimension must be positive");
  if (static_mask.source_dim() != n) throw InvalidMask("static mask dimension does not match the problem");
  if (static_mask.size() == 0) throw InvalidMask("static mask keeps no indices");

  Workspace ws;
  ws.n = n;
  ws.m = static_cast<std::size_t>(config.window);
  ws.projected = !static_mask.is_identity();
  ws.l1 = static_mask.size();

  ws.x.assign(n, 0.0);
  ws.f.assign(n, 0.0);
  ws.g.assign(n, 0.0);
  ws.df.assign(n, 0.0);
  ws.dg.assign(n, 0.0);
  if (ws.projected) {
    ws.f_pi.assign(ws.l1, 0.0);
    ws.df_pi.assign(ws.l1, 0.0);
  }

  ws.G = DenseMatrix(n, ws.m);
  ws.F_pi = DenseMatrix(ws.l1, ws.m);
  if (config.adaptivity != Adaptivity::None) ws.R = DenseMatrix(ws.m, ws.m);

  ws.column_order.assign(ws.m, 0);
  ws.dx_norms.assign(ws.m, 0.0);

  ws.static_rows = static_mask.kept();
  ws.all_rows.resize(ws.l1);
  std::iota(ws.all_rows.begin(), ws.all_rows.end(), std::size_t{0});
  if (config.adaptivity != Adaptivity::None) {
    ws.row_pool = ws.all_rows;
    ws.selected_rows.assign(ws.l1, 0);
  }
  ws.ls_matrix.assign(ws.l1 * ws.m, 0.0);
  ws.ls_rhs.assign(ws.l1, 0.0);
  ws.alpha.assign(ws.m, 0.0);
  ws.sigma_scratch.assign(2 * ws.m, 0.0);
  ws.rng.seed(config.rng_seed);
  return ws;
}

Workspace allocate_workspace(const FixedPointProblem& problem, const SolverConfig& config) {
  config.validate();
  if (!config.mask_indices.empty())
    return allocate_workspace(problem.dimension(), config, MaskOperator(config.mask_indices, problem.dimension()));
  return allocate_workspace(problem.dimension(), config, build_static_mask(problem, config.mask_field));
}

} // namespace aap
