#include "aap/sketching.hpp"

#include "aap/errors.hpp"
#include "aap/lsq.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aap {

MaskOperator::MaskOperator(std::vector<std::size_t> kept, std::size_t source_dim)
    : kept_(std::move(kept)), source_dim_(source_dim) {
  if (kept_.empty()) throw InvalidMask("mask keeps no indices");
  for (std::size_t i = 0; i < kept_.size(); ++i) {
    if (kept_[i] >= source_dim_) throw InvalidMask("mask index " + std::to_string(kept_[i]) + " out of range");
    if (i > 0 && kept_[i] <= kept_[i - 1]) throw InvalidMask("mask indices must be strictly increasing");
  }
}

MaskOperator MaskOperator::identity(std::size_t n) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return MaskOperator(std::move(all), n);
}

void MaskOperator::restrict_to(std::span<const double> v, std::span<double> out) const noexcept {
  for (std::size_t i = 0; i < kept_.size(); ++i) out[i] = v[kept_[i]];
}

void MaskOperator::project(std::span<const double> v, std::span<double> out) const noexcept {
  std::fill(out.begin(), out.end(), 0.0);
  for (auto i : kept_) out[i] = v[i];
}

MaskOperator build_static_mask(const FixedPointProblem& problem, const std::optional<std::string>& field) {
  if (!field) return MaskOperator::identity(problem.dimension());
  return MaskOperator(field_indices(problem, *field), problem.dimension());
}

double update_lipschitz(double previous, double norm_df, double norm_dx) noexcept {
  if (norm_dx == 0.0) return previous;
  return std::max(previous, norm_df / norm_dx);
}

double eta(int j, EtaKind kind, double exponent) {
  if (j < 1) throw InvalidConfig("eta index starts at 1");
  return kind == EtaKind::Constant ? 1.0 : std::pow(static_cast<double>(j), exponent);
}

double epsilon_lhs(std::size_t N, double sigma, double lipschitz, double norm_f, std::span<const double> norm_dx,
                   EtaKind kind, double exponent, bool strict, std::size_t* skipped) {
  std::size_t skip = 0;
  bool any = false;
  double best = 0.0;
  for (std::size_t j = 0; j < norm_dx.size(); ++j) {
    if (norm_dx[j] == 0.0) {
      ++skip;
      continue;
    }
    const double bound = static_cast<double>(N) * eta(static_cast<int>(j + 1), kind, exponent) * sigma /
                         (lipschitz * norm_f * norm_dx[j]);
    if (!any)
      best = bound;
    else
      best = strict ? std::min(best, bound) : std::max(best, bound);
    any = true;
  }
  if (skipped) *skipped = skip;
  return any ? best - 1.0 : -1.0;
}

double epsilon_rhs(std::span<const double> f, std::span<const std::size_t> kept) {
  double total = 0.0, removed = 0.0;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double sq = f[i] * f[i];
    total += sq;
    if (cursor < kept.size() && kept[cursor] == i)
      ++cursor;
    else
      removed += sq;
  }
  if (total == 0.0) return 0.0;
  return std::sqrt(removed) / std::sqrt(total);
}

std::span<std::size_t> select_subselection(std::span<const double> f, std::size_t l2, std::span<std::size_t> order) {
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto larger = [f](std::size_t a, std::size_t b) {
    const double fa = std::abs(f[a]), fb = std::abs(f[b]);
    return fa > fb || (fa == fb && a < b);
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(l2), order.end(), larger);
  auto picked = order.first(l2);
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::vector<std::size_t> select_subselection(std::span<const double> f, std::size_t l2) {
  if (l2 < 1 || l2 > f.size()) throw InvalidConfig("subselection size out of range");
  std::vector<std::size_t> order(f.size());
  auto picked = select_subselection(f, l2, order);
  return {picked.begin(), picked.end()};
}

void select_randomized(std::span<std::size_t> pool, std::size_t l2, Rng& rng, std::span<std::size_t> out) {
  const std::size_t l1 = pool.size();
  for (std::size_t i = 0; i < l2; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, l1 - 1);
    std::swap(pool[i], pool[pick(rng)]);
    out[i] = pool[i];
  }
  std::sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(l2));
}

std::vector<std::size_t> select_randomized(std::size_t l1, std::size_t l2, Rng& rng) {
  if (l2 < 1 || l2 > l1) throw InvalidConfig("randomized selection size out of range");
  std::vector<std::size_t> pool(l1), out(l2);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  select_randomized(pool, l2, rng, out);
  return out;
}

std::size_t sketch_rows(std::size_t l1, double sketch_percent) noexcept {
  const auto rows = static_cast<std::size_t>(std::lround(sketch_percent / 100.0 * static_cast<double>(l1)));
  return std::clamp<std::size_t>(rows, 1, l1);
}

const char* to_string(MaskStatus s) noexcept {
  switch (s) {
  case MaskStatus::Identity: return "identity";
  case MaskStatus::NoFactor: return "no-factor";
  case MaskStatus::NoEstimate: return "no-estimate";
  case MaskStatus::LhsNegative: return "lhs-negative";
  case MaskStatus::Rejected: return "rejected";
  case MaskStatus::TooFewRows: return "too-few-rows";
  case MaskStatus::Accepted: return "accepted";
  }
  return "identity";
}

std::span<const std::size_t> adaptive_step(Workspace& ws, const SolverConfig& config, StabilityRecord& record) {
  const std::span<const std::size_t> all(ws.all_rows);
  record.columns = static_cast<int>(ws.filled_columns);
  record.l2 = ws.l1;
  record.lipschitz = ws.lipschitz;
  record.accepted = false;

  if (config.adaptivity == Adaptivity::None) {
    record.status = MaskStatus::Identity;
    return all;
  }

  const EtaKind kind = eta_kind(config.adaptivity);
  record.eta_sum = 0.0;
  for (std::size_t j = 1; j <= ws.filled_columns; ++j)
    record.eta_sum += eta(static_cast<int>(j), kind, config.eta_exponent);

  if (ws.stored_factor_size == 0) {
    record.status = MaskStatus::NoFactor;
    return all;
  }

  const auto f = ws.f_restricted();
  const double norm_f = norm2(f);
  if (!(ws.lipschitz > 0.0) || norm_f == 0.0) {
    record.status = MaskStatus::NoEstimate;
    return all;
  }

  const TriangularView r{ws.R.data(), ws.R.rows(), ws.stored_factor_size};
  record.sigma_hat = estimate_sigma_min(r, config.sigma_min_iterations, ws.sigma_scratch);
  record.eps_lhs = epsilon_lhs(ws.n, record.sigma_hat, ws.lipschitz, norm_f,
                               std::span<const double>(ws.dx_norms).first(ws.filled_columns), kind,
                               config.eta_exponent, config.strict_lhs);
  if (record.eps_lhs < 0.0) {
    record.status = MaskStatus::LhsNegative;
    return all;
  }

  const std::size_t l2 = sketch_rows(ws.l1, config.sketch_percent);
  if (l2 < ws.filled_columns) {
    record.status = MaskStatus::TooFewRows;
    return all;
  }

  std::span<std::size_t> picked;
  if (is_randomized(config.adaptivity)) {
    picked = std::span<std::size_t>(ws.selected_rows).first(l2);
    select_randomized(ws.row_pool, l2, ws.rng, picked);
  } else {
    picked = select_subselection(f, l2, ws.selected_rows);
  }

  record.eps_rhs = epsilon_rhs(f, picked);
  if (record.eps_rhs > 0.0 && record.eps_rhs <= record.eps_lhs) {
    record.status = MaskStatus::Accepted;
    record.accepted = true;
    record.l2 = l2;
    return picked;
  }
  record.status = MaskStatus::Rejected;
  return all;
}

double perturbation_norm(const DenseMatrix& increments, std::span<const MaskOperator> column_masks,
                         std::span<const double> alpha) {
  if (column_masks.size() != increments.cols() || alpha.size() != increments.cols())
    throw InvalidConfig("perturbation_norm: masks and weights must match the increment columns");
  std::vector<double> sum(increments.rows(), 0.0);
  for (std::size_t j = 0; j < increments.cols(); ++j) {
    const auto& mask = column_masks[j];
    if (mask.is_identity()) continue;
    const auto col = increments.col(j);
    const auto& kept = mask.kept();
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < col.size(); ++i) {
      if (cursor < kept.size() && kept[cursor] == i) {
        ++cursor;
        continue;
      }
      sum[i] += alpha[j] * col[i];
    }
  }
  return norm2(sum);
}

} // namespace aap
