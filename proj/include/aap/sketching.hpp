#pragma once

#include "aap/dense.hpp"
#include "aap/fixed_point.hpp"
#include "aap/workspace.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aap {

/// Restriction Pi onto a strictly increasing index subset of [0, source_dim).
/// The induced projection P = Pi^T Pi zeroes the complement of `kept`.
class MaskOperator {
public:
  MaskOperator() = default;
  MaskOperator(std::vector<std::size_t> kept, std::size_t source_dim);

  static MaskOperator identity(std::size_t n);

  const std::vector<std::size_t>& kept() const noexcept { return kept_; }
  std::size_t source_dim() const noexcept { return source_dim_; }
  std::size_t size() const noexcept { return kept_.size(); }
  bool is_identity() const noexcept { return kept_.size() == source_dim_; }

  /// out = Pi v (length size())
  void restrict_to(std::span<const double> v, std::span<double> out) const noexcept;
  /// out = P v (length source_dim())
  void project(std::span<const double> v, std::span<double> out) const noexcept;

private:
  std::vector<std::size_t> kept_;
  std::size_t source_dim_ = 0;
};

/// Pi_1 from a field of the problem's layout; nullopt gives the identity.
MaskOperator build_static_mask(const FixedPointProblem& problem, const std::optional<std::string>& field);

/// L_k = max(L_{k-1}, |df| / |dx|); a stagnant step (|dx| = 0) leaves L unchanged.
double update_lipschitz(double previous, double norm_df, double norm_dx) noexcept;

/// eta_j for j >= 1: 1 (constant) or j^exponent (power).
double eta(int j, EtaKind kind, double exponent = 1.1);

/// Stability budget of the adaptive step:
///   max_j  N eta_j sigma / (L |f| |dx_j|) - 1
/// with plain 2-norms; the factor N turns them into dimension-scaled norms.
/// Columns with |dx_j| = 0 are skipped; `skipped` (optional) receives their count.
/// strict=true takes the min over j instead. Returns -1 if every column is skipped.
double epsilon_lhs(std::size_t N, double sigma, double lipschitz, double norm_f, std::span<const double> norm_dx,
                   EtaKind kind, double exponent = 1.1, bool strict = false, std::size_t* skipped = nullptr);

/// |(I - P) f| / |f| for the projection keeping the sorted index set `kept`.
/// Zero residual gives 0.
double epsilon_rhs(std::span<const double> f, std::span<const std::size_t> kept);

/// Indices of the l2 largest |f_i|, ties to the lower index, sorted ascending.
/// `order` is scratch of length f.size(); the result is its first l2 entries.
std::span<std::size_t> select_subselection(std::span<const double> f, std::size_t l2, std::span<std::size_t> order);
std::vector<std::size_t> select_subselection(std::span<const double> f, std::size_t l2);

/// Uniform sample of l2 indices out of `pool.size()` without replacement,
/// via partial Fisher-Yates over the persistent permutation `pool`. Result is
/// copied into `out` (length l2) and sorted.
void select_randomized(std::span<std::size_t> pool, std::size_t l2, Rng& rng, std::span<std::size_t> out);
std::vector<std::size_t> select_randomized(std::size_t l1, std::size_t l2, Rng& rng);

/// ell_2 = max(1, round(S/100 * ell_1)).
std::size_t sketch_rows(std::size_t l1, double sketch_percent) noexcept;

enum class MaskStatus {
  Identity,     // adaptivity off
  NoFactor,     // no R from a previous mixing step yet
  NoEstimate,   // L or |f| not available
  LhsNegative,  // eps_LHS < 0: adaptivity disabled this step
  Rejected,     // eps_RHS outside (0, eps_LHS]
  TooFewRows,   // ell_2 below the number of window columns
  Accepted,
};

const char* to_string(MaskStatus s) noexcept;

/// One record per mixing step.
struct StabilityRecord {
  int iteration = 0;
  int columns = 0;
  std::size_t l2 = 0;         // rows used by the LS solve
  double sigma_hat = 0.0;
  double lipschitz = 0.0;
  double eps_lhs = 0.0;
  double eps_rhs = 0.0;
  double eta_sum = 0.0;       // C = sum_j eta_j over window columns
  MaskStatus status = MaskStatus::Identity;
  bool accepted = false;
  bool ls_fallback = false;   // rank-deficient LS, Picard step taken instead
};

/// Decides Pi_2 for the current mixing step. On acceptance ws.selected_rows
/// holds the kept rows of the Pi_1-restricted system and the returned span
/// views them; otherwise it views ws.all_rows. The record is filled either way.
std::span<const std::size_t> adaptive_step(Workspace& ws, const SolverConfig& config, StabilityRecord& record);

/// delta = |[(I - P_j) dF_j]_j alpha|_2 over the columns of `increments`,
/// with one mask per column.
double perturbation_norm(const DenseMatrix& increments, std::span<const MaskOperator> column_masks,
                         std::span<const double> alpha);

} // namespace aap
