#pragma once

#include "aap/dense.hpp"
#include "aap/fixed_point.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace aap {

enum class Adaptivity { None, SubselectPower, SubselectConstant, RandomizedPower, RandomizedConstant };

enum class EtaKind { Constant, Power };

bool is_randomized(Adaptivity a) noexcept;
EtaKind eta_kind(Adaptivity a) noexcept;

/// CLI spelling: none, sub-pow, sub-const, rand-pow, rand-const.
std::string to_string(Adaptivity a);
Adaptivity parse_adaptivity(const std::string& text);

struct SolverConfig {
  int window = 10;                        // m
  int alternation = 1;                    // p
  std::optional<double> omega;            // unset: problem's recommended omega
  double rel_tolerance = 1e-6;
  int max_iterations = 1000;

  // Static restriction Pi_1: a field name or an explicit index set (not both).
  std::optional<std::string> mask_field;
  std::vector<std::size_t> mask_indices;

  Adaptivity adaptivity = Adaptivity::None;
  double sketch_percent = 30.0;           // S
  double eta_exponent = 1.1;
  int sigma_min_iterations = 3;
  bool strict_lhs = false;                // min over window columns instead of max
  std::uint64_t rng_seed = 0;

  void validate() const;
};

using Rng = std::mt19937_64;

/// Buffers for one solve, allocated once by allocate_workspace.
///
/// F_pi keeps its columns in chronological order (shift on append). G is
/// written circulantly; column_order maps chronological position to the
/// physical column of G.
struct Workspace {
  std::size_t n = 0;
  std::size_t l1 = 0;
  std::size_t m = 0;
  bool projected = false;  // Pi_1 != identity

  std::vector<double> x, f, g, df, dg;
  std::vector<double> f_pi, df_pi;  // length l1, empty when !projected

  DenseMatrix G;     // n x m
  DenseMatrix F_pi;  // l1 x m
  DenseMatrix R;     // m x m, 0 x 0 unless adaptive

  std::size_t filled_columns = 0;
  std::size_t newest_column = 0;
  std::vector<std::size_t> column_order;  // size m, first filled_columns valid
  std::vector<double> dx_norms;           // |dx| per F_pi column, chronological
  double lipschitz = 0.0;
  std::size_t stored_factor_size = 0;     // columns of the R kept from the last mixing step

  std::vector<std::size_t> static_rows;   // Pi_1 kept indices into [0, n)
  std::vector<std::size_t> all_rows;      // 0..l1-1
  std::vector<std::size_t> row_pool;      // randomized selection state
  std::vector<std::size_t> selected_rows; // Pi_2 kept indices into [0, l1)
  std::vector<double> ls_matrix;          // l1 x m
  std::vector<double> ls_rhs;             // l1
  std::vector<double> alpha;              // m
  std::vector<double> sigma_scratch;      // 2m

  Rng rng;

  bool has_factor_buffer() const noexcept { return !R.empty(); }

  std::span<const double> f_restricted() const noexcept { return projected ? f_pi : f; }
  std::span<const double> df_restricted() const noexcept { return projected ? df_pi : df; }
};

class MaskOperator;

Workspace allocate_workspace(std::size_t n, const SolverConfig& config, const MaskOperator& static_mask);
Workspace allocate_workspace(const FixedPointProblem& problem, const SolverConfig& config);

} // namespace aap
