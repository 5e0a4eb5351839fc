#pragma once

#include "aap/dense.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace aap {

/// Relative threshold on |R_jj| / max|R_ii| below which a factor is treated as singular.
inline constexpr double kRankTolerance = 1e-14;

/// Non-owning view of an upper-triangular c x c factor stored column-major
/// with leading dimension `ld`.
struct TriangularView {
  const double* data = nullptr;
  std::size_t ld = 0;
  std::size_t size = 0;

  double operator()(std::size_t i, std::size_t j) const noexcept { return data[j * ld + i]; }
};

enum class LsqStatus { Ok, RankDeficient };

/// Householder QR of the column-major rows x cols block `a` (leading dimension
/// `rows`), applied to `rhs` as well when non-empty. On return the upper
/// triangle of the leading cols x cols block holds R and the first `cols`
/// entries of `rhs` hold Q^T rhs. Performs no allocation.
void householder_factor(std::span<double> a, std::size_t rows, std::size_t cols, std::span<double> rhs) noexcept;

/// True if the diagonal of R passes the relative rank test.
bool has_full_rank(TriangularView r) noexcept;

/// Solves R z = y in place (back substitution).
void solve_upper(TriangularView r, std::span<double> y) noexcept;

/// Solves R^T z = y in place (forward substitution).
void solve_upper_transposed(TriangularView r, std::span<double> y) noexcept;

/// Allocation-free masked least-squares solve used inside the iteration.
///
/// Gathers rows `rows` of columns [first_col, first_col + cols) of `F` into
/// `scratch` (at least rows.size() * cols), the same rows of `f` into
/// `rhs_scratch`, factors, and writes the minimiser of
/// |F(rows, cols) a - f(rows)| into `alpha`. R is left in `scratch` with
/// leading dimension rows.size().
LsqStatus masked_lsq(const DenseMatrix& F, std::span<const double> f, std::span<const std::size_t> rows,
                     std::size_t first_col, std::size_t cols, std::span<double> scratch,
                     std::span<double> rhs_scratch, std::span<double> alpha) noexcept;

/// Upper-triangular factor with its own storage.
struct TriangularFactor {
  DenseMatrix r;

  std::size_t size() const noexcept { return r.cols(); }
  TriangularView view() const noexcept { return {r.data(), r.rows(), r.cols()}; }
};

struct MaskedSolution {
  std::vector<double> alpha;
  TriangularFactor factor;
};

/// Minimises |F(rows, 0:c) alpha - f(rows)|_2 by Householder QR on the
/// restricted rows. F is left untouched. Throws RankDeficient.
MaskedSolution qr_masked_solve(const DenseMatrix& F, std::span<const double> f,
                               std::span<const std::size_t> rows, std::size_t c);

/// Smallest singular value of R from `iters` inverse power iterations on R^T R,
/// started from the normalised all-ones vector. `scratch` needs 2 * size
/// entries. Returns a value >= sigma_min(R) that is non-increasing in iters.
double estimate_sigma_min(TriangularView r, int iters, std::span<double> scratch);

double estimate_sigma_min(const TriangularFactor& r, int iters);

} // namespace aap
