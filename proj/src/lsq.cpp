#include "aap/lsq.hpp"

#include "aap/errors.hpp"

#include <algorithm>
#include <cmath>

namespace aap {

namespace {

// Reflects column `k` (rows j..rows-1) by H = I - beta v v^T, where v is
// (v0, a[j+1:, j]).
inline void apply_reflector(const double* vtail, double v0, double beta, double* target, std::size_t len) noexcept {
  double s = v0 * target[0];
  for (std::size_t i = 1; i < len; ++i) s += vtail[i] * target[i];
  s *= beta;
  target[0] -= s * v0;
  for (std::size_t i = 1; i < len; ++i) target[i] -= s * vtail[i];
}

} // namespace

void householder_factor(std::span<double> a, std::size_t rows, std::size_t cols, std::span<double> rhs) noexcept {
  const std::size_t steps = std::min(rows, cols);
  for (std::size_t j = 0; j < steps; ++j) {
    double* colj = a.data() + j * rows + j;
    const std::size_t len = rows - j;

    double tail = 0.0;
    for (std::size_t i = 1; i < len; ++i) tail += colj[i] * colj[i];
    const double norm = std::sqrt(colj[0] * colj[0] + tail);
    if (norm == 0.0) continue;

    const double diag = -std::copysign(norm, colj[0]);
    const double v0 = colj[0] - diag;
    const double vtv = v0 * v0 + tail;
    if (vtv == 0.0) {
      colj[0] = diag;
      continue;
    }
    const double beta = 2.0 / vtv;

    for (std::size_t k = j + 1; k < cols; ++k) apply_reflector(colj, v0, beta, a.data() + k * rows + j, len);
    if (!rhs.empty()) apply_reflector(colj, v0, beta, rhs.data() + j, len);
    colj[0] = diag;
  }
}

bool has_full_rank(TriangularView r) noexcept {
  double largest = 0.0;
  for (std::size_t i = 0; i < r.size; ++i) largest = std::max(largest, std::abs(r(i, i)));
  if (largest == 0.0) return false;
  for (std::size_t i = 0; i < r.size; ++i)
    if (std::abs(r(i, i)) < kRankTolerance * largest) return false;
  return true;
}

void solve_upper(TriangularView r, std::span<double> y) noexcept {
  for (std::size_t ii = r.size; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < r.size; ++j) s -= r(ii, j) * y[j];
    y[ii] = s / r(ii, ii);
  }
}

void solve_upper_transposed(TriangularView r, std::span<double> y) noexcept {
  for (std::size_t i = 0; i < r.size; ++i) {
    double s = y[i];
    for (std::size_t j = 0; j < i; ++j) s -= r(j, i) * y[j];
    y[i] = s / r(i, i);
  }
}

LsqStatus masked_lsq(const DenseMatrix& F, std::span<const double> f, std::span<const std::size_t> rows,
                     std::size_t first_col, std::size_t cols, std::span<double> scratch,
                     std::span<double> rhs_scratch, std::span<double> alpha) noexcept {
  const std::size_t nr = rows.size();
  if (nr < cols || cols == 0) return LsqStatus::RankDeficient;
  for (std::size_t j = 0; j < cols; ++j) {
    const auto src = F.col(first_col + j);
    double* dst = scratch.data() + j * nr;
    for (std::size_t i = 0; i < nr; ++i) dst[i] = src[rows[i]];
  }
  for (std::size_t i = 0; i < nr; ++i) rhs_scratch[i] = f[rows[i]];

  householder_factor(scratch.first(nr * cols), nr, cols, rhs_scratch.first(nr));
  const TriangularView r{scratch.data(), nr, cols};
  if (!has_full_rank(r)) return LsqStatus::RankDeficient;

  std::copy_n(rhs_scratch.begin(), cols, alpha.begin());
  solve_upper(r, alpha.first(cols));
  return LsqStatus::Ok;
}

MaskedSolution qr_masked_solve(const DenseMatrix& F, std::span<const double> f,
                               std::span<const std::size_t> rows, std::size_t c) {
  if (rows.empty()) throw InvalidMask("least-squares row set is empty");
  if (c == 0 || c > F.cols()) throw InvalidConfig("column count out of range");
  if (rows.size() < c) throw RankDeficient("fewer selected rows than columns");

  std::vector<double> scratch(rows.size() * c), rhs(rows.size());
  MaskedSolution out;
  out.alpha.resize(c);
  if (masked_lsq(F, f, rows, 0, c, scratch, rhs, out.alpha) != LsqStatus::Ok)
    throw RankDeficient("restricted least-squares matrix is numerically rank deficient");

  out.factor.r = DenseMatrix(c, c);
  for (std::size_t j = 0; j < c; ++j)
    for (std::size_t i = 0; i <= j; ++i) out.factor.r(i, j) = scratch[j * rows.size() + i];
  return out;
}

double estimate_sigma_min(TriangularView r, int iters, std::span<double> scratch) {
  if (!has_full_rank(r)) throw RankDeficient("cannot estimate sigma_min of a singular factor");
  const std::size_t c = r.size;
  auto v = scratch.first(c);
  auto z = scratch.subspan(c, c);
  std::fill(v.begin(), v.end(), 1.0 / std::sqrt(static_cast<double>(c)));

  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    // z = (R^T R)^{-1} v
    std::copy(v.begin(), v.end(), z.begin());
    solve_upper_transposed(r, z);
    solve_upper(r, z);
    const double nz = norm2(z);
    lambda = 1.0 / nz;
    for (std::size_t i = 0; i < c; ++i) v[i] = z[i] / nz;
  }
  return std::sqrt(lambda);
}

double estimate_sigma_min(const TriangularFactor& r, int iters) {
  if (iters < 1) throw InvalidConfig("sigma_min estimation needs at least one iteration");
  std::vector<double> scratch(2 * r.size());
  return estimate_sigma_min(r.view(), iters, scratch);
}

} // namespace aap
