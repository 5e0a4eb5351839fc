#include "aap/errors.hpp"
#include "aap/lsq.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace aap;

namespace {

DenseMatrix to_dense(const Eigen::MatrixXd& M) {
  DenseMatrix D(M.rows(), M.cols());
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < M.rows(); ++i) D(i, j) = M(i, j);
  return D;
}

Eigen::MatrixXd restrict_rows(const Eigen::MatrixXd& M, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(rows.size(), M.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = M.row(rows[i]);
  return out;
}

Eigen::MatrixXd as_eigen(const TriangularFactor& R) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(R.size(), R.size());
  for (std::size_t j = 0; j < R.size(); ++j)
    for (std::size_t i = 0; i <= j; ++i) M(i, j) = R.view()(i, j);
  return M;
}

TriangularFactor from_eigen(const Eigen::MatrixXd& M) {
  TriangularFactor R{DenseMatrix(M.rows(), M.cols())};
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i <= j; ++i) R.r(i, j) = M(i, j);
  return R;
}

// Upper-triangular factor with prescribed singular values.
Eigen::MatrixXd triangular_with_spectrum(const Eigen::VectorXd& s, std::uint64_t seed) {
  const int n = static_cast<int>(s.size());
  const Eigen::MatrixXd M =
      testing::random_orthogonal(n, seed) * s.asDiagonal() * testing::random_orthogonal(n, seed + 1000).transpose();
  Eigen::MatrixXd R = M.householderQr().matrixQR().triangularView<Eigen::Upper>();
  return R;
}

std::vector<std::size_t> random_rows(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

} // namespace

TEST_CASE("qr_masked_solve small cases") {
  SUBCASE("single column, all rows") {
    DenseMatrix F(2, 1);
    F(0, 0) = 1;
    const std::vector<double> f{1, 0};
    const std::vector<std::size_t> rows{0, 1};
    const auto s = qr_masked_solve(F, f, rows, 1);
    CHECK(s.alpha[0] == doctest::Approx(1.0));
    CHECK(std::abs(s.factor.view()(0, 0)) == doctest::Approx(1.0));
  }
  SUBCASE("one kept row") {
    DenseMatrix F(2, 1);
    F(0, 0) = 1;
    F(1, 0) = 5;
    const std::vector<double> f{2, 100};
    const std::vector<std::size_t> rows{0};
    CHECK(qr_masked_solve(F, f, rows, 1).alpha[0] == doctest::Approx(2.0));
  }
}

TEST_CASE("qr_masked_solve matches the normal equations on a random restricted system") {
  const Eigen::MatrixXd M = testing::random_matrix(40, 5, 11);
  const Eigen::VectorXd b = testing::random_matrix(40, 1, 12);
  const auto rows = random_rows(40, 20, 13);
  const DenseMatrix F = to_dense(M);
  const DenseMatrix before = F;
  const std::vector<double> f(b.data(), b.data() + 40);

  const auto s = qr_masked_solve(F, f, rows, 5);
  const Eigen::MatrixXd Mr = restrict_rows(M, rows);
  const Eigen::VectorXd br = restrict_rows(b, rows);
  const Eigen::VectorXd ne = (Mr.transpose() * Mr).ldlt().solve(Mr.transpose() * br);
  const double err = (Eigen::Map<const Eigen::VectorXd>(s.alpha.data(), 5) - ne).norm() / ne.norm();
  CHECK(err < 1e-10);
  CHECK(std::equal(F.data(), F.data() + 200, before.data()));

  // R^T R reproduces the restricted Gram matrix
  const Eigen::MatrixXd R = as_eigen(s.factor);
  const Eigen::MatrixXd gram = Mr.transpose() * Mr;
  CHECK((gram - R.transpose() * R).norm() <= 1e-12 * gram.norm());
}

TEST_CASE("all rows reproduce the unrestricted least-squares solution") {
  const Eigen::MatrixXd M = testing::random_matrix(30, 4, 21);
  const Eigen::VectorXd b = testing::random_matrix(30, 1, 22);
  std::vector<std::size_t> rows(30);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto s = qr_masked_solve(to_dense(M), std::vector<double>(b.data(), b.data() + 30), rows, 4);
  const Eigen::VectorXd ref = M.colPivHouseholderQr().solve(b);
  for (int j = 0; j < 4; ++j) CHECK(s.alpha[j] == doctest::Approx(ref(j)).epsilon(1e-12));

  // fewer columns than stored: the leading c columns only
  const auto s2 = qr_masked_solve(to_dense(M), std::vector<double>(b.data(), b.data() + 30), rows, 2);
  const Eigen::VectorXd ref2 = M.leftCols(2).colPivHouseholderQr().solve(b);
  for (int j = 0; j < 2; ++j) CHECK(s2.alpha[j] == doctest::Approx(ref2(j)).epsilon(1e-12));
}

TEST_CASE("rank deficiency is detected") {
  DenseMatrix F(4, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    F(i, 0) = double(i + 1);
    F(i, 1) = 2.0 * double(i + 1);
  }
  const std::vector<double> f{1, 2, 3, 4};
  const std::vector<std::size_t> rows{0, 1, 2, 3};
  CHECK_THROWS_AS(qr_masked_solve(F, f, rows, 2), RankDeficient);

  std::vector<double> scratch(8), rhs(4), alpha(2);
  CHECK(masked_lsq(F, f, rows, 0, 2, scratch, rhs, alpha) == LsqStatus::RankDeficient);

  const std::vector<std::size_t> one{1};
  CHECK_THROWS_AS(qr_masked_solve(F, f, one, 2), RankDeficient);

  DenseMatrix Z(3, 1);
  const std::vector<std::size_t> r3{0, 1, 2};
  CHECK_THROWS_AS(qr_masked_solve(Z, std::vector<double>{1, 1, 1}, r3, 1), RankDeficient);
}

TEST_CASE("masked_lsq agrees with qr_masked_solve and honours the column offset") {
  const Eigen::MatrixXd M = testing::random_matrix(25, 6, 31);
  const Eigen::VectorXd b = testing::random_matrix(25, 1, 32);
  const DenseMatrix F = to_dense(M);
  const std::vector<double> f(b.data(), b.data() + 25);
  const auto rows = random_rows(25, 12, 33);

  std::vector<double> scratch(12 * 4), rhs(12), alpha(4);
  REQUIRE(masked_lsq(F, f, rows, 2, 4, scratch, rhs, alpha) == LsqStatus::Ok);
  const Eigen::MatrixXd Mr = restrict_rows(M, rows).rightCols(4);
  const Eigen::VectorXd ref = Mr.colPivHouseholderQr().solve(restrict_rows(b, rows));
  for (int j = 0; j < 4; ++j) CHECK(alpha[j] == doctest::Approx(ref(j)).epsilon(1e-11));
}

TEST_CASE("triangular solves") {
  Eigen::MatrixXd R(3, 3);
  R << 2, 1, -1, 0, 3, 0.5, 0, 0, -4;
  const auto T = from_eigen(R);
  const Eigen::VectorXd y(Eigen::Vector3d(1, -2, 0.5));
  std::vector<double> z(y.data(), y.data() + 3);
  solve_upper(T.view(), z);
  const Eigen::VectorXd ref = R.triangularView<Eigen::Upper>().solve(y);
  for (int i = 0; i < 3; ++i) CHECK(z[i] == doctest::Approx(ref(i)));

  std::vector<double> w(y.data(), y.data() + 3);
  solve_upper_transposed(T.view(), w);
  const Eigen::VectorXd ref_t = R.transpose().triangularView<Eigen::Lower>().solve(y);
  for (int i = 0; i < 3; ++i) CHECK(w[i] == doctest::Approx(ref_t(i)));
}

TEST_CASE("estimate_sigma_min examples") {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D(0, 0) = 3;
  D(1, 1) = 1;
  CHECK(estimate_sigma_min(from_eigen(D), 5) == doctest::Approx(1.0).epsilon(1e-6));

  for (int n : {1, 4, 10}) CHECK(estimate_sigma_min(from_eigen(Eigen::MatrixXd::Identity(n, n)), 3) == 1.0);

  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(3, 3);
  S(2, 2) = 0.0;
  CHECK_THROWS_AS(estimate_sigma_min(from_eigen(S), 3), RankDeficient);
}

TEST_CASE("estimate_sigma_min on gapped random factors") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int close = 0;
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd s(10);
    for (int i = 0; i < 9; ++i) s(i) = 0.5 + 9.5 * unif(rng);
    std::sort(s.data(), s.data() + 9, std::greater<>());
    s(9) = s(8) * (0.02 + 0.48 * unif(rng));  // sigma_min / sigma_2nd <= 0.5
    const auto R = from_eigen(triangular_with_spectrum(s, 500 + t));
    const double truth = Eigen::JacobiSVD<Eigen::MatrixXd>(as_eigen(R)).singularValues().minCoeff();

    double previous = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= 5; ++it) {
      const double est = estimate_sigma_min(R, it);
      CHECK(est <= previous * (1 + 1e-12));
      previous = est;
    }
    CHECK(previous >= truth * 0.9);
    if (std::abs(previous - truth) <= 0.1 * truth) ++close;
  }
  CHECK(close >= 95);
}
