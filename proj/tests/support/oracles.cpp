#include "oracles.hpp"

#include <random>

namespace aap::testing {

std::vector<Eigen::VectorXd> gmres_iterates(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                            const Eigen::VectorXd& x0, int iters) {
  const Eigen::Index n = A.rows();
  const Eigen::VectorXd r0 = b - A * x0;
  const double beta = r0.norm();
  std::vector<Eigen::VectorXd> xs{x0};
  if (beta == 0.0) return xs;

  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, iters + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(iters + 1, iters);
  V.col(0) = r0 / beta;
  for (int k = 0; k < iters; ++k) {
    Eigen::VectorXd w = A * V.col(k);
    for (int i = 0; i <= k; ++i) {
      H(i, k) = V.col(i).dot(w);
      w -= H(i, k) * V.col(i);
    }
    H(k + 1, k) = w.norm();

    // min |beta e1 - H y| over the (k+2) x (k+1) Hessenberg block
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(k + 2);
    e1(0) = beta;
    const Eigen::MatrixXd Hk = H.topLeftCorner(k + 2, k + 1);
    const Eigen::VectorXd y = Hk.colPivHouseholderQr().solve(e1);
    xs.push_back(x0 + V.leftCols(k + 1) * y);

    if (H(k + 1, k) <= 1e-14 * beta) break;
    V.col(k + 1) = w / H(k + 1, k);
  }
  return xs;
}

Eigen::MatrixXd dense_dirichlet_laplacian(int points) {
  const int m = points - 2;
  const double h = 1.0 / (points - 1);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m * m, m * m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const int r = j * m + i;
      L(r, r) = 4.0;
      if (i > 0) L(r, r - 1) = -1.0;
      if (i + 1 < m) L(r, r + 1) = -1.0;
      if (j > 0) L(r, r - m) = -1.0;
      if (j + 1 < m) L(r, r + m) = -1.0;
    }
  return L / (h * h);
}

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = normal(rng);
  return M;
}

Eigen::MatrixXd random_orthogonal(int n, std::uint64_t seed) {
  const Eigen::MatrixXd M = random_matrix(n, n, seed);
  return M.householderQr().householderQ() * Eigen::MatrixXd::Identity(n, n);
}

double spectral_norm(const Eigen::MatrixXd& A) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
}

} // namespace aap::testing
