#include "aap/errors.hpp"
#include "aap/problems.hpp"

#include <vector>

namespace aap {

void GridSpec::validate() const {
  if (dims != 1 && dims != 2) throw InvalidConfig("grid must be 1D or 2D");
  if (points < 3) throw InvalidConfig("grid needs at least 3 points per side");
}

SparseMatrix dirichlet_laplacian(const GridSpec& grid) {
  grid.validate();
  const std::size_t k = grid.points;
  const std::size_t ni = k - 2;
  const double ih2 = 1.0 / (grid.spacing() * grid.spacing());
  std::vector<Eigen::Triplet<double>> t;

  if (grid.dims == 1) {
    for (std::size_t i = 0; i < ni; ++i) {
      const auto r = static_cast<int>(i);
      t.emplace_back(r, r, 2.0 * ih2);
      if (i > 0) t.emplace_back(r, r - 1, -ih2);
      if (i + 1 < ni) t.emplace_back(r, r + 1, -ih2);
    }
  } else {
    auto idx = [ni](std::size_t i, std::size_t j) { return static_cast<int>(j * ni + i); };
    for (std::size_t j = 0; j < ni; ++j)
      for (std::size_t i = 0; i < ni; ++i) {
        const int r = idx(i, j);
        t.emplace_back(r, r, 4.0 * ih2);
        if (i > 0) t.emplace_back(r, idx(i - 1, j), -ih2);
        if (i + 1 < ni) t.emplace_back(r, idx(i + 1, j), -ih2);
        if (j > 0) t.emplace_back(r, idx(i, j - 1), -ih2);
        if (j + 1 < ni) t.emplace_back(r, idx(i, j + 1), -ih2);
      }
  }
  const auto n = static_cast<Eigen::Index>(grid.interior_count());
  SparseMatrix L(n, n);
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

SparseMatrix neumann_stiffness(const GridSpec& grid) {
  grid.validate();
  if (grid.dims != 2) throw InvalidConfig("Neumann stiffness is only assembled in 2D");
  const std::size_t k = grid.points;
  auto idx = [k](std::size_t i, std::size_t j) { return static_cast<int>(j * k + i); };
  std::vector<Eigen::Triplet<double>> t;
  auto edge = [&t](int a, int b, double w) {
    t.emplace_back(a, a, w);
    t.emplace_back(b, b, w);
    t.emplace_back(a, b, -w);
    t.emplace_back(b, a, -w);
  };
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i + 1 < k; ++i) edge(idx(i, j), idx(i + 1, j), (j == 0 || j == k - 1) ? 0.5 : 1.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j + 1 < k; ++j) edge(idx(i, j), idx(i, j + 1), (i == 0 || i == k - 1) ? 0.5 : 1.0);
  const auto n = static_cast<Eigen::Index>(k * k);
  SparseMatrix K(n, n);
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

Eigen::VectorXd lumped_mass(const GridSpec& grid) {
  grid.validate();
  if (grid.dims != 2) throw InvalidConfig("lumped mass is only assembled in 2D");
  const std::size_t k = grid.points;
  const double h2 = grid.spacing() * grid.spacing();
  Eigen::VectorXd m(static_cast<Eigen::Index>(k * k));
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < k; ++i) {
      const double wx = (i == 0 || i == k - 1) ? 0.5 : 1.0;
      const double wy = (j == 0 || j == k - 1) ? 0.5 : 1.0;
      m[static_cast<Eigen::Index>(j * k + i)] = h2 * wx * wy;
    }
  return m;
}

} // namespace aap
