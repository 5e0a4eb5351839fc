#include "aap/errors.hpp"
#include "aap/problems.hpp"

#include <Eigen/Eigenvalues>

#include <memory>
#include <random>

namespace aap {

LinearSystem generate_spd_system(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw InvalidConfig("linear problem needs n >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto N = static_cast<Eigen::Index>(n);

  Eigen::MatrixXd S(N, N);
  for (Eigen::Index j = 0; j < N; ++j)
    for (Eigen::Index i = 0; i <= j; ++i) S(i, j) = S(j, i) = normal(rng);

  // Affine map of the spectrum onto [0.1, 2].
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double scale = (2.0 - 0.1) / (hi - lo);

  LinearSystem sys;
  sys.A = scale * S;
  sys.A.diagonal().array() += 0.1 - scale * lo;
  sys.b.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) sys.b[i] = normal(rng);
  return sys;
}

FixedPointProblem make_linear(Eigen::MatrixXd A, Eigen::VectorXd b, double omega) {
  if (A.rows() != A.cols() || A.rows() != b.size() || A.rows() == 0)
    throw InvalidConfig("linear problem needs a square A matching b");
  const auto n = static_cast<std::size_t>(A.rows());
  auto data = std::make_shared<const LinearSystem>(LinearSystem{std::move(A), std::move(b)});

  FixedPointProblem::Options opts;
  opts.layout = {{"x", 0, n}};
  opts.recommended_omega = omega;
  opts.name = "linear";
  return FixedPointProblem(
      n,
      [data](std::span<const double> x, std::span<double> out) {
        const auto N = static_cast<Eigen::Index>(x.size());
        const Eigen::Map<const Eigen::VectorXd> xm(x.data(), N);
        Eigen::Map<Eigen::VectorXd> om(out.data(), N);
        om.noalias() = data->A * xm;
        om -= data->b;
      },
      std::move(opts));
}

FixedPointProblem make_linear(std::size_t n, std::uint64_t seed) {
  LinearSystem sys = generate_spd_system(n, seed);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sys.A, Eigen::EigenvaluesOnly);
  const double omega = 1.0 / eig.eigenvalues().maxCoeff();
  return make_linear(std::move(sys.A), std::move(sys.b), omega);
}

} // namespace aap
