#include "aap/errors.hpp"
#include "aap/problems.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <memory>

namespace aap {

namespace {

// Nodal value with zero Dirichlet data outside the interior.
struct Nodes {
  std::span<const double> u;
  std::size_t k;
  int dims;

  double operator()(std::size_t i) const { return (i == 0 || i == k - 1) ? 0.0 : u[i - 1]; }
  double operator()(std::size_t i, std::size_t j) const {
    if (i == 0 || j == 0 || i == k - 1 || j == k - 1) return 0.0;
    return u[(j - 1) * (k - 2) + (i - 1)];
  }
};

} // namespace

void q_laplacian(const GridSpec& grid, const PLaplaceParams& params, std::span<const double> u,
                 std::span<double> out) {
  const std::size_t k = grid.points;
  const double h = grid.spacing();
  const double expo = 0.5 * (params.q - 2.0);
  const double delta = params.regularization;
  const Nodes U{u, k, grid.dims};
  auto coeff = [&](double g2) { return std::pow(g2 + delta, expo); };

  if (grid.dims == 1) {
    for (std::size_t i = 1; i + 1 < k; ++i) {
      const double ge = (U(i + 1) - U(i)) / h;
      const double gw = (U(i) - U(i - 1)) / h;
      out[i - 1] = -(coeff(ge * ge) * ge - coeff(gw * gw) * gw) / h - params.source;
    }
    return;
  }

  // Flux through the face between (i, j) and (i + 1, j) along x; the
  // tangential derivative is averaged from the four nodes around the face.
  auto flux_x = [&](std::size_t i, std::size_t j) {
    const double gn = (U(i + 1, j) - U(i, j)) / h;
    const double gt = (U(i, j + 1) + U(i + 1, j + 1) - U(i, j - 1) - U(i + 1, j - 1)) / (4.0 * h);
    return coeff(gn * gn + gt * gt) * gn;
  };
  auto flux_y = [&](std::size_t i, std::size_t j) {
    const double gn = (U(i, j + 1) - U(i, j)) / h;
    const double gt = (U(i + 1, j) + U(i + 1, j + 1) - U(i - 1, j) - U(i - 1, j + 1)) / (4.0 * h);
    return coeff(gn * gn + gt * gt) * gn;
  };
  for (std::size_t j = 1; j + 1 < k; ++j)
    for (std::size_t i = 1; i + 1 < k; ++i) {
      const double div = (flux_x(i, j) - flux_x(i - 1, j) + flux_y(i, j) - flux_y(i, j - 1)) / h;
      out[(j - 1) * (k - 2) + (i - 1)] = -div - params.source;
    }
}

namespace {

struct PLaplaceData {
  GridSpec grid;
  PLaplaceParams params;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> laplacian;
};

} // namespace

FixedPointProblem make_p_laplacian(const GridSpec& grid, const PLaplaceParams& params) {
  grid.validate();
  if (params.q < 1.0) throw InvalidConfig("p-Laplacian needs q >= 1");
  if (!(params.beta > 0.0)) throw InvalidConfig("p-Laplacian needs beta > 0");

  auto data = std::make_shared<PLaplaceData>();
  data->grid = grid;
  data->params = params;
  data->laplacian.compute(dirichlet_laplacian(grid));
  if (data->laplacian.info() != Eigen::Success) throw InvalidConfig("Laplacian factorization failed");

  const std::size_t n = grid.interior_count();
  FixedPointProblem::Options opts;
  opts.layout = {{"u", 0, n}};
  opts.recommended_omega = 1.0;
  opts.name = "plaplace";
  if (params.init == PLaplaceInit::Poisson) {
    const Eigen::VectorXd u0 = data->laplacian.solve(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), params.source));
    opts.initial_state.assign(u0.data(), u0.data() + u0.size());
  }

  std::shared_ptr<const PLaplaceData> shared = std::move(data);
  return FixedPointProblem(
      n,
      [shared](std::span<const double> u, std::span<double> out) {
        const PLaplaceData& d = *shared;
        const auto N = static_cast<Eigen::Index>(u.size());
        thread_local Eigen::VectorXd F;
        if (F.size() != N) F.resize(N);
        q_laplacian(d.grid, d.params, u, std::span<double>(F.data(), u.size()));
        Eigen::Map<Eigen::VectorXd> o(out.data(), N);
        o = d.laplacian.solve(F);
        o /= d.params.beta;
      },
      std::move(opts));
}

} // namespace aap
