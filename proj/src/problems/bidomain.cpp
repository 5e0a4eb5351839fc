#include "aap/errors.hpp"
#include "aap/problems.hpp"

#include <memory>

namespace aap {

double ionic_current(const BidomainParams& params, double v) noexcept {
  return params.c * v * (v - params.a) * (v - 1.0);
}

Eigen::VectorXd applied_current(const GridSpec& grid, const BidomainParams& params) {
  const std::size_t k = grid.points;
  const double h = grid.spacing();
  Eigen::VectorXd I = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k * k));
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < k; ++i) {
      const double x = static_cast<double>(i) * h, y = static_cast<double>(j) * h;
      if (x <= params.stimulus_extent && y <= params.stimulus_extent)
        I[static_cast<Eigen::Index>(j * k + i)] = params.stimulus;
    }
  return I;
}

namespace {

struct BidomainData {
  BidomainParams params;
  SparseMatrix K;
  Eigen::VectorXd mass;
  Eigen::VectorXd current;
};

} // namespace

FixedPointProblem make_bidomain_toy(const GridSpec& grid, const BidomainParams& params) {
  grid.validate();
  if (grid.dims != 2) throw InvalidConfig("bidomain problem is 2D");
  if (!(params.dt > 0.0)) throw InvalidConfig("bidomain time step must be positive");
  if (!(params.D_e > 0.0 && params.D_i > 0.0)) throw InvalidConfig("bidomain conductivities must be positive");

  auto data = std::make_shared<BidomainData>();
  data->params = params;
  data->K = neumann_stiffness(grid);
  data->mass = lumped_mass(grid);
  data->current = applied_current(grid, params);
  std::shared_ptr<const BidomainData> shared = std::move(data);

  const std::size_t nodes = grid.node_count();
  FixedPointProblem::Options opts;
  opts.layout = {{"extracellular", 0, nodes}, {"intracellular", nodes, 2 * nodes}};
  opts.recommended_omega = 1.0;
  opts.recommended_window = 50;
  opts.name = "bidomain";
  return FixedPointProblem(
      2 * nodes,
      [shared](std::span<const double> x, std::span<double> out) {
        const BidomainData& d = *shared;
        const BidomainParams& p = d.params;
        const Eigen::Index N = d.mass.size();
        const Eigen::Map<const Eigen::VectorXd> ue(x.data(), N), ui(x.data() + N, N);
        Eigen::Map<Eigen::VectorXd> Fe(out.data(), N), Fi(out.data() + N, N);
        Fe.noalias() = d.K * ue;
        Fi.noalias() = d.K * ui;
        for (Eigen::Index j = 0; j < N; ++j) {
          const double v = ue[j] - ui[j];
          const double r = d.mass[j] * (v / p.dt + ionic_current(p, v) - d.current[j]);
          Fe[j] = p.D_e * Fe[j] + r;
          Fi[j] = p.D_i * Fi[j] - r;
        }
      },
      std::move(opts));
}

} // namespace aap
