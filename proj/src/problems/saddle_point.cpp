#include "aap/errors.hpp"
#include "aap/problems.hpp"

#include <Eigen/SparseCholesky>

#include <memory>

namespace aap {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Staggered indexing with Nc cells per side.
struct Mac {
  std::size_t nc;
  std::size_t nu() const { return (nc - 1) * nc; }
  std::size_t nv() const { return nc * (nc - 1); }
  // u on vertical faces x = i h, i in [1, nc-1], y = (j + 1/2) h.
  int u(std::size_t i, std::size_t j) const { return static_cast<int>(j * (nc - 1) + (i - 1)); }
  // v on horizontal faces x = (i + 1/2) h, y = j h, j in [1, nc-1].
  int v(std::size_t i, std::size_t j) const { return static_cast<int>(nu() + (j - 1) * nc + i); }
  // Pressure cell (i, j); cell 0 is pinned and has no unknown.
  int p(std::size_t i, std::size_t j) const { return static_cast<int>(j * nc + i) - 1; }
};

// h^2 (-Delta) for one velocity component. Normal walls hold the component at
// zero; tangential walls use a ghost value of -u, which adds 1 to the diagonal.
void add_component_laplacian(Triplets& t, const Mac& g, bool is_u) {
  const std::size_t nc = g.nc;
  const std::size_t ni = is_u ? nc - 1 : nc;  // extent in x
  const std::size_t nj = is_u ? nc : nc - 1;  // extent in y
  const std::size_t i0 = is_u ? 1 : 0;
  const std::size_t j0 = is_u ? 0 : 1;
  auto id = [&](std::size_t i, std::size_t j) { return is_u ? g.u(i, j) : g.v(i, j); };

  for (std::size_t j = j0; j < j0 + nj; ++j)
    for (std::size_t i = i0; i < i0 + ni; ++i) {
      const int r = id(i, j);
      double diag = 4.0;
      // Neighbours along x.
      if (i > i0) t.emplace_back(r, id(i - 1, j), -1.0);
      else if (!is_u) diag += 1.0;
      if (i + 1 < i0 + ni) t.emplace_back(r, id(i + 1, j), -1.0);
      else if (!is_u) diag += 1.0;
      // Neighbours along y.
      if (j > j0) t.emplace_back(r, id(i, j - 1), -1.0);
      else if (is_u) diag += 1.0;
      if (j + 1 < j0 + nj) t.emplace_back(r, id(i, j + 1), -1.0);
      else if (is_u) diag += 1.0;
      t.emplace_back(r, r, diag);
    }
}

} // namespace

SparseMatrix SaddlePointSystem::block_matrix() const {
  const auto nu = static_cast<Eigen::Index>(velocity_unknowns);
  const auto n = static_cast<Eigen::Index>(dimension());
  Triplets t;
  for (Eigen::Index c = 0; c < K.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(K, c); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index c = 0; c < B.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(B, c); it; ++it) {
      t.emplace_back(nu + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), nu + it.row(), it.value());
    }
  SparseMatrix M(n, n);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

SaddlePointSystem assemble_saddle_point(const GridSpec& grid, double forcing_scale) {
  grid.validate();
  if (grid.dims != 2) throw InvalidConfig("saddle-point problem is 2D");
  if (grid.points > kMaxSaddlePoints)
    throw ResourceLimit("saddle-point grid limited to " + std::to_string(kMaxSaddlePoints) + " points per side");

  const Mac g{grid.points - 1};
  const double h = grid.spacing();
  SaddlePointSystem sys;
  sys.grid = grid;
  sys.velocity_unknowns = g.nu() + g.nv();
  sys.pressure_unknowns = g.nc * g.nc - 1;
  const auto nvel = static_cast<Eigen::Index>(sys.velocity_unknowns);

  Triplets tk;
  add_component_laplacian(tk, g, true);
  add_component_laplacian(tk, g, false);
  sys.K.resize(nvel, nvel);
  sys.K.setFromTriplets(tk.begin(), tk.end());

  Triplets tb;
  for (std::size_t j = 0; j < g.nc; ++j)
    for (std::size_t i = 0; i < g.nc; ++i) {
      const int r = g.p(i, j);
      if (r < 0) continue;
      if (i + 1 <= g.nc - 1) tb.emplace_back(r, g.u(i + 1, j), -h);
      if (i >= 1) tb.emplace_back(r, g.u(i, j), h);
      if (j + 1 <= g.nc - 1) tb.emplace_back(r, g.v(i, j + 1), -h);
      if (j >= 1) tb.emplace_back(r, g.v(i, j), h);
    }
  sys.B.resize(static_cast<Eigen::Index>(sys.pressure_unknowns), nvel);
  sys.B.setFromTriplets(tb.begin(), tb.end());

  // Body force with a rotational part so the velocity is nontrivial.
  sys.F = Eigen::VectorXd::Zero(nvel);
  const double h2 = h * h;
  for (std::size_t j = 0; j < g.nc; ++j)
    for (std::size_t i = 1; i < g.nc; ++i) {
      const double y = (static_cast<double>(j) + 0.5) * h;
      sys.F[g.u(i, j)] = forcing_scale * h2 * (1.0 + (0.5 - y));
    }
  for (std::size_t j = 1; j < g.nc; ++j)
    for (std::size_t i = 0; i < g.nc; ++i) {
      const double x = (static_cast<double>(i) + 0.5) * h;
      sys.F[g.v(i, j)] = forcing_scale * h2 * (1.0 + (x - 0.5));
    }
  return sys;
}

namespace {

struct SaddleData {
  SparseMatrix M;
  Eigen::VectorXd rhs;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> velocity_solver;
  Eigen::Index nu = 0;
  double pressure_scale = 0.0;
};

} // namespace

FixedPointProblem make_saddle_point(const GridSpec& grid, double forcing_scale) {
  const SaddlePointSystem sys = assemble_saddle_point(grid, forcing_scale);
  auto data = std::make_shared<SaddleData>();
  data->M = sys.block_matrix();
  data->rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.dimension()));
  data->rhs.head(sys.F.size()) = sys.F;
  data->velocity_solver.compute(sys.K);
  if (data->velocity_solver.info() != Eigen::Success) throw InvalidConfig("velocity block factorization failed");
  data->nu = static_cast<Eigen::Index>(sys.velocity_unknowns);
  data->pressure_scale = 1.0 / (grid.spacing() * grid.spacing());
  std::shared_ptr<const SaddleData> shared = std::move(data);

  const std::size_t n = sys.dimension();
  FixedPointProblem::Options opts;
  opts.layout = {{"velocity", 0, sys.velocity_unknowns}, {"pressure", sys.velocity_unknowns, n}};
  opts.recommended_omega = 1.0;
  opts.recommended_window = 10;
  opts.name = "saddle";
  return FixedPointProblem(
      n,
      [shared](std::span<const double> x, std::span<double> out) {
        const SaddleData& d = *shared;
        const auto N = static_cast<Eigen::Index>(x.size());
        thread_local Eigen::VectorXd r;
        if (r.size() != N) r.resize(N);
        const Eigen::Map<const Eigen::VectorXd> xm(x.data(), N);
        r.noalias() = d.M * xm;
        r -= d.rhs;
        Eigen::Map<Eigen::VectorXd> ou(out.data(), d.nu);
        ou = d.velocity_solver.solve(r.head(d.nu));
        Eigen::Map<Eigen::VectorXd> op(out.data() + d.nu, N - d.nu);
        op = d.pressure_scale * r.tail(N - d.nu);
      },
      std::move(opts));
}

} // namespace aap
