#pragma once

#include "aap/fixed_point.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace aap {

/// Uniform grid on the unit interval or unit square, `points` nodes per side
/// including the boundary.
struct GridSpec {
  int dims = 2;
  std::size_t points = 17;

  double spacing() const noexcept { return 1.0 / static_cast<double>(points - 1); }
  std::size_t node_count() const noexcept { return dims == 1 ? points : points * points; }
  std::size_t interior_count() const noexcept {
    return dims == 1 ? points - 2 : (points - 2) * (points - 2);
  }
  /// Throws InvalidConfig unless dims is 1 or 2 and points >= 3.
  void validate() const;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

// ---- linear ----------------------------------------------------------------

struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

/// Seeded symmetric A with spectrum exactly spanning [0.1, 2] and a random b.
LinearSystem generate_spd_system(std::size_t n, std::uint64_t seed);

/// T(x) = A x - b with omega = 1 / lambda_max(A).
FixedPointProblem make_linear(std::size_t n, std::uint64_t seed);
FixedPointProblem make_linear(Eigen::MatrixXd A, Eigen::VectorXd b, double omega = 1.0);

// ---- saddle point ----------------------------------------------------------

inline constexpr std::size_t kMaxSaddlePoints = 65;

/// Staggered-grid Stokes system [[K, B^T], [B, 0]] [u; p] = [F; 0].
/// Velocities live on interior cell faces, pressures at cell centres with the
/// first cell pinned to zero. Rows are scaled by h^2.
struct SaddlePointSystem {
  GridSpec grid;
  std::size_t velocity_unknowns = 0;
  std::size_t pressure_unknowns = 0;
  SparseMatrix K;  // velocity block, SPD
  SparseMatrix B;  // pressure x velocity, minus h^2 times the divergence
  Eigen::VectorXd F;

  std::size_t dimension() const noexcept { return velocity_unknowns + pressure_unknowns; }
  SparseMatrix block_matrix() const;
};

SaddlePointSystem assemble_saddle_point(const GridSpec& grid, double forcing_scale = 1.0);

/// T([u; p]) = P^{-1}(M [u; p] - [F; 0]) with P = blockdiag(K, h^2 I); K is
/// factored once. Layout {velocity, pressure}. Throws ResourceLimit above
/// kMaxSaddlePoints points per side.
FixedPointProblem make_saddle_point(const GridSpec& grid, double forcing_scale = 1.0);

// ---- p-Laplacian -----------------------------------------------------------

enum class PLaplaceInit { Zero, Poisson };

struct PLaplaceParams {
  double q = 1.5;
  double beta = 10.0;
  double regularization = 1e-10;
  double source = 1.0;
  PLaplaceInit init = PLaplaceInit::Zero;
};

/// -Delta_h on interior nodes with zero Dirichlet data (1/h^2 scaling).
SparseMatrix dirichlet_laplacian(const GridSpec& grid);

/// out = -div(|grad u|^{q-2} grad u) - f on interior nodes, face-centred
/// gradients with the tangential part averaged from four neighbours.
void q_laplacian(const GridSpec& grid, const PLaplaceParams& params, std::span<const double> u,
                 std::span<double> out);

/// T(u) = (1/beta) (-Delta_h)^{-1} F(u). Layout {u}.
FixedPointProblem make_p_laplacian(const GridSpec& grid, const PLaplaceParams& params = {});

// ---- bidomain --------------------------------------------------------------

struct BidomainParams {
  double D_e = 2.0;
  double D_i = 1.0;
  double dt = 0.1;
  double c = 8.0;          // I_ion(v) = c v (v - a) (v - 1)
  double a = 0.1;
  double stimulus = 10.0;  // I_app inside the stimulus square
  double stimulus_extent = 0.2;
};

double ionic_current(const BidomainParams& params, double v) noexcept;

/// P1-like Neumann stiffness on all nodes: 5-point stencil, boundary edges
/// weighted 1/2. Symmetric with zero row sums.
SparseMatrix neumann_stiffness(const GridSpec& grid);

/// Lumped nodal areas: h^2 inside, h^2/2 on edges, h^2/4 at corners.
Eigen::VectorXd lumped_mass(const GridSpec& grid);

/// Applied current per node (stimulus square at the origin corner).
Eigen::VectorXd applied_current(const GridSpec& grid, const BidomainParams& params);

/// First implicit Euler step from rest:
///   F_e = M((v - v0)/dt + I_ion(v) - I_app) + D_e K u_e
///   F_i = M((v0 - v)/dt - I_ion(v) + I_app) + D_i K u_i,  v = u_e - u_i.
/// Layout {extracellular, intracellular}, window 50.
FixedPointProblem make_bidomain_toy(const GridSpec& grid, const BidomainParams& params = {});

// ---- registry --------------------------------------------------------------

struct ProblemInfo {
  std::string name;
  std::string size_meaning;  // "unknowns" or "points per side"
  std::size_t smallest_size;
  std::size_t default_size;
  double default_tolerance;
  int default_window;
  int max_alternation;
  std::vector<std::string> fields;
};

const std::vector<ProblemInfo>& problem_catalog();

/// Throws InvalidConfig for an unknown name.
const ProblemInfo& problem_info(const std::string& name);

/// Builds a registered problem at `size`. `seed` only affects `linear`,
/// `init` only `plaplace`.
FixedPointProblem make_problem(const std::string& name, std::size_t size, std::uint64_t seed = 0,
                               PLaplaceInit init = PLaplaceInit::Zero);

} // namespace aap
