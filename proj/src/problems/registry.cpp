#include "aap/errors.hpp"
#include "aap/problems.hpp"

namespace aap {

const std::vector<ProblemInfo>& problem_catalog() {
  static const std::vector<ProblemInfo> catalog = {
      {"linear", "unknowns", 20, 50, 1e-8, 10, 4, {"x"}},
      {"saddle", "points per side", 9, 17, 1e-6, 10, 4, {"velocity", "pressure"}},
      {"plaplace", "points per side", 9, 31, 1e-6, 10, 4, {"u"}},
      {"bidomain", "points per side", 13, 17, 1e-4, 50, 3, {"extracellular", "intracellular"}},
  };
  return catalog;
}

const ProblemInfo& problem_info(const std::string& name) {
  for (const auto& info : problem_catalog())
    if (info.name == name) return info;
  throw InvalidConfig("unknown problem '" + name + "' (expected linear, saddle, plaplace, bidomain)");
}

FixedPointProblem make_problem(const std::string& name, std::size_t size, std::uint64_t seed, PLaplaceInit init) {
  problem_info(name);
  if (name == "linear") return make_linear(size, seed);
  const GridSpec grid{2, size};
  if (name == "saddle") return make_saddle_point(grid);
  if (name == "plaplace") {
    PLaplaceParams params;
    params.init = init;
    return make_p_laplacian(grid, params);
  }
  return make_bidomain_toy(grid);
}

} // namespace aap
