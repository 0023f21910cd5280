#pragma once

#include <utility>
#include <vector>

#include "tsr/reduced_problem.hpp"

namespace tsr {

// Exact solution of the reduced problem at a fixed time split. Substituting
// the balance constraint mu_bar_i = c_i mu_i, with c_i = a_i / (g(alpha) b_i),
// leaves a concave water-filling problem under two budgets:
//   sum mu <= 1  and  sum c_i mu_i <= 1.
// Its KKT conditions give mu_i = max(0, 1/(w1 + w2 c_i) - 1/a_i) for the two
// (natural-log) water levels w1, w2 >= 0, which are found by nested
// bisection on the dual.
struct WaterfillResult {
  std::vector<double> mu;
  std::vector<double> mu_bar;
  double rate = 0.0;       // bit/s
  double level_hop1 = 0.0;  // w1, multiplier of sum mu <= 1
  double level_hop2 = 0.0;  // w2, multiplier of sum mu_bar <= 1
};

WaterfillResult inner_waterfill(double alpha, const ReducedProblem& problem);

struct OracleSolution {
  double alpha_star = 0.0;
  std::vector<double> mu_star;
  std::vector<double> mu_bar_star;
  double rate_star = 0.0;
  std::vector<std::pair<double, double>> alpha_grid_profile;  // (alpha, rate)
};

struct OracleOptions {
  int grid_points = 199;
  double refine_tol = 1e-6;
  double alpha_min = 1e-4;
  double alpha_max = 1.0 - 1e-4;
};

// Uniform alpha grid followed by golden-section refinement around the best
// grid point. Throws ValidationError for grid_points < 8.
OracleSolution solve_oracle(const ReducedProblem& problem, const OracleOptions& options = {});

}  // namespace tsr
