#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "tsr/reduced_problem.hpp"
#include "tsr/tsr_system.hpp"

namespace tsr {

// Primal point of the penalised problem: the time split, both power vectors
// (per pair) and the two budget slacks.
struct AlpfPoint {
  double alpha = 0.5;
  std::vector<double> mu;
  std::vector<double> mu_bar;
  double s1 = 0.0;
  double s2 = 0.0;

  // (0.5, 1/n, 1/n, 0.05, 0.05).
  static AlpfPoint default_start(std::size_t pairs);

  std::size_t pairs() const { return mu.size(); }
};

// Constraint-indexed vectors (violations, multipliers, penalties) share one
// layout: [hop-1 budget, hop-2 budget, balance of pair 0, pair 1, ...].
inline constexpr std::size_t kBudget1 = 0;
inline constexpr std::size_t kBudget2 = 1;
inline constexpr std::size_t kFirstBalance = 2;

struct AlpfState {
  AlpfPoint x;
  std::vector<double> nu;
  std::vector<double> sigma;
  int iter = 0;
  double violation = 0.0;  // infinity norm of the last violation vector

  // nu = 0, sigma = 1.
  static AlpfState initial(AlpfPoint start, const ReducedProblem& problem);
};

enum class UpdateOrder {
  // Penalties first, and the multiplier step then uses the grown penalties.
  kPenaltiesFirst,
  // Multiplier step with the penalties the subproblem was solved under,
  // then penalty growth.
  kMultipliersFirst,
};

enum class StepRule {
  kUnit,              // backtracking from step 1 at every iteration
  kBarzilaiBorwein,   // backtracking from the safeguarded BB step
};

enum class InnerMethod {
  // Diagonally rescaled projected gradient; step_rule, diagonal_scaling and
  // refresh_metric apply only here.
  kDiagonalGradient,
  // Projected Newton on the exact penalty Hessian: coordinates pinned at a
  // bound by the gradient take a diagonal step, the rest a (shifted)
  // Cholesky solve. Unit trial step. Opt-in for instances where a hop-1
  // dominated pair and a hop-2 dominated pair share the budgets; the
  // diagonal metric cannot see the alpha / mu_bar direction that keeps every
  // balance row fixed and may stop a few percent short there.
  kProjectedNewton,
};

struct SubproblemResult;
struct AlpfState;

struct AlpfOptions {
  double eps = 1e-6;
  int max_outer_iters = 100;
  int max_inner_iters = 5000;
  double alpha_min = 1e-4;
  double alpha_max = 1.0 - 1e-4;
  double armijo = 1e-4;
  // inner_tol = clamp(ratio * violation, floor, cap), tightened tenfold
  // after an outer step that failed to cut the violation fourfold.
  double inner_tol_floor = 1e-8;
  double inner_tol_ratio = 0.01;
  double inner_tol_cap = 1e-2;
  int max_backtracks = 60;
  UpdateOrder order = UpdateOrder::kMultipliersFirst;
  InnerMethod inner_method = InnerMethod::kDiagonalGradient;
  StepRule step_rule = StepRule::kBarzilaiBorwein;
  // Gauss-Newton diagonal rescaling of the gradient step, recomputed at every
  // inner iteration when refresh_metric is set.
  bool diagonal_scaling = true;
  bool refresh_metric = true;
  // Stop on the metric-scaled projected step weighted by constraint
  // sensitivity instead of the raw projected gradient.
  bool scaled_stationarity = true;
  // Called after every outer iteration with the state the next subproblem
  // will start from.
  std::function<void(const AlpfState&, const SubproblemResult&)> observer;
};

// (sum mu + s1 - 1, sum mu_bar + s2 - 1,
//  (a_i mu_i - g(alpha) b_i mu_bar_i) / balance_scale_i ...).
std::vector<double> violation(const AlpfPoint& x, const ReducedProblem& problem);

double max_abs(const std::vector<double>& v);

// Augmented Lagrangian of the (minimisation form) reduced problem:
//   -hop1_rate - sum nu_j c_j + 1/2 sum sigma_j c_j^2.
// Throws std::domain_error for alpha >= 1.
double penalty_value(const AlpfPoint& x, const std::vector<double>& nu,
                     const std::vector<double>& sigma, const ReducedProblem& problem);

// Exact partial derivatives of penalty_value, laid out like AlpfPoint.
AlpfPoint penalty_gradient(const AlpfPoint& x, const std::vector<double>& nu,
                           const std::vector<double>& sigma, const ReducedProblem& problem);

// Coordinates in the order alpha, mu..., mu_bar..., s1, s2.
std::vector<double> to_coordinates(const AlpfPoint& x);
AlpfPoint from_coordinates(const std::vector<double>& v, std::size_t pairs);

// Exact second derivatives of penalty_value, row-major in to_coordinates
// order.
std::vector<double> penalty_hessian(const AlpfPoint& x, const std::vector<double>& nu,
                                    const std::vector<double>& sigma,
                                    const ReducedProblem& problem);

// Projection onto {alpha in [alpha_min, alpha_max], mu, mu_bar, s >= 0}.
AlpfPoint project_to_box(AlpfPoint x, const AlpfOptions& options);

// max |x - P(x - grad)|: zero exactly at box-constrained stationary points.
double projected_gradient_norm(const AlpfPoint& x, const AlpfPoint& grad,
                               const AlpfOptions& options);

struct SubproblemResult {
  AlpfPoint x;
  int iterations = 0;
  double projected_gradient = 0.0;
  bool line_search_failed = false;
};

// Box-constrained descent (see InnerMethod) with Armijo backtracking. Every
// accepted step lowers penalty_value.
SubproblemResult solve_subproblem(const AlpfState& state, const ReducedProblem& problem,
                                  double inner_tol, int max_inner_iters,
                                  const AlpfOptions& options = {});

// nu_j - sigma_j c_j for every constraint.
std::vector<double> update_multipliers(const std::vector<double>& nu,
                                       const std::vector<double>& sigma,
                                       const std::vector<double>& c_new);

// Keeps sigma_j when |c_new_j| <= |c_old_j| / 4, else max(10 sigma_j, k^2).
std::vector<double> update_penalties(const std::vector<double>& sigma,
                                     const std::vector<double>& c_new,
                                     const std::vector<double>& c_old, int k);

struct ConvergenceReport {
  bool converged = false;
  int outer_iterations = 0;
  int inner_iterations = 0;
  int line_search_failures = 0;
  double final_violation = 0.0;
  double final_rate = 0.0;  // bit/s
  double final_alpha = 0.0;
  std::vector<double> final_penalties;
  std::vector<double> final_multipliers;
  std::vector<double> violation_history;

  // "key: value" lines.
  std::string to_text() const;
};

struct AlpfResult {
  // Per-pair allocation (identity pairing) with the slacks dropped. Each pair
  // is trimmed to the smaller of its two hop SNRs and the power vectors are
  // scaled back onto their budgets if they overshoot; neither step changes
  // the end-to-end rate by more than the budget overshoot.
  Allocation allocation;
  AlpfPoint last_point;  // raw iterate the report describes
  ConvergenceReport report;
};

AlpfResult optimize(const ReducedProblem& problem, const AlpfPoint& init,
                    const AlpfOptions& options = {});
AlpfResult optimize(const ReducedProblem& problem, const AlpfOptions& options = {});

}  // namespace tsr
