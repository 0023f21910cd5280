#include "tsr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tsr/key_value.hpp"

namespace tsr {
namespace {

constexpr int kMaxBisections = 300;

struct Channels {
  std::vector<double> a;
  std::vector<double> c;     // hop-2 budget cost per unit of mu
  std::vector<bool> usable;  // a > 0 and b > 0
};

void fill(const Channels& ch, double w1, double w2, std::vector<double>& mu) {
  for (std::size_t i = 0; i < mu.size(); ++i) {
    mu[i] = ch.usable[i] ? std::max(0.0, 1.0 / (w1 + w2 * ch.c[i]) - 1.0 / ch.a[i]) : 0.0;
  }
}

double total(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

double weighted_total(const Channels& ch, const std::vector<double>& mu) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (ch.usable[i]) s += ch.c[i] * mu[i];
  }
  return s;
}

bool converged(double lo, double hi) {
  return hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi;
}

// Smallest w1 >= 0 with sum mu(w1, w2) <= 1.
double hop1_level(const Channels& ch, double w2, double a_max, std::vector<double>& mu) {
  if (w2 > 0.0) {
    fill(ch, 0.0, w2, mu);
    if (total(mu) <= 1.0) return 0.0;
  }
  double lo = 0.0;
  double hi = a_max;
  for (int it = 0; it < kMaxBisections && !converged(lo, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    fill(ch, mid, w2, mu);
    (total(mu) > 1.0 ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

WaterfillResult inner_waterfill(double alpha, const ReducedProblem& problem) {
  const std::size_t n = problem.size();
  const double r = relay_gain_factor(alpha);
  WaterfillResult out;
  out.mu.assign(n, 0.0);
  out.mu_bar.assign(n, 0.0);

  Channels ch{problem.a_coeffs, std::vector<double>(n, 0.0), std::vector<bool>(n, false)};
  double a_max = 0.0;
  double w2_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ch.usable[i] = problem.a_coeffs[i] > 0.0 && problem.b_coeffs[i] > 0.0 && r > 0.0;
    if (!ch.usable[i]) continue;
    ch.c[i] = problem.a_coeffs[i] / (r * problem.b_coeffs[i]);
    a_max = std::max(a_max, problem.a_coeffs[i]);
    w2_max = std::max(w2_max, problem.a_coeffs[i] / ch.c[i]);
  }
  if (a_max == 0.0) return out;

  std::vector<double>& mu = out.mu;
  double w2 = 0.0;
  double w1 = hop1_level(ch, 0.0, a_max, mu);
  fill(ch, w1, 0.0, mu);
  if (weighted_total(ch, mu) > 1.0) {
    // The hop-2 budget binds; w2 is where it becomes tight.
    double lo = 0.0;
    double hi = w2_max;
    for (int it = 0; it < kMaxBisections && !converged(lo, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double level = hop1_level(ch, mid, a_max, mu);
      fill(ch, level, mid, mu);
      (weighted_total(ch, mu) > 1.0 ? lo : hi) = mid;
    }
    w2 = hi;
    w1 = hop1_level(ch, w2, a_max, mu);
    fill(ch, w1, w2, mu);
  }

  // Bisection lands on the feasible side up to rounding; absorb the rest.
  const double overshoot = std::max({total(mu), weighted_total(ch, mu), 1.0});
  for (std::size_t i = 0; i < n; ++i) {
    mu[i] /= overshoot;
    out.mu_bar[i] = ch.usable[i] ? ch.c[i] * mu[i] : 0.0;
  }
  out.level_hop1 = w1;
  out.level_hop2 = w2;
  out.rate = hop1_rate(problem, alpha, mu);
  return out;
}

OracleSolution solve_oracle(const ReducedProblem& problem, const OracleOptions& options) {
  problem.validate();
  if (options.grid_points < 8) throw ValidationError("oracle: grid_points must be >= 8");
  OracleSolution sol;
  const double step =
      (options.alpha_max - options.alpha_min) / static_cast<double>(options.grid_points - 1);
  std::size_t best = 0;
  for (int i = 0; i < options.grid_points; ++i) {
    const double alpha = i + 1 == options.grid_points ? options.alpha_max
                                                       : options.alpha_min + step * i;
    const double rate = inner_waterfill(alpha, problem).rate;
    sol.alpha_grid_profile.emplace_back(alpha, rate);
    if (rate > sol.alpha_grid_profile[best].second) best = static_cast<std::size_t>(i);
  }

  // Golden-section search on the bracket around the best grid point.
  const auto rate_at = [&](double alpha) { return inner_waterfill(alpha, problem).rate; };
  double lo = sol.alpha_grid_profile[best == 0 ? 0 : best - 1].first;
  double hi = sol.alpha_grid_profile[std::min<std::size_t>(best + 1, sol.alpha_grid_profile.size() - 1)].first;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = rate_at(x1);
  double f2 = rate_at(x2);
  while (hi - lo > options.refine_tol) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = rate_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = rate_at(x2);
    }
  }

  double alpha = sol.alpha_grid_profile[best].first;
  double rate = sol.alpha_grid_profile[best].second;
  for (const auto& [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
    if (f > rate) {
      alpha = x;
      rate = f;
    }
  }
  const auto fill_result = inner_waterfill(alpha, problem);
  sol.alpha_star = alpha;
  sol.mu_star = fill_result.mu;
  sol.mu_bar_star = fill_result.mu_bar;
  sol.rate_star = fill_result.rate;
  return sol;
}

}  // namespace tsr
