#include "tsr/alpf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "tsr/key_value.hpp"

namespace tsr {
namespace {

double dot(const AlpfPoint& a, const AlpfPoint& b) {
  double s = a.alpha * b.alpha + a.s1 * b.s1 + a.s2 * b.s2;
  for (std::size_t i = 0; i < a.pairs(); ++i) s += a.mu[i] * b.mu[i] + a.mu_bar[i] * b.mu_bar[i];
  return s;
}

// a + t * b
AlpfPoint axpy(const AlpfPoint& a, double t, const AlpfPoint& b) {
  AlpfPoint out = a;
  out.alpha += t * b.alpha;
  out.s1 += t * b.s1;
  out.s2 += t * b.s2;
  for (std::size_t i = 0; i < a.pairs(); ++i) {
    out.mu[i] += t * b.mu[i];
    out.mu_bar[i] += t * b.mu_bar[i];
  }
  return out;
}

double sum_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

void check_layout(const AlpfPoint& x, const ReducedProblem& problem) {
  if (x.mu.size() != problem.size() || x.mu_bar.size() != problem.size()) {
    throw ValidationError("alpf: point has " + std::to_string(x.mu.size()) + " pairs, problem has " +
                          std::to_string(problem.size()));
  }
}

// Lowers the stronger hop of every pair to the weaker one, then scales both
// power vectors by a common factor so each budget holds.
Allocation balanced_allocation(const AlpfPoint& x, const ReducedProblem& problem) {
  const double r = relay_gain_factor(x.alpha);
  std::vector<double> mu(x.pairs());
  std::vector<double> mu_bar(x.pairs());
  for (std::size_t i = 0; i < x.pairs(); ++i) {
    const double a = problem.a_coeffs[i];
    const double b = r * problem.b_coeffs[i];
    const double snr = std::max(0.0, std::min(a * x.mu[i], b * x.mu_bar[i]));
    mu[i] = a > 0.0 ? snr / a : 0.0;
    mu_bar[i] = b > 0.0 ? snr / b : 0.0;
  }
  const double scale = std::max({1.0, sum_of(mu), sum_of(mu_bar)});
  for (std::size_t i = 0; i < x.pairs(); ++i) {
    mu[i] /= scale;
    mu_bar[i] /= scale;
  }
  return allocation_from_pairs(x.alpha, mu, mu_bar, Pairing::identity(x.pairs()));
}

}  // namespace

AlpfPoint AlpfPoint::default_start(std::size_t pairs) {
  AlpfPoint x;
  x.alpha = 0.5;
  x.mu.assign(pairs, 1.0 / static_cast<double>(pairs));
  x.mu_bar.assign(pairs, 1.0 / static_cast<double>(pairs));
  x.s1 = 0.05;
  x.s2 = 0.05;
  return x;
}

AlpfState AlpfState::initial(AlpfPoint start, const ReducedProblem& problem) {
  AlpfState s;
  const std::size_t m = kFirstBalance + problem.size();
  s.nu.assign(m, 0.0);
  s.sigma.assign(m, 1.0);
  s.violation = max_abs(tsr::violation(start, problem));
  s.x = std::move(start);
  return s;
}

std::vector<double> violation(const AlpfPoint& x, const ReducedProblem& problem) {
  check_layout(x, problem);
  const double r = relay_gain_factor(x.alpha);
  std::vector<double> c(kFirstBalance + x.pairs());
  c[kBudget1] = sum_of(x.mu) + x.s1 - 1.0;
  c[kBudget2] = sum_of(x.mu_bar) + x.s2 - 1.0;
  for (std::size_t i = 0; i < x.pairs(); ++i) {
    c[kFirstBalance + i] =
        (problem.a_coeffs[i] * x.mu[i] - r * problem.b_coeffs[i] * x.mu_bar[i]) /
        problem.balance_scale[i];
  }
  return c;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double penalty_value(const AlpfPoint& x, const std::vector<double>& nu,
                     const std::vector<double>& sigma, const ReducedProblem& problem) {
  const auto c = violation(x, problem);
  double value = -hop1_rate(problem, x.alpha, x.mu);
  for (std::size_t j = 0; j < c.size(); ++j) {
    value += -nu[j] * c[j] + 0.5 * sigma[j] * c[j] * c[j];
  }
  return value;
}

AlpfPoint penalty_gradient(const AlpfPoint& x, const std::vector<double>& nu,
                           const std::vector<double>& sigma, const ReducedProblem& problem) {
  const auto c = violation(x, problem);
  const double r = relay_gain_factor(x.alpha);
  const double dr = 2.0 / ((1.0 - x.alpha) * (1.0 - x.alpha));
  const double weight = problem.rate_weight(x.alpha);
  const double per_bit = problem.bandwidth_hz / (2.0 * static_cast<double>(problem.k_subcarriers));

  AlpfPoint g;
  g.alpha = 0.0;
  g.mu.assign(x.pairs(), 0.0);
  g.mu_bar.assign(x.pairs(), 0.0);

  // d/dc_j of (-nu_j c_j + sigma_j c_j^2 / 2).
  std::vector<double> dc(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) dc[j] = sigma[j] * c[j] - nu[j];

  double bits = 0.0;
  for (std::size_t i = 0; i < x.pairs(); ++i) {
    const double a = problem.a_coeffs[i];
    const double b = problem.b_coeffs[i];
    const double scale = problem.balance_scale[i];
    const double d_bal = dc[kFirstBalance + i];
    bits += std::log2(1.0 + a * x.mu[i]);
    g.mu[i] = -weight * a / ((1.0 + a * x.mu[i]) * std::numbers::ln2) + dc[kBudget1] +
              d_bal * a / scale;
    g.mu_bar[i] = dc[kBudget2] - d_bal * r * b / scale;
    g.alpha += -d_bal * dr * b * x.mu_bar[i] / scale;
  }
  // -weight(alpha) = (alpha - 1) B / 2K, so its alpha-derivative is B / 2K.
  g.alpha += per_bit * bits;
  g.s1 = dc[kBudget1];
  g.s2 = dc[kBudget2];
  return g;
}

std::vector<double> to_coordinates(const AlpfPoint& x) {
  std::vector<double> v{x.alpha};
  v.insert(v.end(), x.mu.begin(), x.mu.end());
  v.insert(v.end(), x.mu_bar.begin(), x.mu_bar.end());
  v.push_back(x.s1);
  v.push_back(x.s2);
  return v;
}

AlpfPoint from_coordinates(const std::vector<double>& v, std::size_t pairs) {
  if (v.size() != 2 * pairs + 3) {
    throw ValidationError("alpf: " + std::to_string(v.size()) + " coordinates for " +
                          std::to_string(pairs) + " pairs");
  }
  const auto n = static_cast<std::ptrdiff_t>(pairs);
  AlpfPoint x;
  x.alpha = v[0];
  x.mu.assign(v.begin() + 1, v.begin() + 1 + n);
  x.mu_bar.assign(v.begin() + 1 + n, v.begin() + 1 + 2 * n);
  x.s1 = v[2 * pairs + 1];
  x.s2 = v[2 * pairs + 2];
  return x;
}

std::vector<double> penalty_hessian(const AlpfPoint& x, const std::vector<double>& nu,
                                    const std::vector<double>& sigma,
                                    const ReducedProblem& problem) {
  const auto c = violation(x, problem);
  const std::size_t n = x.pairs();
  const std::size_t dim = 2 * n + 3;
  const double one_minus = 1.0 - x.alpha;
  const double r = relay_gain_factor(x.alpha);
  const double dr = 2.0 / (one_minus * one_minus);
  const double ddr = 4.0 / (one_minus * one_minus * one_minus);
  const double weight = problem.rate_weight(x.alpha);
  const double per_bit = problem.bandwidth_hz / (2.0 * static_cast<double>(problem.k_subcarriers));
  const std::size_t ia = 0;
  const std::size_t is1 = 2 * n + 1;
  const std::size_t is2 = 2 * n + 2;

  std::vector<double> h(dim * dim, 0.0);
  const auto at = [&](std::size_t i, std::size_t j) -> double& { return h[i * dim + j]; };
  const auto add_sym = [&](std::size_t i, std::size_t j, double v) {
    at(i, j) += v;
    if (i != j) at(j, i) += v;
  };

  // Budgets are linear: only sigma J^T J.
  std::vector<std::size_t> row1;
  std::vector<std::size_t> row2;
  for (std::size_t i = 0; i < n; ++i) {
    row1.push_back(1 + i);
    row2.push_back(1 + n + i);
  }
  row1.push_back(is1);
  row2.push_back(is2);
  for (std::size_t i : row1) {
    for (std::size_t j : row1) at(i, j) += sigma[kBudget1];
  }
  for (std::size_t i : row2) {
    for (std::size_t j : row2) at(i, j) += sigma[kBudget2];
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double a = problem.a_coeffs[i];
    const double b = problem.b_coeffs[i];
    const double scale = problem.balance_scale[i];
    const std::size_t im = 1 + i;
    const std::size_t ib = 1 + n + i;
    const double denom = 1.0 + a * x.mu[i];

    // -rate: concave in mu, linear in alpha, mixed term from the time share.
    at(im, im) += weight * a * a / (denom * denom * std::numbers::ln2);
    add_sym(ia, im, per_bit * a / (denom * std::numbers::ln2));

    // Balance row: gradient (a, -r b, -r' b mu_bar) / scale and curvature
    // only through r(alpha) mu_bar.
    const double s_bal = sigma[kFirstBalance + i];
    const double d_bal = sigma[kFirstBalance + i] * c[kFirstBalance + i] - nu[kFirstBalance + i];
    const double jm = a / scale;
    const double jb = -r * b / scale;
    const double ja = -dr * b * x.mu_bar[i] / scale;
    add_sym(im, im, s_bal * jm * jm);
    add_sym(ib, ib, s_bal * jb * jb);
    add_sym(ia, ia, s_bal * ja * ja);
    add_sym(im, ib, s_bal * jm * jb);
    add_sym(im, ia, s_bal * jm * ja);
    add_sym(ib, ia, s_bal * jb * ja);
    add_sym(ia, ib, d_bal * -dr * b / scale);
    add_sym(ia, ia, d_bal * -ddr * b * x.mu_bar[i] / scale);
  }
  return h;
}

AlpfPoint project_to_box(AlpfPoint x, const AlpfOptions& options) {
  x.alpha = std::clamp(x.alpha, options.alpha_min, options.alpha_max);
  for (double& v : x.mu) v = std::max(0.0, v);
  for (double& v : x.mu_bar) v = std::max(0.0, v);
  x.s1 = std::max(0.0, x.s1);
  x.s2 = std::max(0.0, x.s2);
  return x;
}

double projected_gradient_norm(const AlpfPoint& x, const AlpfPoint& grad,
                               const AlpfOptions& options) {
  const AlpfPoint moved = project_to_box(axpy(x, -1.0, grad), options);
  const AlpfPoint diff = axpy(moved, -1.0, x);
  double m = std::max({std::abs(diff.alpha), std::abs(diff.s1), std::abs(diff.s2)});
  for (std::size_t i = 0; i < x.pairs(); ++i) {
    m = std::max({m, std::abs(diff.mu[i]), std::abs(diff.mu_bar[i])});
  }
  return m;
}

namespace {

// penalty_value(y) - penalty_value(x) without subtracting two large totals.
double penalty_change(const AlpfPoint& x, const AlpfPoint& y, const std::vector<double>& nu,
                      const std::vector<double>& sigma, const ReducedProblem& problem) {
  const auto cx = violation(x, problem);
  const auto cy = violation(y, problem);
  const double per_bit = problem.bandwidth_hz / (2.0 * static_cast<double>(problem.k_subcarriers));
  double bits = 0.0;
  double gained = 0.0;
  for (std::size_t i = 0; i < x.pairs(); ++i) {
    const double a = problem.a_coeffs[i];
    bits += std::log1p(a * x.mu[i]);
    gained += std::log1p(a * (y.mu[i] - x.mu[i]) / (1.0 + a * x.mu[i]));
  }
  // rate(y) - rate(x) = w(y) * gained + (w(y) - w(x)) * bits, w(a) = (1 - a) B / 2K.
  double change = -(problem.rate_weight(y.alpha) * gained - (y.alpha - x.alpha) * per_bit * bits) /
                  std::numbers::ln2;
  for (std::size_t j = 0; j < cx.size(); ++j) {
    const double dc = cy[j] - cx[j];
    change += -nu[j] * dc + 0.5 * sigma[j] * dc * (cy[j] + cx[j]);
  }
  return change;
}

double max_abs_entry(const AlpfPoint& v) {
  double m = std::max({std::abs(v.alpha), std::abs(v.s1), std::abs(v.s2)});
  for (std::size_t i = 0; i < v.pairs(); ++i) {
    m = std::max({m, std::abs(v.mu[i]), std::abs(v.mu_bar[i])});
  }
  return m;
}

// max(1, largest |dc_j / dx_i|) per coordinate.
AlpfPoint constraint_weights(const AlpfPoint& x, const ReducedProblem& problem) {
  const double r = relay_gain_factor(x.alpha);
  const double dr = 2.0 / ((1.0 - x.alpha) * (1.0 - x.alpha));
  AlpfPoint w = x;
  w.alpha = 1.0;
  w.s1 = w.s2 = 1.0;
  for (std::size_t i = 0; i < x.pairs(); ++i) {
    const double scale = problem.balance_scale[i];
    const double b = problem.b_coeffs[i];
    w.mu[i] = std::max(1.0, problem.a_coeffs[i] / scale);
    w.mu_bar[i] = std::max(1.0, r * b / scale);
    w.alpha = std::max(w.alpha, dr * b * x.mu_bar[i] / scale);
  }
  return w;
}

AlpfPoint invert_all(AlpfPoint v) {
  v.alpha = 1.0 / v.alpha;
  v.s1 = 1.0 / v.s1;
  v.s2 = 1.0 / v.s2;
  for (double& m : v.mu) m = 1.0 / m;
  for (double& m : v.mu_bar) m = 1.0 / m;
  return v;
}

AlpfPoint diagonal_metric(const AlpfPoint& x, const std::vector<double>& sigma,
                          const ReducedProblem& problem) {
  const double r = relay_gain_factor(x.alpha);
  const double dr = 2.0 / ((1.0 - x.alpha) * (1.0 - x.alpha));
  const double weight = problem.rate_weight(x.alpha);

  // Gauss-Newton diagonal: objective curvature plus sigma_j (dc_j/dx)^2.
  AlpfPoint h;
  h.alpha = 0.0;
  h.mu.assign(x.pairs(), 0.0);
  h.mu_bar.assign(x.pairs(), 0.0);
  h.s1 = sigma[kBudget1];
  h.s2 = sigma[kBudget2];
  for (std::size_t i = 0; i < x.pairs(); ++i) {
    const double a = problem.a_coeffs[i];
    const double b = problem.b_coeffs[i];
    const double scale = problem.balance_scale[i];
    const double s_bal = sigma[kFirstBalance + i];
    const double denom = 1.0 + a * x.mu[i];
    h.mu[i] = weight * a * a / (denom * denom * std::numbers::ln2) + sigma[kBudget1] +
              s_bal * (a / scale) * (a / scale);
    h.mu_bar[i] = sigma[kBudget2] + s_bal * (r * b / scale) * (r * b / scale);
    const double d_alpha = dr * b * x.mu_bar[i] / scale;
    h.alpha += s_bal * d_alpha * d_alpha;
  }

  // Only alpha can have zero curvature (all mu_bar = 0).
  const auto invert = [](double v) { return v > 0.0 ? 1.0 / v : 1.0; };
  AlpfPoint d = h;
  d.alpha = invert(h.alpha);
  d.s1 = invert(h.s1);
  d.s2 = invert(h.s2);
  for (std::size_t i = 0; i < x.pairs(); ++i) {
    d.mu[i] = invert(h.mu[i]);
    d.mu_bar[i] = invert(h.mu_bar[i]);
  }
  return d;
}

// In-place Cholesky solve of m x = rhs; false when a pivot is not clearly
// positive.
bool cholesky_solve(std::vector<double>& m, std::size_t dim, std::vector<double>& rhs,
                    double pivot_floor) {
  for (std::size_t j = 0; j < dim; ++j) {
    double d = m[j * dim + j];
    for (std::size_t k = 0; k < j; ++k) d -= m[j * dim + k] * m[j * dim + k];
    if (!(d > pivot_floor)) return false;
    const double l = std::sqrt(d);
    m[j * dim + j] = l;
    for (std::size_t i = j + 1; i < dim; ++i) {
      double v = m[i * dim + j];
      for (std::size_t k = 0; k < j; ++k) v -= m[i * dim + k] * m[j * dim + k];
      m[i * dim + j] = v / l;
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    double v = rhs[i];
    for (std::size_t k = 0; k < i; ++k) v -= m[i * dim + k] * rhs[k];
    rhs[i] = v / m[i * dim + i];
  }
  for (std::size_t i = dim; i-- > 0;) {
    double v = rhs[i];
    for (std::size_t k = i + 1; k < dim; ++k) v -= m[k * dim + i] * rhs[k];
    rhs[i] = v / m[i * dim + i];
  }
  return true;
}

// Coordinates within eps of a bound that the gradient pushes outward are
// pinned and take g_i / h_ii. The rest solve (H_FF + shift I) d = g_F with
// the smallest shift in 0, 1e-12 * max diag, x10, ... that factors.
std::vector<double> projected_newton_direction(const std::vector<double>& h,
                                               const std::vector<double>& g,
                                               const std::vector<double>& x,
                                               const std::vector<double>& lo,
                                               const std::vector<double>& hi, double eps) {
  const std::size_t dim = g.size();
  std::vector<double> d(dim, 0.0);
  std::vector<std::size_t> free;
  double max_diag = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double hii = h[i * dim + i];
    const bool pinned = (x[i] <= lo[i] + eps && g[i] > 0.0) || (x[i] >= hi[i] - eps && g[i] < 0.0);
    if (pinned) {
      d[i] = hii > 0.0 ? g[i] / hii : g[i];
    } else {
      free.push_back(i);
      max_diag = std::max(max_diag, std::abs(hii));
    }
  }
  if (free.empty()) return d;
  if (max_diag == 0.0) max_diag = 1.0;
  const std::size_t nf = free.size();
  double shift = 0.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    std::vector<double> m(nf * nf);
    std::vector<double> rhs(nf);
    for (std::size_t a = 0; a < nf; ++a) {
      rhs[a] = g[free[a]];
      for (std::size_t b = 0; b < nf; ++b) m[a * nf + b] = h[free[a] * dim + free[b]];
      m[a * nf + a] += shift;
    }
    if (cholesky_solve(m, nf, rhs, 1e-14 * max_diag)) {
      for (std::size_t a = 0; a < nf; ++a) d[free[a]] = rhs[a];
      return d;
    }
    shift = shift == 0.0 ? 1e-12 * max_diag : 10.0 * shift;
  }
  // Unreachable for finite input: the last shift dominates every entry.
  for (std::size_t i : free) d[i] = g[i] / max_diag;
  return d;
}

SubproblemResult newton_subproblem(const AlpfState& state, const ReducedProblem& problem,
                                   double inner_tol, int max_inner_iters,
                                   const AlpfOptions& options) {
  const std::size_t n = problem.size();
  const std::size_t dim = 2 * n + 3;
  std::vector<double> lo(dim, 0.0);
  std::vector<double> hi(dim, std::numeric_limits<double>::infinity());
  lo[0] = options.alpha_min;
  hi[0] = options.alpha_max;
  const auto clamp_all = [&](std::vector<double> v) {
    for (std::size_t i = 0; i < dim; ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
    return v;
  };

  SubproblemResult out;
  AlpfPoint x = project_to_box(state.x, options);
  AlpfPoint g = penalty_gradient(x, state.nu, state.sigma, problem);
  for (int it = 0; it < max_inner_iters; ++it) {
    const auto xv = to_coordinates(x);
    const auto gv = to_coordinates(g);
    const double pg = projected_gradient_norm(x, g, options);
    const auto d = projected_newton_direction(penalty_hessian(x, state.nu, state.sigma, problem),
                                              gv, xv, lo, hi, std::min(1e-8, pg));
    if (options.scaled_stationarity) {
      // Newton step weighted by how strongly each coordinate moves the
      // constraints.
      const auto w = to_coordinates(constraint_weights(x, problem));
      std::vector<double> moved = xv;
      for (std::size_t i = 0; i < dim; ++i) moved[i] -= d[i];
      moved = clamp_all(moved);
      out.projected_gradient = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        out.projected_gradient = std::max(out.projected_gradient, w[i] * std::abs(moved[i] - xv[i]));
      }
    } else {
      out.projected_gradient = pg;
    }
    if (out.projected_gradient <= inner_tol) break;

    double step = 1.0;
    bool accepted = false;
    AlpfPoint candidate;
    for (int bt = 0; bt < options.max_backtracks; ++bt) {
      std::vector<double> trial = xv;
      for (std::size_t i = 0; i < dim; ++i) trial[i] -= step * d[i];
      candidate = from_coordinates(clamp_all(std::move(trial)), n);
      const double change = penalty_change(x, candidate, state.nu, state.sigma, problem);
      const double decrease = dot(g, axpy(candidate, -1.0, x));
      if (change <= options.armijo * decrease && change <= 0.0) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.line_search_failed = true;
      break;
    }
    x = std::move(candidate);
    g = penalty_gradient(x, state.nu, state.sigma, problem);
    ++out.iterations;
  }
  out.x = std::move(x);
  return out;
}

}  // namespace

SubproblemResult solve_subproblem(const AlpfState& state, const ReducedProblem& problem,
                                  double inner_tol, int max_inner_iters,
                                  const AlpfOptions& options) {
  if (options.inner_method == InnerMethod::kProjectedNewton) {
    return newton_subproblem(state, problem, inner_tol, max_inner_iters, options);
  }
  const auto gradient_at = [&](const AlpfPoint& p) {
    return penalty_gradient(p, state.nu, state.sigma, problem);
  };

  SubproblemResult out;
  AlpfPoint x = project_to_box(state.x, options);
  AlpfPoint g = gradient_at(x);
  AlpfPoint prev_x;
  AlpfPoint prev_g;

  // Search directions are -metric * g; the box is diagonal, so projecting in
  // the rescaled variables is the same as projecting x.
  AlpfPoint metric;
  if (options.diagonal_scaling) {
    metric = diagonal_metric(x, state.sigma, problem);
  } else {
    metric = x;
    metric.alpha = metric.s1 = metric.s2 = 1.0;
    std::fill(metric.mu.begin(), metric.mu.end(), 1.0);
    std::fill(metric.mu_bar.begin(), metric.mu_bar.end(), 1.0);
  }
  AlpfPoint inverse_metric = invert_all(metric);
  const auto scaled = [](const AlpfPoint& w, const AlpfPoint& v) {
    AlpfPoint out = v;
    out.alpha *= w.alpha;
    out.s1 *= w.s1;
    out.s2 *= w.s2;
    for (std::size_t i = 0; i < v.pairs(); ++i) {
      out.mu[i] *= w.mu[i];
      out.mu_bar[i] *= w.mu_bar[i];
    }
    return out;
  };

  double trial_step = 1.0;
  for (int it = 0; it < max_inner_iters; ++it) {
    if (options.diagonal_scaling && options.refresh_metric && it > 0) {
      metric = diagonal_metric(x, state.sigma, problem);
      inverse_metric = invert_all(metric);
    }
    if (options.scaled_stationarity) {
      // Scaled projected step, weighted by how strongly each coordinate moves
      // the constraints, so a stiff coordinate cannot look converged.
      const AlpfPoint moved = project_to_box(axpy(x, -1.0, scaled(metric, g)), options);
      out.projected_gradient =
          max_abs_entry(scaled(constraint_weights(x, problem), axpy(moved, -1.0, x)));
    } else {
      out.projected_gradient = projected_gradient_norm(x, g, options);
    }
    if (out.projected_gradient <= inner_tol) break;

    if (options.step_rule == StepRule::kBarzilaiBorwein && it > 0) {
      const AlpfPoint s = axpy(x, -1.0, prev_x);
      const AlpfPoint y = axpy(g, -1.0, prev_g);
      const double sy = dot(s, y);
      trial_step = sy > 0.0 ? std::clamp(dot(s, scaled(inverse_metric, s)) / sy, 1e-14, 1e14)
                            : 1.0;
    }

    const AlpfPoint direction = scaled(metric, g);
    double step = trial_step;
    bool accepted = false;
    AlpfPoint candidate;
    for (int bt = 0; bt < options.max_backtracks; ++bt) {
      candidate = project_to_box(axpy(x, -step, direction), options);
      const double change = penalty_change(x, candidate, state.nu, state.sigma, problem);
      const double decrease = dot(g, axpy(candidate, -1.0, x));
      if (change <= options.armijo * decrease && change <= 0.0) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.line_search_failed = true;
      break;
    }
    prev_x = std::move(x);
    prev_g = std::move(g);
    x = std::move(candidate);
    g = gradient_at(x);
    ++out.iterations;
  }
  out.x = std::move(x);
  return out;
}

std::vector<double> update_multipliers(const std::vector<double>& nu,
                                       const std::vector<double>& sigma,
                                       const std::vector<double>& c_new) {
  std::vector<double> out(nu.size());
  for (std::size_t j = 0; j < nu.size(); ++j) out[j] = nu[j] - sigma[j] * c_new[j];
  return out;
}

std::vector<double> update_penalties(const std::vector<double>& sigma,
                                     const std::vector<double>& c_new,
                                     const std::vector<double>& c_old, int k) {
  const double floor = static_cast<double>(k) * static_cast<double>(k);
  std::vector<double> out(sigma.size());
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    out[j] = std::abs(c_new[j]) <= 0.25 * std::abs(c_old[j]) ? sigma[j]
                                                              : std::max(10.0 * sigma[j], floor);
  }
  return out;
}

std::string ConvergenceReport::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "converged: " << (converged ? "true" : "false") << "\n"
     << "outer_iterations: " << outer_iterations << "\n"
     << "inner_iterations: " << inner_iterations << "\n"
     << "line_search_failures: " << line_search_failures << "\n"
     << "final_violation: " << final_violation << "\n"
     << "final_alpha: " << final_alpha << "\n"
     << "final_rate_bps: " << final_rate << "\n"
     << "final_penalties: " << join(final_penalties) << "\n"
     << "final_multipliers: " << join(final_multipliers) << "\n";
  return os.str();
}

AlpfResult optimize(const ReducedProblem& problem, const AlpfPoint& init,
                    const AlpfOptions& options) {
  problem.validate();
  check_layout(init, problem);
  AlpfState state = AlpfState::initial(project_to_box(init, options), problem);
  std::vector<double> c_old = violation(state.x, problem);

  ConvergenceReport report;
  AlpfPoint best = state.x;
  double best_violation = state.violation;

  double inner_tol = options.inner_tol_cap;
  bool stalled = false;
  for (int k = 1; k <= options.max_outer_iters; ++k) {
    // A subproblem that failed to cut the violation fourfold gets a tenfold
    // tighter tolerance next time.
    double target = std::min(options.inner_tol_ratio * state.violation, options.inner_tol_cap);
    if (stalled) target = std::min(target, 0.1 * inner_tol);
    inner_tol = std::max(target, options.inner_tol_floor);
    SubproblemResult sub =
        solve_subproblem(state, problem, inner_tol, options.max_inner_iters, options);
    report.inner_iterations += sub.iterations;
    if (sub.line_search_failed) ++report.line_search_failures;

    const std::vector<double> c_new = violation(sub.x, problem);
    state.x = std::move(sub.x);
    state.iter = k;
    state.violation = max_abs(c_new);
    report.violation_history.push_back(state.violation);
    report.outer_iterations = k;
    if (state.violation <= best_violation) {
      best = state.x;
      best_violation = state.violation;
    }
    if (state.violation <= options.eps) {
      report.converged = true;
      break;
    }
    stalled = state.violation > 0.25 * max_abs(c_old);
    if (options.order == UpdateOrder::kPenaltiesFirst) {
      state.sigma = update_penalties(state.sigma, c_new, c_old, k);
      state.nu = update_multipliers(state.nu, state.sigma, c_new);
    } else {
      state.nu = update_multipliers(state.nu, state.sigma, c_new);
      state.sigma = update_penalties(state.sigma, c_new, c_old, k);
    }
    c_old = c_new;
    if (options.observer) options.observer(state, sub);
  }

  AlpfResult result;
  result.last_point = report.converged ? state.x : best;
  result.allocation = balanced_allocation(result.last_point, problem);
  report.final_violation = report.converged ? state.violation : best_violation;
  report.final_alpha = result.last_point.alpha;
  report.final_rate =
      pair_rate(problem, result.allocation.alpha, result.allocation.mu, result.allocation.mu_bar);
  report.final_penalties = state.sigma;
  report.final_multipliers = state.nu;
  result.report = std::move(report);
  return result;
}

AlpfResult optimize(const ReducedProblem& problem, const AlpfOptions& options) {
  return optimize(problem, AlpfPoint::default_start(problem.size()), options);
}

}  // namespace tsr
