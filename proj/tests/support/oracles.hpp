#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library's numerical routines.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include "tsr/complex_matrix.hpp"

namespace oracle {

using Complex = std::complex<double>;

// Triple loop over raw entries.
inline std::vector<Complex> naive_product(const tsr::ComplexMatrix& a, const tsr::ComplexMatrix& b) {
  std::vector<Complex> out(a.rows() * b.cols(), Complex{});
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      Complex s{};
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out[i * b.cols() + j] = s;
    }
  }
  return out;
}

inline tsr::ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                                        double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  tsr::ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
  }
  return m;
}

// Real polynomial, coefficients lowest degree first.
using Poly = std::vector<double>;

inline double eval(const Poly& p, double x) {
  double v = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) v = v * x + p[i];
  return v;
}

inline Poly derivative(const Poly& p) {
  Poly d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(static_cast<double>(i) * p[i]);
  return d;
}

// Roots of a polynomial known to have only real roots, all inside [lo, hi]:
// the roots of p' split [lo, hi] into monotone pieces, each holding at most
// one root of p.
inline std::vector<double> real_roots(const Poly& p, double lo, double hi) {
  const std::size_t degree = p.size() - 1;
  if (degree == 0) return {};
  if (degree == 1) return {-p[0] / p[1]};
  std::vector<double> cuts{lo};
  for (double r : real_roots(derivative(p), lo, hi)) cuts.push_back(std::clamp(r, lo, hi));
  cuts.push_back(hi);
  std::vector<double> roots;
  const double tiny = 1e-13 * std::max(1.0, std::abs(hi));
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i];
    double b = cuts[i + 1];
    double fa = eval(p, a);
    const double fb = eval(p, b);
    if (std::abs(fa) < tiny * std::abs(p.back())) {
      if (roots.empty() || std::abs(roots.back() - a) > 0.0 || i == 0) roots.push_back(a);
      continue;
    }
    if ((fa > 0) == (fb > 0)) continue;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
      const double m = 0.5 * (a + b);
      const double fm = eval(p, m);
      if ((fm > 0) == (fa > 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  while (roots.size() > degree) roots.pop_back();
  return roots;
}

// Eigenvalues of a Hermitian matrix from its characteristic polynomial
// (Faddeev-LeVerrier), descending.
inline std::vector<double> hermitian_eigenvalues(const tsr::ComplexMatrix& h) {
  const std::size_t n = h.rows();
  std::vector<Complex> m(n * n, Complex{});  // M_0 = 0
  std::vector<Complex> am(n * n);
  Poly coeff(n + 1, 0.0);  // det(xI - H), lowest degree first
  coeff[n] = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    // M_k = H M_{k-1} + c_{n-k+1} I ; c_{n-k} = -tr(H M_k) / k
    std::vector<Complex> next(n * n, Complex{});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        Complex s{};
        for (std::size_t l = 0; l < n; ++l) s += h(i, l) * m[l * n + j];
        next[i * n + j] = s;
      }
      next[i * n + i] += coeff[n - k + 1];
    }
    m = next;
    Complex tr{};
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t l = 0; l < n; ++l) tr += h(i, l) * m[l * n + i];
    }
    coeff[n - k] = -tr.real() / static_cast<double>(k);
  }
  double bound = 0.0;  // Gershgorin
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j) r += std::abs(h(i, j));
    bound = std::max(bound, r);
  }
  auto roots = real_roots(coeff, -bound - 1e-9, bound + 1e-9);
  std::sort(roots.rbegin(), roots.rend());
  return roots;
}

// m^H m, computed entry by entry.
inline tsr::ComplexMatrix gram(const tsr::ComplexMatrix& m) {
  tsr::ComplexMatrix g(m.cols(), m.cols());
  for (std::size_t i = 0; i < m.cols(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      Complex s{};
      for (std::size_t k = 0; k < m.rows(); ++k) s += std::conj(m(k, i)) * m(k, j);
      g(i, j) = s;
    }
  }
  return g;
}

// max sum log2(1 + a_i p_i) s.t. sum p = 1, p >= 0: sort descending and
// take the largest active set whose water level clears every member.
inline std::vector<double> classic_waterfill(const std::vector<double>& a) {
  std::vector<std::size_t> order(a.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a[x] > a[y]; });
  std::vector<double> p(a.size(), 0.0);
  double level = 0.0;
  std::size_t active = 0;
  for (std::size_t k = 1; k <= a.size(); ++k) {
    if (a[order[k - 1]] <= 0.0) break;
    double inv = 0.0;
    for (std::size_t j = 0; j < k; ++j) inv += 1.0 / a[order[j]];
    const double w = (1.0 + inv) / static_cast<double>(k);
    if (w - 1.0 / a[order[k - 1]] > 0.0) {
      level = w;
      active = k;
    }
  }
  for (std::size_t j = 0; j < active; ++j) p[order[j]] = level - 1.0 / a[order[j]];
  return p;
}

// Tiny expression tree for re-deriving constraint values symbolically.
struct Expr {
  enum class Op { kConst, kVar, kAdd, kSub, kMul, kDiv } op = Op::kConst;
  double value = 0.0;
  std::size_t var = 0;
  std::shared_ptr<Expr> lhs;
  std::shared_ptr<Expr> rhs;

  double evaluate(const std::vector<double>& vars) const {
    switch (op) {
      case Op::kConst: return value;
      case Op::kVar: return vars.at(var);
      case Op::kAdd: return lhs->evaluate(vars) + rhs->evaluate(vars);
      case Op::kSub: return lhs->evaluate(vars) - rhs->evaluate(vars);
      case Op::kMul: return lhs->evaluate(vars) * rhs->evaluate(vars);
      case Op::kDiv: return lhs->evaluate(vars) / rhs->evaluate(vars);
    }
    return 0.0;
  }
};
using ExprPtr = std::shared_ptr<Expr>;

inline ExprPtr constant(double v) {
  auto e = std::make_shared<Expr>();
  e->value = v;
  return e;
}
inline ExprPtr variable(std::size_t i) {
  auto e = std::make_shared<Expr>();
  e->op = Expr::Op::kVar;
  e->var = i;
  return e;
}
inline ExprPtr node(Expr::Op op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}
inline ExprPtr operator+(ExprPtr l, ExprPtr r) { return node(Expr::Op::kAdd, l, r); }
inline ExprPtr operator-(ExprPtr l, ExprPtr r) { return node(Expr::Op::kSub, l, r); }
inline ExprPtr operator*(ExprPtr l, ExprPtr r) { return node(Expr::Op::kMul, l, r); }
inline ExprPtr operator/(ExprPtr l, ExprPtr r) { return node(Expr::Op::kDiv, l, r); }

// Rate of the reduced problem at fixed alpha, written out directly.
inline double pair_rate_direct(const std::vector<double>& a, const std::vector<double>& b,
                               double alpha, const std::vector<double>& mu,
                               const std::vector<double>& mu_bar, double bandwidth,
                               std::size_t k) {
  double bits = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s1 = a[i] * mu[i];
    const double s2 = 2.0 * alpha / (1.0 - alpha) * b[i] * mu_bar[i];
    bits += std::log2(1.0 + std::min(s1, s2));
  }
  return (1.0 - alpha) * bandwidth / (2.0 * static_cast<double>(k)) * bits;
}

// Best KN=1 rate over a fine alpha grid (mu = min(1, 1/c) as forced by
// the two budgets).
inline double single_pair_grid_argmax(double a, double b, int points) {
  double best_alpha = 0.0;
  double best = -1.0;
  for (int i = 1; i < points; ++i) {
    const double alpha = static_cast<double>(i) / points;
    const double r = 2.0 * alpha / (1.0 - alpha);
    const double snr = std::min(a, r * b);
    const double rate = (1.0 - alpha) * std::log2(1.0 + snr);
    if (rate > best) {
      best = rate;
      best_alpha = alpha;
    }
  }
  return best_alpha;
}

// (A+2B)/(1+A) >= ln(1+A): the kink alpha = A/(A+2B) is the KN=1 optimum.
inline bool kink_is_optimal(double a, double b) {
  return (a + 2.0 * b) / (1.0 + a) >= std::log1p(a);
}

}  // namespace oracle
