#include "tsr/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

namespace tsr {
namespace {

std::string not_converged_message(int sweeps, double residual) {
  std::ostringstream os;
  os << "svd: Jacobi iteration did not converge after " << sweeps
     << " sweeps (off-diagonal residual " << residual << ")";
  return os.str();
}

double column_norm_sq(const ComplexMatrix& a, std::size_t c) {
  double sum = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) sum += std::norm(a(r, c));
  return sum;
}

// Removes the components of column c of q along columns [0, c) of q.
void orthogonalize_against_previous(ComplexMatrix& q, std::size_t c) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < c; ++j) {
      Complex dot = 0.0;
      for (std::size_t r = 0; r < q.rows(); ++r) dot += std::conj(q(r, j)) * q(r, c);
      for (std::size_t r = 0; r < q.rows(); ++r) q(r, c) -= dot * q(r, j);
    }
  }
}

// Turns column c into a unit vector orthogonal to columns [0, c). Falls back to
// the standard basis vector that survives projection best when the column is
// (numerically) in the span of its predecessors, e.g. for zero singular values.
void complete_column(ComplexMatrix& q, std::size_t c) {
  const double before = std::sqrt(column_norm_sq(q, c));
  orthogonalize_against_previous(q, c);
  double after = std::sqrt(column_norm_sq(q, c));
  if (before == 0.0 || after < 1e-8 * before) {
    std::size_t best_axis = 0;
    double best_norm = -1.0;
    for (std::size_t axis = 0; axis < q.rows(); ++axis) {
      for (std::size_t r = 0; r < q.rows(); ++r) q(r, c) = (r == axis) ? 1.0 : 0.0;
      orthogonalize_against_previous(q, c);
      const double norm = column_norm_sq(q, c);
      if (norm > best_norm) {
        best_norm = norm;
        best_axis = axis;
      }
    }
    for (std::size_t r = 0; r < q.rows(); ++r) q(r, c) = (r == best_axis) ? 1.0 : 0.0;
    orthogonalize_against_previous(q, c);
    after = std::sqrt(column_norm_sq(q, c));
  }
  for (std::size_t r = 0; r < q.rows(); ++r) q(r, c) /= after;
}

// Requires rows >= cols.
SvdResult tall_svd(const ComplexMatrix& m, const JacobiOptions& options) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  ComplexMatrix work = m;
  ComplexMatrix v = ComplexMatrix::identity(cols);

  double residual = 0.0;
  bool converged = cols == 1;
  int sweep = 0;
  while (!converged && sweep < options.max_sweeps) {
    ++sweep;
    residual = 0.0;
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double alpha = 0.0;
        double beta = 0.0;
        Complex gamma = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
          alpha += std::norm(work(r, p));
          beta += std::norm(work(r, q));
          gamma += std::conj(work(r, p)) * work(r, q);
        }
        const double coupling = std::abs(gamma);
        if (alpha == 0.0 || beta == 0.0 || coupling == 0.0) continue;
        const double coherence = coupling / std::sqrt(alpha * beta);
        residual = std::max(residual, coherence);
        if (coherence <= options.tolerance) continue;
        rotated = true;

        // Rotate column q by the phase of gamma so the pair couples through a
        // real number, then apply the real Jacobi rotation.
        const Complex phase = gamma / coupling;
        const double zeta = (beta - alpha) / (2.0 * coupling);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        const Complex unphase = std::conj(phase);
        for (std::size_t r = 0; r < rows; ++r) {
          const Complex xp = work(r, p);
          const Complex xq = unphase * work(r, q);
          work(r, p) = c * xp - s * xq;
          work(r, q) = s * xp + c * xq;
        }
        for (std::size_t r = 0; r < cols; ++r) {
          const Complex vp = v(r, p);
          const Complex vq = unphase * v(r, q);
          v(r, p) = c * vp - s * vq;
          v(r, q) = s * vp + c * vq;
        }
      }
    }
    converged = !rotated;
  }
  if (!converged) throw SvdNotConverged(sweep, residual);

  std::vector<double> norms(cols);
  for (std::size_t c = 0; c < cols; ++c) norms[c] = std::sqrt(column_norm_sq(work, c));
  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

  ComplexMatrix u(rows, cols);
  ComplexMatrix v_sorted(cols, cols);
  std::vector<double> values(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    const std::size_t src = order[j];
    values[j] = norms[src];
    for (std::size_t r = 0; r < rows; ++r) u(r, j) = work(r, src);
    for (std::size_t r = 0; r < cols; ++r) v_sorted(r, j) = v(r, src);
  }
  for (std::size_t j = 0; j < cols; ++j) complete_column(u, j);
  return SvdResult{std::move(u), std::move(values), std::move(v_sorted)};
}

}  // namespace

SvdNotConverged::SvdNotConverged(int sweeps, double residual)
    : std::runtime_error(not_converged_message(sweeps, residual)),
      sweeps_(sweeps),
      residual_(residual) {}

ComplexMatrix SvdResult::reconstruct() const {
  ComplexMatrix scaled = u;
  for (std::size_t r = 0; r < scaled.rows(); ++r) {
    for (std::size_t c = 0; c < scaled.cols(); ++c) scaled(r, c) *= singular_values[c];
  }
  return matmul(scaled, v.hermitian());
}

SvdResult svd(const ComplexMatrix& m, const JacobiOptions& options) {
  if (m.rows() >= m.cols()) return tall_svd(m, options);
  SvdResult t = tall_svd(m.hermitian(), options);
  return SvdResult{std::move(t.v), std::move(t.singular_values), std::move(t.u)};
}

}  // namespace tsr
