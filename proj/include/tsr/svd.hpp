#pragma once

#include <stdexcept>
#include <vector>

#include "tsr/complex_matrix.hpp"

namespace tsr {

// Thin SVD: m = u * diag(singular_values) * v^H with u of shape rows x p,
// v of shape cols x p and p = min(rows, cols). Singular values descend.
// Singular vectors are only unique up to a phase per column (and up to a
// subspace for repeated values), so callers should rely on singular values
// and reconstructions only.
struct SvdResult {
  ComplexMatrix u;
  std::vector<double> singular_values;
  ComplexMatrix v;

  ComplexMatrix reconstruct() const;
};

class SvdNotConverged : public std::runtime_error {
 public:
  SvdNotConverged(int sweeps, double residual);

  int sweeps() const { return sweeps_; }
  // Largest relative column coherence left after the last sweep.
  double residual() const { return residual_; }

 private:
  int sweeps_;
  double residual_;
};

struct JacobiOptions {
  int max_sweeps = 100;
  double tolerance = 1e-14;
};

// One-sided (Hestenes) Jacobi SVD.
SvdResult svd(const ComplexMatrix& m, const JacobiOptions& options = {});

}  // namespace tsr
