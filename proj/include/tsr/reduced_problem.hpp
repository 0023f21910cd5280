#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tsr {

// Power/time allocation problem left after the energy pattern and the
// subchannel pairing are fixed. Entry i describes pair i: hop-1 SNR per unit
// power fraction a_coeffs[i], and hop-2 coefficient b_coeffs[i] such that the
// hop-2 SNR is (2 alpha / (1 - alpha)) * b_coeffs[i] * mu_bar[i].
//
// balance_scale[i] divides the i-th rate-balance constraint. It does not
// change the feasible set; it only sets the units the optimizer measures the
// violation in. All ones reproduces the raw constraint.
struct ReducedProblem {
  std::vector<double> a_coeffs;
  std::vector<double> b_coeffs;
  std::vector<double> balance_scale;
  double bandwidth_hz = 1000.0;
  std::size_t k_subcarriers = 1;

  std::size_t size() const { return a_coeffs.size(); }

  // Duty-cycle weighted bandwidth per subcarrier: (1 - alpha) B / (2K).
  double rate_weight(double alpha) const;

  // Throws ValidationError when lengths differ or coefficients are negative.
  void validate() const;
};

// Builds a problem with unit balance scales.
ReducedProblem make_problem(std::vector<double> a, std::vector<double> b,
                            double bandwidth_hz = 1000.0, std::size_t k_subcarriers = 1);

// Rescales every balance row by its hop-1 coefficient (or 1 when that is 0),
// which makes the violation read in units of power fraction.
ReducedProblem with_hop1_balance_scale(ReducedProblem problem);

// 2 alpha / (1 - alpha): relay power multiplier from the time split.
double relay_gain_factor(double alpha);

// Sum over pairs of the weighted min of the two hop rates, in bit/s.
double pair_rate(const ReducedProblem& problem, double alpha, std::span<const double> mu,
                 std::span<const double> mu_bar);

// The objective the optimizer maximises: weighted hop-1 rate alone.
double hop1_rate(const ReducedProblem& problem, double alpha, std::span<const double> mu);

}  // namespace tsr
