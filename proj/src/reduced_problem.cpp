#include "tsr/reduced_problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "tsr/key_value.hpp"

namespace tsr {

double ReducedProblem::rate_weight(double alpha) const {
  return (1.0 - alpha) * bandwidth_hz / (2.0 * static_cast<double>(k_subcarriers));
}

void ReducedProblem::validate() const {
  if (a_coeffs.size() != b_coeffs.size() || a_coeffs.size() != balance_scale.size()) {
    throw ValidationError("reduced problem: coefficient lists differ in length");
  }
  if (a_coeffs.empty()) throw ValidationError("reduced problem: no subchannels");
  for (std::size_t i = 0; i < a_coeffs.size(); ++i) {
    if (!(a_coeffs[i] >= 0.0) || !(b_coeffs[i] >= 0.0) || !(balance_scale[i] > 0.0)) {
      throw ValidationError("reduced problem: invalid coefficient at pair " + std::to_string(i));
    }
  }
  if (!(bandwidth_hz > 0.0) || k_subcarriers == 0) {
    throw ValidationError("reduced problem: bandwidth and subcarrier count must be positive");
  }
}

ReducedProblem make_problem(std::vector<double> a, std::vector<double> b, double bandwidth_hz,
                            std::size_t k_subcarriers) {
  ReducedProblem p;
  p.balance_scale.assign(a.size(), 1.0);
  p.a_coeffs = std::move(a);
  p.b_coeffs = std::move(b);
  p.bandwidth_hz = bandwidth_hz;
  p.k_subcarriers = k_subcarriers;
  p.validate();
  return p;
}

ReducedProblem with_hop1_balance_scale(ReducedProblem problem) {
  for (std::size_t i = 0; i < problem.size(); ++i) {
    problem.balance_scale[i] = problem.a_coeffs[i] > 0.0 ? problem.a_coeffs[i] : 1.0;
  }
  return problem;
}

double relay_gain_factor(double alpha) {
  if (!(alpha < 1.0)) throw std::domain_error("relay gain undefined for alpha >= 1");
  return 2.0 * alpha / (1.0 - alpha);
}

double pair_rate(const ReducedProblem& problem, double alpha, std::span<const double> mu,
                 std::span<const double> mu_bar) {
  const double r = relay_gain_factor(alpha);
  double bits = 0.0;
  for (std::size_t i = 0; i < problem.size(); ++i) {
    const double hop1 = problem.a_coeffs[i] * mu[i];
    const double hop2 = r * problem.b_coeffs[i] * mu_bar[i];
    bits += std::log2(1.0 + std::max(0.0, std::min(hop1, hop2)));
  }
  return problem.rate_weight(alpha) * bits;
}

double hop1_rate(const ReducedProblem& problem, double alpha, std::span<const double> mu) {
  double bits = 0.0;
  for (std::size_t i = 0; i < problem.size(); ++i) {
    bits += std::log2(1.0 + problem.a_coeffs[i] * mu[i]);
  }
  return problem.rate_weight(alpha) * bits;
}

}  // namespace tsr
