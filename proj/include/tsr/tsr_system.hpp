#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "tsr/channel_model.hpp"
#include "tsr/complex_matrix.hpp"
#include "tsr/reduced_problem.hpp"
#include "tsr/scenario.hpp"

namespace tsr {

// perm[n] is the hop-2 subchannel that forwards hop-1 subchannel n.
struct Pairing {
  std::vector<std::size_t> perm;

  static Pairing identity(std::size_t n);
  bool is_bijection() const;
  std::size_t size() const { return perm.size(); }
};

// Time split alpha plus the power fractions of both hops. mu is indexed by
// hop-1 subchannel, mu_bar by hop-2 subchannel.
struct Allocation {
  double alpha = 0.5;
  std::vector<double> mu;
  std::vector<double> mu_bar;
  Pairing pairing;

  // Budget and sign checks with 1e-9 / 1e-12 slack; throws ValidationError.
  void validate() const;
};

// Energy-transfer pattern: all source power beamformed along the dominant
// right singular vector of the strongest hop-1 subcarrier. Block length T=1.
struct EnergyPlan {
  std::size_t chosen_subcarrier = 0;
  ComplexMatrix beam_direction{1, 1};
  double harvest_coeff = 0.0;  // largest squared singular value of hop 1
  double eta = 1.0;
  double p_source = 1.0;

  // alpha * eta * P_S * harvest_coeff.
  double harvested_energy(double alpha) const;
  // Energy spent over the (1 - alpha)/2 relaying phase. Throws
  // std::domain_error for alpha >= 1.
  double relay_power(double alpha) const;
};

EnergyPlan optimal_energy_plan(const ChannelRealization& real, const Scenario& scenario);

// Pairs the i-th largest noise-normalised hop-1 gain with the i-th largest
// noise-normalised hop-2 gain. Inputs need not be sorted.
Pairing optimal_pairing(std::span<const double> gains1, std::span<const double> gains2,
                        double noise_r, double noise_d);

// End-to-end decode-and-forward rate in bit/s. gains are squared singular
// values indexed like alloc.mu / alloc.mu_bar.
double achievable_rate(const Allocation& alloc, std::span<const double> gains1,
                       std::span<const double> gains2, const EnergyPlan& plan,
                       const Scenario& scenario);

// alpha = 1/2, power fractions proportional to the squared singular values,
// sorted pairing.
Allocation benchmark_allocation(std::span<const double> gains1, std::span<const double> gains2);

// Hop-1 SNR coefficient A_n = P_S lambda_1n / sigma_R^2 and hop-2
// coefficient B_n' = eta P_S harvest_coeff lambda_2n' / sigma_D^2, laid out
// per pair (entry i uses hop-1 index i and hop-2 index pairing.perm[i]).
ReducedProblem reduced_problem(std::span<const double> gains1, std::span<const double> gains2,
                               const Pairing& pairing, const EnergyPlan& plan,
                               const Scenario& scenario);

// Maps a per-pair solution of a reduced problem back to hop indices.
Allocation allocation_from_pairs(double alpha, std::span<const double> mu_pairs,
                                 std::span<const double> mu_bar_pairs, const Pairing& pairing);

}  // namespace tsr
