#include "tsr/tsr_system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tsr/key_value.hpp"

namespace tsr {
namespace {

std::vector<std::size_t> order_by_descending(std::span<const double> values, double scale) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] / scale > values[b] / scale;
  });
  return order;
}

double sum_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

Pairing Pairing::identity(std::size_t n) {
  Pairing p;
  p.perm.resize(n);
  std::iota(p.perm.begin(), p.perm.end(), 0);
  return p;
}

bool Pairing::is_bijection() const {
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t target : perm) {
    if (target >= perm.size() || seen[target]) return false;
    seen[target] = true;
  }
  return true;
}

void Allocation::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("allocation: alpha outside [0, 1]");
  if (mu.size() != mu_bar.size() || mu.size() != pairing.size()) {
    throw ValidationError("allocation: mu, mu_bar and pairing differ in length");
  }
  if (!pairing.is_bijection()) throw ValidationError("allocation: pairing is not a bijection");
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] < -1e-12 || mu_bar[i] < -1e-12) {
      throw ValidationError("allocation: negative power fraction at " + std::to_string(i));
    }
  }
  if (sum_of(mu) > 1.0 + 1e-9) throw ValidationError("allocation: hop-1 budget exceeded");
  if (sum_of(mu_bar) > 1.0 + 1e-9) throw ValidationError("allocation: hop-2 budget exceeded");
}

double EnergyPlan::harvested_energy(double alpha) const {
  return alpha * eta * p_source * harvest_coeff;
}

double EnergyPlan::relay_power(double alpha) const {
  if (!(alpha < 1.0)) {
    throw std::domain_error("relay power undefined for alpha >= 1 (no relaying phase)");
  }
  return harvested_energy(alpha) / ((1.0 - alpha) / 2.0);
}

EnergyPlan optimal_energy_plan(const ChannelRealization& real, const Scenario& scenario) {
  EnergyPlan plan;
  plan.eta = scenario.eta;
  plan.p_source = scenario.p_source;
  double best = -1.0;
  for (std::size_t k = 0; k < real.svd1.size(); ++k) {
    const double top = real.svd1[k].singular_values.front();
    if (top * top > best) {
      best = top * top;
      plan.chosen_subcarrier = k;
    }
  }
  plan.harvest_coeff = best;
  plan.beam_direction = real.svd1[plan.chosen_subcarrier].v.column(0);
  return plan;
}

Pairing optimal_pairing(std::span<const double> gains1, std::span<const double> gains2,
                        double noise_r, double noise_d) {
  if (gains1.size() != gains2.size()) {
    throw DimensionError("optimal_pairing: hop gain lists differ in length");
  }
  const auto order1 = order_by_descending(gains1, noise_r);
  const auto order2 = order_by_descending(gains2, noise_d);
  Pairing p;
  p.perm.resize(gains1.size());
  for (std::size_t rank = 0; rank < order1.size(); ++rank) p.perm[order1[rank]] = order2[rank];
  return p;
}

double achievable_rate(const Allocation& alloc, std::span<const double> gains1,
                       std::span<const double> gains2, const EnergyPlan& plan,
                       const Scenario& scenario) {
  if (alloc.mu.size() != gains1.size() || alloc.mu_bar.size() != gains2.size()) {
    throw DimensionError("achievable_rate: allocation does not match gain lists");
  }
  const double relay_power = plan.relay_power(alloc.alpha);
  const double noise = scenario.noise_per_subchannel();
  const double weight = (1.0 - alloc.alpha) * scenario.bandwidth_hz /
                        (2.0 * static_cast<double>(scenario.k_subcarriers));
  double bits = 0.0;
  for (std::size_t n = 0; n < gains1.size(); ++n) {
    const std::size_t m = alloc.pairing.perm[n];
    const double snr1 = scenario.p_source * alloc.mu[n] * gains1[n] / noise;
    const double snr2 = relay_power * alloc.mu_bar[m] * gains2[m] / noise;
    bits += std::log2(1.0 + std::max(0.0, std::min(snr1, snr2)));
  }
  return weight * bits;
}

Allocation benchmark_allocation(std::span<const double> gains1, std::span<const double> gains2) {
  if (gains1.empty() || gains1.size() != gains2.size()) {
    throw ValidationError("benchmark_allocation: need equal-length nonempty gain lists");
  }
  const double total1 = sum_of(gains1);
  const double total2 = sum_of(gains2);
  if (!(total1 > 0.0) || !(total2 > 0.0)) {
    throw ValidationError("benchmark_allocation: all-zero gains on a hop");
  }
  Allocation alloc;
  alloc.alpha = 0.5;
  for (double g : gains1) alloc.mu.push_back(g / total1);
  for (double g : gains2) alloc.mu_bar.push_back(g / total2);
  alloc.pairing = optimal_pairing(gains1, gains2, 1.0, 1.0);
  return alloc;
}

ReducedProblem reduced_problem(std::span<const double> gains1, std::span<const double> gains2,
                               const Pairing& pairing, const EnergyPlan& plan,
                               const Scenario& scenario) {
  if (gains1.size() != gains2.size() || pairing.size() != gains1.size()) {
    throw DimensionError("reduced_problem: gains and pairing differ in length");
  }
  const double noise = scenario.noise_per_subchannel();
  std::vector<double> a;
  std::vector<double> b;
  for (std::size_t n = 0; n < gains1.size(); ++n) {
    a.push_back(scenario.p_source * gains1[n] / noise);
    b.push_back(plan.eta * plan.p_source * plan.harvest_coeff * gains2[pairing.perm[n]] / noise);
  }
  return make_problem(std::move(a), std::move(b), scenario.bandwidth_hz, scenario.k_subcarriers);
}

Allocation allocation_from_pairs(double alpha, std::span<const double> mu_pairs,
                                 std::span<const double> mu_bar_pairs, const Pairing& pairing) {
  Allocation alloc;
  alloc.alpha = alpha;
  alloc.pairing = pairing;
  alloc.mu.assign(mu_pairs.begin(), mu_pairs.end());
  alloc.mu_bar.assign(pairing.size(), 0.0);
  for (std::size_t n = 0; n < pairing.size(); ++n) alloc.mu_bar[pairing.perm[n]] = mu_bar_pairs[n];
  return alloc;
}

}  // namespace tsr
