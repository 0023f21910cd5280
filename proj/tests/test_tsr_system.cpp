#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support/oracles.hpp"
#include "tsr/channel_model.hpp"
#include "tsr/oracle.hpp"
#include "tsr/reduced_problem.hpp"
#include "tsr/tsr_system.hpp"

namespace {

using tsr::Complex;
using tsr::ComplexMatrix;

tsr::EnergyPlan plan_with(double harvest, double p_source = 1.0, double eta = 1.0) {
  tsr::EnergyPlan p;
  p.harvest_coeff = harvest;
  p.p_source = p_source;
  p.eta = eta;
  return p;
}

tsr::Scenario one_subcarrier() {
  tsr::Scenario s;
  s.k_subcarriers = 1;
  s.n_s = s.n_r = s.n_d = 1;
  return s;
}

TEST(EnergyPlan, DiagonalChannelPicksStrongestMode) {
  const ComplexMatrix h{{2, 0}, {0, 1}};
  const auto real = tsr::realization_from_matrices({h}, {h}, 2);
  tsr::Scenario s;
  s.k_subcarriers = 1;
  const auto plan = tsr::optimal_energy_plan(real, s);
  EXPECT_NEAR(plan.harvest_coeff, 4.0, 1e-12);
  EXPECT_EQ(plan.chosen_subcarrier, 0u);
  EXPECT_NEAR(std::abs(plan.beam_direction(0, 0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(plan.beam_direction(1, 0)), 0.0, 1e-12);
}

TEST(EnergyPlan, ChoosesSubcarrierWithLargestTopGain) {
  const ComplexMatrix a{{std::sqrt(3.0), 0}, {0, 1}};
  const ComplexMatrix b{{std::sqrt(5.0), 0}, {0, 0.5}};
  const auto real = tsr::realization_from_matrices({a, b}, {a, b}, 2);
  const auto plan = tsr::optimal_energy_plan(real, tsr::Scenario{});
  EXPECT_EQ(plan.chosen_subcarrier, 1u);
  EXPECT_NEAR(plan.harvest_coeff, 5.0, 1e-12);
}

TEST(EnergyPlan, BeatsRandomBeamSearch) {
  tsr::Scenario s;
  s.k_subcarriers = 4;
  s.n_s = s.n_r = s.n_d = 3;
  tsr::Rng rng(41);
  const auto real = tsr::generate_channel(s, rng);
  const auto plan = tsr::optimal_energy_plan(real, s);
  double top = 0.0;
  for (const auto& g : real.gains1) top = std::max(top, g.gain);
  EXPECT_DOUBLE_EQ(plan.harvest_coeff, top);

  double norm = 0.0;
  for (std::size_t i = 0; i < plan.beam_direction.rows(); ++i) {
    norm += std::norm(plan.beam_direction(i, 0));
  }
  EXPECT_NEAR(norm, 1.0, 1e-10);
  const auto hx = tsr::matmul(real.h1[plan.chosen_subcarrier], plan.beam_direction);
  EXPECT_NEAR(tsr::frobenius_norm_sq(hx), plan.harvest_coeff, 1e-10 * plan.harvest_coeff);

  std::mt19937_64 search(42);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t k = i % s.k_subcarriers;
    auto x = oracle::random_matrix(3, 1, search);
    const double scale = 1.0 / std::sqrt(tsr::frobenius_norm_sq(x));
    for (std::size_t r = 0; r < 3; ++r) x(r, 0) *= scale;
    EXPECT_LE(tsr::frobenius_norm_sq(tsr::matmul(real.h1[k], x)),
              plan.harvest_coeff * (1.0 + 1e-12));
  }
}

TEST(EnergyPlan, HarvestAndRelayPower) {
  const auto plan = plan_with(5.0, 2.0, 0.5);
  EXPECT_DOUBLE_EQ(plan.harvested_energy(0.2), 0.2 * 0.5 * 2.0 * 5.0);
  // 2 alpha eta / (1 - alpha) * P_S * lambda_max
  EXPECT_NEAR(plan.relay_power(0.2), 2.0 * 0.2 * 0.5 / 0.8 * 2.0 * 5.0, 1e-12);
  EXPECT_EQ(plan.relay_power(0.0), 0.0);
  EXPECT_THROW(plan.relay_power(1.0), std::domain_error);
}

TEST(Pairing, SortedInputsGiveIdentity) {
  const auto p = tsr::optimal_pairing(std::vector<double>{5, 3, 1}, std::vector<double>{4, 2, 1},
                                      1.0, 1.0);
  EXPECT_EQ(p.perm, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Pairing, MatchesRankOrder) {
  const auto p =
      tsr::optimal_pairing(std::vector<double>{9, 1}, std::vector<double>{2, 8}, 1.0, 1.0);
  EXPECT_EQ(p.perm[0], 1u);  // 9 <-> 8
  EXPECT_EQ(p.perm[1], 0u);  // 1 <-> 2
  EXPECT_TRUE(p.is_bijection());
}

TEST(Pairing, InvariantUnderInputOrder) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  std::vector<double> g1(6);
  std::vector<double> g2(6);
  for (auto& g : g1) g = u(rng);
  for (auto& g : g2) g = u(rng);
  const auto tuples = [](const std::vector<double>& a, const std::vector<double>& b) {
    const auto p = tsr::optimal_pairing(a, b, 1e-6, 2e-6);
    std::vector<std::pair<double, double>> t;
    for (std::size_t n = 0; n < a.size(); ++n) t.emplace_back(a[n], b[p.perm[n]]);
    std::sort(t.begin(), t.end());
    return t;
  };
  const auto base = tuples(g1, g2);
  for (int rep = 0; rep < 10; ++rep) {
    std::shuffle(g1.begin(), g1.end(), rng);
    std::shuffle(g2.begin(), g2.end(), rng);
    EXPECT_EQ(tuples(g1, g2), base);
  }
}

TEST(Pairing, SortedPairingBeatsEveryPermutationUnderOracle) {
  std::mt19937_64 rng(57);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  tsr::Scenario s;
  s.k_subcarriers = 1;
  s.n_s = s.n_r = s.n_d = 3;
  const auto plan = plan_with(2.5);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> g1{u(rng), u(rng), u(rng)};
    std::vector<double> g2{u(rng), u(rng), u(rng)};
    const double noise = s.noise_per_subchannel();
    const auto best = tsr::optimal_pairing(g1, g2, noise, noise);
    const double sorted_rate =
        tsr::solve_oracle(tsr::reduced_problem(g1, g2, best, plan, s)).rate_star;
    tsr::Pairing p = tsr::Pairing::identity(3);
    do {
      const double rate = tsr::solve_oracle(tsr::reduced_problem(g1, g2, p, plan, s)).rate_star;
      EXPECT_GE(sorted_rate, rate * (1.0 - 1e-9));
    } while (std::next_permutation(p.perm.begin(), p.perm.end()));
  }
}

TEST(AchievableRate, ZeroWithoutEnergyPhase) {
  tsr::Allocation a;
  a.alpha = 0.0;
  a.mu = {1.0};
  a.mu_bar = {1.0};
  a.pairing = tsr::Pairing::identity(1);
  EXPECT_EQ(tsr::achievable_rate(a, std::vector<double>{1.0}, std::vector<double>{1.0},
                                 plan_with(1.0), one_subcarrier()),
            0.0);
}

TEST(AchievableRate, UnitSnrSingleSubchannel) {
  auto s = one_subcarrier();
  s.noise_total_w = 1.0;
  tsr::Allocation a;
  a.alpha = 0.5;
  a.mu = {1.0};
  a.mu_bar = {1.0};
  a.pairing = tsr::Pairing::identity(1);
  // Hop 1: P_S mu lambda / sigma^2 = 1; hop 2: relay power 2 * 1 * 3 = 6.
  EXPECT_NEAR(tsr::achievable_rate(a, std::vector<double>{1.0}, std::vector<double>{1.0},
                                   plan_with(3.0), s),
              250.0, 1e-12);
  a.alpha = 1.0;
  EXPECT_THROW(tsr::achievable_rate(a, std::vector<double>{1.0}, std::vector<double>{1.0},
                                    plan_with(3.0), s),
               std::domain_error);
}

TEST(AchievableRate, MonotoneInSourcePowerAndInvariantUnderSnrScaling) {
  tsr::Scenario s;
  s.k_subcarriers = 2;
  s.n_s = s.n_r = s.n_d = 2;
  tsr::Rng rng(77);
  const auto real = tsr::generate_channel(s, rng);
  const auto eff = tsr::effective_subchannels(real);
  const auto g1 = tsr::gain_values(eff.hop1);
  const auto g2 = tsr::gain_values(eff.hop2);
  const auto plan = tsr::optimal_energy_plan(real, s);
  tsr::Allocation a = tsr::benchmark_allocation(g1, g2);
  a.alpha = 0.3;
  double previous = 0.0;
  for (double ps : {0.01, 0.1, 1.0, 10.0}) {
    s.p_source = ps;
    auto p = plan;
    p.p_source = ps;
    const double rate = tsr::achievable_rate(a, g1, g2, p, s);
    EXPECT_GE(rate, previous);
    EXPECT_GE(rate, 0.0);
    previous = rate;
  }
  // Noise and P_S both x4 keep every SNR (the relay power scales with P_S).
  s.p_source = 1.0;
  auto p = plan;
  p.p_source = 1.0;
  const double base = tsr::achievable_rate(a, g1, g2, p, s);
  s.noise_total_w *= 4.0;
  s.p_source = 4.0;
  p.p_source = 4.0;
  EXPECT_NEAR(tsr::achievable_rate(a, g1, g2, p, s), base, 1e-9 * base);
}

TEST(AchievableRate, MatchesDirectFormulaThroughReducedProblem) {
  tsr::Scenario s;
  s.k_subcarriers = 2;
  s.n_s = s.n_r = s.n_d = 2;
  tsr::Rng rng(78);
  const auto real = tsr::generate_channel(s, rng);
  const auto eff = tsr::effective_subchannels(real);
  const auto g1 = tsr::gain_values(eff.hop1);
  const auto g2 = tsr::gain_values(eff.hop2);
  const auto plan = tsr::optimal_energy_plan(real, s);
  const auto pairing = tsr::optimal_pairing(g1, g2, 1.0, 1.0);
  const auto problem = tsr::reduced_problem(g1, g2, pairing, plan, s);
  const std::vector<double> mu{0.4, 0.3, 0.2, 0.1};
  const std::vector<double> mu_bar{0.1, 0.2, 0.3, 0.4};
  const auto alloc = tsr::allocation_from_pairs(0.35, mu, mu_bar, pairing);
  const double rate = tsr::achievable_rate(alloc, g1, g2, plan, s);
  EXPECT_NEAR(rate, tsr::pair_rate(problem, 0.35, mu, mu_bar), 1e-9 * rate);
  EXPECT_NEAR(rate,
              oracle::pair_rate_direct(problem.a_coeffs, problem.b_coeffs, 0.35, mu, mu_bar,
                                       s.bandwidth_hz, s.k_subcarriers),
              1e-9 * rate);
}

TEST(AchievableRate, NeverAboveOracleOnSmallInstances) {
  std::mt19937_64 search(5);
  for (std::size_t kn : {1u, 2u, 4u, 6u}) {
    tsr::Scenario s;
    s.k_subcarriers = kn % 2 == 0 ? 2 : 1;
    s.n_s = s.n_r = s.n_d = kn / s.k_subcarriers;
    tsr::Rng rng(100 + kn);
    const auto real = tsr::generate_channel(s, rng);
    const auto eff = tsr::effective_subchannels(real);
    const auto g1 = tsr::gain_values(eff.hop1);
    const auto g2 = tsr::gain_values(eff.hop2);
    const auto plan = tsr::optimal_energy_plan(real, s);
    const auto pairing = tsr::optimal_pairing(g1, g2, 1.0, 1.0);
    const double upper =
        tsr::solve_oracle(tsr::reduced_problem(g1, g2, pairing, plan, s)).rate_star;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
      std::vector<double> mu(kn);
      std::vector<double> mu_bar(kn);
      double t1 = 0.0;
      double t2 = 0.0;
      for (std::size_t n = 0; n < kn; ++n) {
        mu[n] = u(search);
        mu_bar[n] = u(search);
        t1 += mu[n];
        t2 += mu_bar[n];
      }
      for (std::size_t n = 0; n < kn; ++n) {
        mu[n] /= t1;
        mu_bar[n] /= t2;
      }
      const auto a = tsr::allocation_from_pairs(std::clamp(u(search), 1e-4, 1 - 1e-4), mu,
                                                mu_bar, pairing);
      EXPECT_LE(tsr::achievable_rate(a, g1, g2, plan, s), upper * (1.0 + 1e-9));
    }
  }
}

TEST(Benchmark, SingleSubchannelTakesFullPower) {
  const auto a = tsr::benchmark_allocation(std::vector<double>{2.0}, std::vector<double>{7.0});
  EXPECT_EQ(a.alpha, 0.5);
  EXPECT_EQ(a.mu, (std::vector<double>{1.0}));
  EXPECT_EQ(a.mu_bar, (std::vector<double>{1.0}));
}

TEST(Benchmark, ProportionalToGain) {
  const auto a =
      tsr::benchmark_allocation(std::vector<double>{3.0, 1.0}, std::vector<double>{1.0, 4.0});
  EXPECT_DOUBLE_EQ(a.mu[0], 0.75);
  EXPECT_DOUBLE_EQ(a.mu[1], 0.25);
  EXPECT_DOUBLE_EQ(a.mu_bar[0], 0.2);
  EXPECT_DOUBLE_EQ(a.mu_bar[1], 0.8);
  EXPECT_EQ(a.pairing.perm, (std::vector<std::size_t>{1, 0}));
  EXPECT_NO_THROW(a.validate());
}

TEST(Benchmark, RejectsDegenerateInput) {
  EXPECT_THROW(tsr::benchmark_allocation(std::vector<double>{0.0, 0.0},
                                         std::vector<double>{1.0, 1.0}),
               tsr::ValidationError);
  EXPECT_THROW(tsr::benchmark_allocation(std::vector<double>{}, std::vector<double>{}),
               tsr::ValidationError);
}

TEST(AllocationCheck, Invariants) {
  tsr::Allocation a;
  a.alpha = 0.5;
  a.mu = {0.5, 0.5 + 5e-10};
  a.mu_bar = {0.2, 0.3};
  a.pairing = tsr::Pairing::identity(2);
  EXPECT_NO_THROW(a.validate());
  a.mu[1] = 0.6;
  EXPECT_THROW(a.validate(), tsr::ValidationError);
  a.mu[1] = 0.5;
  a.mu_bar[0] = -1e-9;
  EXPECT_THROW(a.validate(), tsr::ValidationError);
  a.mu_bar[0] = 0.0;
  a.pairing.perm = {1, 1};
  EXPECT_THROW(a.validate(), tsr::ValidationError);
}

TEST(ReducedProblemCoefficients, FollowHopSnrDefinitions) {
  tsr::Scenario s;
  s.k_subcarriers = 1;
  s.n_s = s.n_r = s.n_d = 2;
  s.p_source = 2.0;
  s.eta = 0.5;
  s.noise_total_w = 1e-3;
  const auto plan = plan_with(4.0, 2.0, 0.5);
  const auto p = tsr::reduced_problem(std::vector<double>{4.0, 1.0}, std::vector<double>{3.0, 2.0},
                                      tsr::Pairing{{1, 0}}, plan, s);
  EXPECT_DOUBLE_EQ(p.a_coeffs[0], 2.0 * 4.0 / 1e-3);
  EXPECT_DOUBLE_EQ(p.b_coeffs[0], 0.5 * 2.0 * 4.0 * 2.0 / 1e-3);  // paired with hop-2 index 1
  EXPECT_DOUBLE_EQ(p.b_coeffs[1], 0.5 * 2.0 * 4.0 * 3.0 / 1e-3);
  EXPECT_DOUBLE_EQ(tsr::relay_gain_factor(0.5), 2.0);
  EXPECT_THROW(tsr::relay_gain_factor(1.0), std::domain_error);
}

}  // namespace
