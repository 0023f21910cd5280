// Command-line front end: experiment sweeps, single realizations, self-test.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tsr/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNonConvergence = 2;

void print_vector(const char* name, const std::vector<double>& v) {
  std::printf("%s:", name);
  for (double x : v) std::printf(" %.10g", x);
  std::printf("\n");
}

int run_command(const std::string& spec_path) {
  const tsr::ExperimentSpec spec = tsr::load_experiment(spec_path);
  const tsr::SweepResult result = tsr::run_experiment(spec);
  if (spec.output_path.empty()) {
    std::cout << tsr::to_csv(result);
  } else {
    tsr::emit_csv(result, spec.output_path);
    std::cerr << "wrote " << result.rows.size() << " rows to " << spec.output_path.string()
              << "\n";
  }
  const double failed = result.nonconverged_fraction();
  if (failed > spec.nonconvergence_threshold) {
    std::cerr << "ALPF failed to converge on " << failed * 100.0 << "% of runs (threshold "
              << spec.nonconvergence_threshold * 100.0 << "%)\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

struct SingleArgs {
  std::string scenario_file;
  std::optional<std::uint64_t> seed;
  std::optional<double> phi;
  std::optional<double> p_source;
  std::optional<double> d_sd;
  std::optional<std::size_t> antennas;
  std::optional<std::size_t> k_subcarriers;
  std::string inner = "diagonal";
};

tsr::AlpfOptions alpf_options(const std::string& inner) {
  tsr::AlpfOptions opts;
  opts.inner_method =
      inner == "newton" ? tsr::InnerMethod::kProjectedNewton : tsr::InnerMethod::kDiagonalGradient;
  return opts;
}

int single_command(const SingleArgs& args) {
  tsr::Scenario s = args.scenario_file.empty() ? tsr::Scenario{} : tsr::load_scenario(args.scenario_file);
  if (args.seed) s.seed = *args.seed;
  if (args.phi) s.phi = *args.phi;
  if (args.p_source) s.p_source = *args.p_source;
  if (args.d_sd) s.d_sd = *args.d_sd;
  if (args.antennas) s.n_s = s.n_r = s.n_d = *args.antennas;
  if (args.k_subcarriers) s.k_subcarriers = *args.k_subcarriers;
  s.validate();

  tsr::Rng rng(s.seed);
  const auto t = tsr::solve_trial(
      s, rng, {tsr::Solver::kAlpf, tsr::Solver::kOracle, tsr::Solver::kBenchmark},
      alpf_options(args.inner));

  std::printf("scenario: N=%zu K=%zu P_S=%g W phi=%g d_sd=%g seed=%llu\n",
              s.streams_per_subcarrier(), s.k_subcarriers, s.p_source, s.phi, s.d_sd,
              static_cast<unsigned long long>(s.seed));
  print_vector("gains_hop1", t.gains1);
  print_vector("gains_hop2", t.gains2);
  std::printf("energy_subcarrier: %zu\nharvest_coeff: %.10g\n", t.plan.chosen_subcarrier,
              t.plan.harvest_coeff);
  std::printf("pairing:");
  for (std::size_t p : t.pairing.perm) std::printf(" %zu", p);
  std::printf("\n\n[alpf allocation]\n");
  const auto& alloc = t.alpf->allocation;
  std::printf("alpha: %.10g\n", alloc.alpha);
  print_vector("mu", alloc.mu);
  print_vector("mu_bar", alloc.mu_bar);
  std::printf("\n[alpf convergence]\n%s", t.alpf->report.to_text().c_str());
  std::printf("\n[rates bit/s]\n");
  for (const auto& o : t.outcomes) {
    std::printf("%-9s rate=%.10g alpha=%.6g converged=%s\n", tsr::to_string(o.solver).c_str(),
                o.rate, o.alpha, o.converged ? "true" : "false");
  }
  return t.alpf->report.converged ? kExitOk : kExitNonConvergence;
}

// Random reduced problems from random channels; checks the solver
// relationships that must hold on every converged run.
int selftest_command(std::size_t instances, std::uint64_t seed, const std::string& inner) {
  const tsr::AlpfOptions opts = alpf_options(inner);
  std::size_t converged = 0;
  std::size_t oracle_ok = 0;
  std::size_t benchmark_ok = 0;
  std::size_t balance_ok = 0;
  double worst_gap = 0.0;
  const double powers[] = {0.1, 1.0, 10.0};
  for (std::size_t i = 0; i < instances; ++i) {
    tsr::Rng rng(tsr::trial_seed(seed, 0, i));
    tsr::Scenario s;
    s.k_subcarriers = 1 + i % 2;
    s.n_s = s.n_r = s.n_d = 1 + (i / 2) % 3;
    s.p_source = powers[(i / 6) % 3];
    s.phi = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    const auto t = tsr::solve_trial(
        s, rng, {tsr::Solver::kAlpf, tsr::Solver::kOracle, tsr::Solver::kBenchmark}, opts);
    const auto& alpf = t.outcomes[0];
    const auto& oracle = t.outcomes[1];
    const auto& bench = t.outcomes[2];
    if (!alpf.converged) continue;
    ++converged;
    const double gap = (oracle.rate - alpf.rate) / oracle.rate;
    worst_gap = std::max(worst_gap, gap);
    if (gap <= 0.01) ++oracle_ok;
    if (alpf.rate >= bench.rate - 1e-9) ++benchmark_ok;
    if (t.alpf->report.final_violation <= 1e-6) ++balance_ok;
  }
  const auto line = [](bool ok, const std::string& text) {
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", text.c_str());
    return ok;
  };
  bool ok = true;
  ok &= line(converged * 20 >= instances * 19,
             "converged " + std::to_string(converged) + "/" + std::to_string(instances) +
                 " (need >= 95%)");
  ok &= line(oracle_ok == converged, "within 1% of the oracle on " + std::to_string(oracle_ok) +
                                         "/" + std::to_string(converged) +
                                         " converged runs (worst gap " +
                                         std::to_string(worst_gap) + ")");
  ok &= line(benchmark_ok == converged, "at least the benchmark rate on " +
                                            std::to_string(benchmark_ok) + "/" +
                                            std::to_string(converged));
  ok &= line(balance_ok == converged, "violation <= 1e-6 on " + std::to_string(balance_ok) +
                                          "/" + std::to_string(converged));
  return ok ? kExitOk : kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wireless-powered MIMO-OFDM relay: rate optimisation experiments"};
  app.require_subcommand(1);

  std::string spec_path;
  auto* run = app.add_subcommand("run", "Run a Monte Carlo sweep described by an experiment file");
  run->add_option("experiment-file", spec_path, "key = value experiment file")->required();

  SingleArgs single_args;
  auto* single = app.add_subcommand("single", "Optimise one channel realization and print it");
  single->add_option("--scenario", single_args.scenario_file, "key = value scenario file");
  single->add_option("--seed", single_args.seed, "channel seed");
  single->add_option("--phi", single_args.phi, "relay position d_SR / d_SD");
  single->add_option("--p-source", single_args.p_source, "source power (W)");
  single->add_option("--d-sd", single_args.d_sd, "source-destination distance");
  single->add_option("--antennas", single_args.antennas, "N_S = N_R = N_D");
  single->add_option("--k", single_args.k_subcarriers, "subcarriers");
  single->add_option("--inner", single_args.inner, "ALPF inner solver")
      ->check(CLI::IsMember({"diagonal", "newton"}));

  std::size_t instances = 50;
  std::uint64_t selftest_seed = 2024;
  auto* selftest = app.add_subcommand("selftest", "ALPF vs oracle vs benchmark property check");
  selftest->add_option("--instances", instances, "random instances")->check(CLI::PositiveNumber);
  selftest->add_option("--seed", selftest_seed, "master seed");
  std::string selftest_inner = "diagonal";
  selftest->add_option("--inner", selftest_inner, "ALPF inner solver")
      ->check(CLI::IsMember({"diagonal", "newton"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*run) return run_command(spec_path);
    if (*single) return single_command(single_args);
    if (*selftest) return selftest_command(instances, selftest_seed, selftest_inner);
  } catch (const tsr::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}
