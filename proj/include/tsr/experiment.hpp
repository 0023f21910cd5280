#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tsr/alpf.hpp"
#include "tsr/channel_model.hpp"
#include "tsr/key_value.hpp"
#include "tsr/oracle.hpp"
#include "tsr/scenario.hpp"
#include "tsr/tsr_system.hpp"

namespace tsr {

enum class SweepKind { kNone, kPhi, kPSource, kAntennas, kKSubcarriers };
enum class Solver { kAlpf, kOracle, kBenchmark };

std::string to_string(SweepKind kind);
std::string to_string(Solver solver);
SweepKind parse_sweep_kind(const std::string& text);
Solver parse_solver(const std::string& text);

struct ExperimentSpec {
  Scenario scenario;
  SweepKind sweep = SweepKind::kNone;
  std::vector<double> sweep_values;  // empty for kNone
  std::size_t trials = 200;
  std::vector<Solver> solvers{Solver::kAlpf, Solver::kBenchmark};
  std::filesystem::path output_path;  // may be empty (no file)
  std::uint64_t master_seed = 1;
  std::size_t threads = 1;
  double nonconvergence_threshold = 0.05;
  AlpfOptions alpf;

  // Sweep points actually run: sweep_values, or one point for kNone.
  std::size_t point_count() const;

  // Scenario with the i-th sweep value applied. The antenna sweep sets
  // N_S = N_R = N_D.
  Scenario scenario_at(std::size_t point) const;

  // Throws ValidationError describing the first problem.
  void validate() const;
};

// Keys accepted in an experiment file on top of the scenario keys.
const std::set<std::string, std::less<>>& experiment_keys();

// master_seed defaults to the scenario's seed key when absent.
ExperimentSpec experiment_from_document(const KeyValueDocument& doc);
ExperimentSpec load_experiment(const std::filesystem::path& path);

// splitmix64 chain over (master, point, trial): adding sweep points or trials
// never changes the seed of an existing (point, trial).
std::uint64_t trial_seed(std::uint64_t master, std::size_t point, std::size_t trial);

struct SolverOutcome {
  Solver solver = Solver::kAlpf;
  double rate = 0.0;  // bit/s, achievable_rate of the solver's allocation
  double alpha = 0.0;
  int iterations = 0;  // ALPF outer iterations, 0 otherwise
  bool converged = true;
};

// Everything computed for one channel draw.
struct TrialSolution {
  ChannelRealization realization;
  std::vector<double> gains1;  // sorted descending
  std::vector<double> gains2;
  EnergyPlan plan;
  Pairing pairing;
  ReducedProblem problem;  // balance rows scaled by the hop-1 coefficient
  std::optional<AlpfResult> alpf;
  std::optional<OracleSolution> oracle;
  std::optional<Allocation> benchmark;
  std::vector<SolverOutcome> outcomes;  // in the requested solver order
};

// Draws a channel from `rng` and runs the requested solvers on it.
TrialSolution solve_trial(const Scenario& scenario, Rng& rng, const std::vector<Solver>& solvers,
                          const AlpfOptions& alpf_options = {});

struct TrialRecord {
  std::size_t point = 0;
  std::size_t trial = 0;
  SolverOutcome outcome;
};

struct SweepRow {
  double sweep_value = 0.0;  // unused for SweepKind::kNone
  Solver solver = Solver::kAlpf;
  double mean_rate = 0.0;
  double std_error = 0.0;
  double mean_alpha = 0.0;
  double mean_iterations = 0.0;
  double convergence_fraction = 0.0;
  std::size_t trials = 0;
};

struct SweepResult {
  SweepKind sweep = SweepKind::kNone;
  std::vector<SweepRow> rows;        // point-major, then solver order
  std::vector<TrialRecord> records;  // point-major, trial, solver order

  // Fraction of ALPF runs that did not converge (0 when ALPF was not run).
  double nonconverged_fraction() const;
};

// Validates the experiment and checks that the output path (if any) can be opened
// before any trial runs. Results do not depend on the thread count.
SweepResult run_experiment(const ExperimentSpec& spec);

// Header plus one row per (sweep value, solver); shortest round-trip decimal
// form for every number.
std::string to_csv(const SweepResult& result);

// Throws ValidationError for an empty result and std::runtime_error naming
// the path on I/O failure.
void emit_csv(const SweepResult& result, const std::filesystem::path& path);

}  // namespace tsr
