#include "tsr/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace tsr {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool is_count(double v) { return v >= 1.0 && v <= 1e6 && std::floor(v) == v; }

std::string number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return std::string(buf, ptr);
}

SolverOutcome outcome_for(Solver solver, const TrialSolution& t, const Scenario& scenario) {
  SolverOutcome out;
  out.solver = solver;
  switch (solver) {
    case Solver::kAlpf: {
      const auto& res = *t.alpf;
      const Allocation alloc = allocation_from_pairs(res.allocation.alpha, res.allocation.mu,
                                                     res.allocation.mu_bar, t.pairing);
      out.rate = achievable_rate(alloc, t.gains1, t.gains2, t.plan, scenario);
      out.alpha = alloc.alpha;
      out.iterations = res.report.outer_iterations;
      out.converged = res.report.converged;
      break;
    }
    case Solver::kOracle: {
      const auto& sol = *t.oracle;
      const Allocation alloc =
          allocation_from_pairs(sol.alpha_star, sol.mu_star, sol.mu_bar_star, t.pairing);
      out.rate = achievable_rate(alloc, t.gains1, t.gains2, t.plan, scenario);
      out.alpha = sol.alpha_star;
      break;
    }
    case Solver::kBenchmark:
      out.rate = achievable_rate(*t.benchmark, t.gains1, t.gains2, t.plan, scenario);
      out.alpha = t.benchmark->alpha;
      break;
  }
  return out;
}

void check_writable(const std::filesystem::path& path) {
  if (path.empty()) return;
  std::ofstream probe(path, std::ios::app);
  if (!probe) throw ValidationError("output path is not writable: " + path.string());
}

}  // namespace

std::string to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::kNone: return "none";
    case SweepKind::kPhi: return "phi";
    case SweepKind::kPSource: return "p_source";
    case SweepKind::kAntennas: return "antennas";
    case SweepKind::kKSubcarriers: return "k_subcarriers";
  }
  return "none";
}

std::string to_string(Solver solver) {
  switch (solver) {
    case Solver::kAlpf: return "alpf";
    case Solver::kOracle: return "oracle";
    case Solver::kBenchmark: return "benchmark";
  }
  return "alpf";
}

SweepKind parse_sweep_kind(const std::string& text) {
  for (auto k : {SweepKind::kNone, SweepKind::kPhi, SweepKind::kPSource, SweepKind::kAntennas,
                 SweepKind::kKSubcarriers}) {
    if (to_string(k) == text) return k;
  }
  throw ValidationError("unknown sweep '" + text +
                        "' (expected none, phi, p_source, antennas or k_subcarriers)");
}

Solver parse_solver(const std::string& text) {
  for (auto s : {Solver::kAlpf, Solver::kOracle, Solver::kBenchmark}) {
    if (to_string(s) == text) return s;
  }
  throw ValidationError("unknown solver '" + text + "' (expected alpf, oracle or benchmark)");
}

std::size_t ExperimentSpec::point_count() const {
  return sweep == SweepKind::kNone ? 1 : sweep_values.size();
}

Scenario ExperimentSpec::scenario_at(std::size_t point) const {
  Scenario s = scenario;
  if (sweep == SweepKind::kNone) return s;
  const double v = sweep_values.at(point);
  switch (sweep) {
    case SweepKind::kPhi: s.phi = v; break;
    case SweepKind::kPSource: s.p_source = v; break;
    case SweepKind::kAntennas:
      s.n_s = s.n_r = s.n_d = static_cast<std::size_t>(v);
      break;
    case SweepKind::kKSubcarriers: s.k_subcarriers = static_cast<std::size_t>(v); break;
    case SweepKind::kNone: break;
  }
  return s;
}

void ExperimentSpec::validate() const {
  scenario.validate();
  if (trials < 1) throw ValidationError("trials must be >= 1");
  if (threads < 1) throw ValidationError("threads must be >= 1");
  if (solvers.empty()) throw ValidationError("solvers must name at least one solver");
  for (std::size_t i = 0; i < solvers.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (solvers[i] == solvers[j]) {
        throw ValidationError("solver '" + to_string(solvers[i]) + "' listed twice");
      }
    }
  }
  if (!(nonconvergence_threshold >= 0.0 && nonconvergence_threshold <= 1.0)) {
    throw ValidationError("nonconvergence_threshold must lie in [0, 1]");
  }
  if (!(alpf.eps > 0.0)) throw ValidationError("eps must be > 0");
  if (alpf.max_outer_iters < 1) throw ValidationError("max_outer_iters must be >= 1");
  if (alpf.max_inner_iters < 1) throw ValidationError("max_inner_iters must be >= 1");
  if (sweep == SweepKind::kNone) {
    if (!sweep_values.empty()) throw ValidationError("sweep_values given without a sweep");
    return;
  }
  if (sweep_values.empty()) {
    throw ValidationError("sweep '" + to_string(sweep) + "' needs nonempty sweep_values");
  }
  for (std::size_t i = 0; i < sweep_values.size(); ++i) {
    const double v = sweep_values[i];
    if ((sweep == SweepKind::kAntennas || sweep == SweepKind::kKSubcarriers) && !is_count(v)) {
      throw ValidationError("sweep value " + number(v) + " is not a positive integer");
    }
    try {
      scenario_at(i).validate();
    } catch (const ValidationError& e) {
      throw ValidationError("sweep value " + number(v) + ": " + e.what());
    }
  }
}

const std::set<std::string, std::less<>>& experiment_keys() {
  static const std::set<std::string, std::less<>> keys = [] {
    std::set<std::string, std::less<>> k = scenario_keys();
    k.insert({"sweep", "sweep_values", "trials", "solvers", "output", "master_seed", "threads",
              "nonconvergence_threshold", "eps", "max_outer_iters", "max_inner_iters",
              "inner_method"});
    return k;
  }();
  return keys;
}

ExperimentSpec experiment_from_document(const KeyValueDocument& doc) {
  doc.reject_unknown(experiment_keys());
  ExperimentSpec spec;
  spec.scenario = scenario_from_document(doc);
  spec.sweep = parse_sweep_kind(doc.get_string("sweep", "none"));
  if (doc.contains("sweep_values")) spec.sweep_values = doc.get_double_list("sweep_values");
  spec.trials = doc.get_count("trials", spec.trials);
  if (doc.contains("solvers")) {
    spec.solvers.clear();
    for (const auto& name : doc.get_string_list("solvers")) spec.solvers.push_back(parse_solver(name));
  }
  spec.output_path = doc.get_string("output", "");
  spec.master_seed = doc.get_u64("master_seed", spec.scenario.seed);
  spec.threads = doc.get_count("threads", spec.threads);
  spec.nonconvergence_threshold =
      doc.get_double("nonconvergence_threshold", spec.nonconvergence_threshold);
  spec.alpf.eps = doc.get_double("eps", spec.alpf.eps);
  spec.alpf.max_outer_iters =
      static_cast<int>(doc.get_count("max_outer_iters", spec.alpf.max_outer_iters));
  spec.alpf.max_inner_iters =
      static_cast<int>(doc.get_count("max_inner_iters", spec.alpf.max_inner_iters));
  const std::string method = doc.get_string("inner_method", "diagonal");
  if (method == "newton") {
    spec.alpf.inner_method = InnerMethod::kProjectedNewton;
  } else if (method != "diagonal") {
    throw ValidationError("unknown inner_method '" + method + "' (expected diagonal or newton)");
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  return experiment_from_document(KeyValueDocument::load(path));
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t point, std::size_t trial) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(point));
  return splitmix64(h ^ (static_cast<std::uint64_t>(trial) + 0x632be59bd9b4e019ULL));
}

TrialSolution solve_trial(const Scenario& scenario, Rng& rng, const std::vector<Solver>& solvers,
                          const AlpfOptions& alpf_options) {
  TrialSolution t;
  t.realization = generate_channel(scenario, rng);
  const auto eff = effective_subchannels(t.realization);
  t.gains1 = gain_values(eff.hop1);
  t.gains2 = gain_values(eff.hop2);
  t.plan = optimal_energy_plan(t.realization, scenario);
  const double noise = scenario.noise_per_subchannel();
  t.pairing = optimal_pairing(t.gains1, t.gains2, noise, noise);
  t.problem = with_hop1_balance_scale(reduced_problem(t.gains1, t.gains2, t.pairing, t.plan, scenario));
  for (Solver s : solvers) {
    switch (s) {
      case Solver::kAlpf: t.alpf = optimize(t.problem, alpf_options); break;
      case Solver::kOracle: t.oracle = solve_oracle(t.problem); break;
      case Solver::kBenchmark: t.benchmark = benchmark_allocation(t.gains1, t.gains2); break;
    }
    t.outcomes.push_back(outcome_for(s, t, scenario));
  }
  return t;
}

double SweepResult::nonconverged_fraction() const {
  std::size_t runs = 0;
  std::size_t failed = 0;
  for (const auto& r : records) {
    if (r.outcome.solver != Solver::kAlpf) continue;
    ++runs;
    if (!r.outcome.converged) ++failed;
  }
  return runs == 0 ? 0.0 : static_cast<double>(failed) / static_cast<double>(runs);
}

SweepResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  check_writable(spec.output_path);

  const std::size_t points = spec.point_count();
  const std::size_t per_trial = spec.solvers.size();
  const std::size_t jobs = points * spec.trials;
  std::vector<std::vector<SolverOutcome>> slots(jobs);
  std::vector<std::exception_ptr> errors(spec.threads);

  const auto work = [&](std::size_t worker) {
    try {
      for (std::size_t job = worker; job < jobs; job += spec.threads) {
        const std::size_t point = job / spec.trials;
        const std::size_t trial = job % spec.trials;
        Rng rng(trial_seed(spec.master_seed, point, trial));
        slots[job] = solve_trial(spec.scenario_at(point), rng, spec.solvers, spec.alpf).outcomes;
      }
    } catch (...) {
      errors[worker] = std::current_exception();
    }
  };
  if (spec.threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < spec.threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SweepResult result;
  result.sweep = spec.sweep;
  for (std::size_t point = 0; point < points; ++point) {
    for (std::size_t trial = 0; trial < spec.trials; ++trial) {
      for (const auto& o : slots[point * spec.trials + trial]) {
        result.records.push_back({point, trial, o});
      }
    }
    for (std::size_t s = 0; s < per_trial; ++s) {
      SweepRow row;
      row.sweep_value = spec.sweep == SweepKind::kNone ? 0.0 : spec.sweep_values[point];
      row.solver = spec.solvers[s];
      row.trials = spec.trials;
      double sum = 0.0;
      double alpha = 0.0;
      double iters = 0.0;
      double converged = 0.0;
      for (std::size_t trial = 0; trial < spec.trials; ++trial) {
        const auto& o = slots[point * spec.trials + trial][s];
        sum += o.rate;
        alpha += o.alpha;
        iters += o.iterations;
        converged += o.converged ? 1.0 : 0.0;
      }
      const double n = static_cast<double>(spec.trials);
      row.mean_rate = sum / n;
      row.mean_alpha = alpha / n;
      row.mean_iterations = iters / n;
      row.convergence_fraction = converged / n;
      if (spec.trials > 1) {
        double sq = 0.0;
        for (std::size_t trial = 0; trial < spec.trials; ++trial) {
          const double d = slots[point * spec.trials + trial][s].rate - row.mean_rate;
          sq += d * d;
        }
        row.std_error = std::sqrt(sq / (n - 1.0) / n);
      }
      result.rows.push_back(row);
    }
  }
  return result;
}

std::string to_csv(const SweepResult& result) {
  std::string out =
      "sweep,sweep_value,solver,mean_rate_bps,std_error_bps,mean_alpha,mean_iterations,"
      "convergence_fraction,trials\n";
  for (const auto& r : result.rows) {
    out += to_string(result.sweep) + ",";
    if (result.sweep != SweepKind::kNone) out += number(r.sweep_value);
    out += "," + to_string(r.solver) + "," + number(r.mean_rate) + "," + number(r.std_error) +
           "," + number(r.mean_alpha) + "," + number(r.mean_iterations) + "," +
           number(r.convergence_fraction) + "," + std::to_string(r.trials) + "\n";
  }
  return out;
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path) {
  if (result.rows.empty()) throw ValidationError("emit_csv: result has no rows");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << to_csv(result);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace tsr
