#pragma once

// HADOF: iterative decomposition of a QUBO into fixed-size sub-problems whose
// external variables are clamped to their current expectation values.
//
//   1. every P(x_i) starts at 0.5
//   2. for L = 1..p, each subset's sub-QUBO is built from P, converted to
//      Ising form, run through layers 1..L of the annealing schedule, and its
//      per-qubit measurement frequencies replace P on that subset
//   3. every sub-circuit is then run at full depth and sampled; the s-th
//      draw of each subset is concatenated (partition order) into global
//      candidate s
//
// Sequential mode commits each subset's update before the next sub-problem is
// built. Parallel mode builds all sub-problems of an iteration from the
// previous iteration's snapshot and commits at the iteration barrier.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hadof/errors.hpp"
#include "hadof/qubo.hpp"
#include "hadof/random.hpp"
#include "hadof/scheduler.hpp"
#include "hadof/statevector.hpp"

namespace hadof {

using ExpectationVector = std::vector<double>;

enum class UpdateMode { sequential, parallel };

inline std::string to_string(UpdateMode m) { return m == UpdateMode::sequential ? "sequential" : "parallel"; }

struct HadofConfig {
  std::size_t k = 5;
  std::size_t p = 5;
  std::size_t shots_expectation = 500;
  std::size_t shots_final = 5000;
  UpdateMode mode = UpdateMode::sequential;
  std::uint64_t seed = 0;
  double readout_flip = 0.0;
  double schedule_scale = 1.0;
  // Use exact per-qubit probabilities instead of shot frequencies for the
  // expectation sweeps (final sampling is always shot-based).
  bool exact_expectations = false;
  // Divide each circuit's gammas by its largest |h_i| or |J_ij|.
  bool normalize_hamiltonian = true;

  void validate() const {
    if (k < 1) throw ConfigError("HadofConfig: k must be >= 1");
    if (k > kMaxQubits) throw ConfigError("HadofConfig: k exceeds the register cap");
    if (p < 1) throw ConfigError("HadofConfig: p must be >= 1");
    if (shots_expectation < 1 || shots_final < 1) throw ConfigError("HadofConfig: shot counts must be >= 1");
    if (!(readout_flip >= 0.0 && readout_flip < 1.0)) throw ConfigError("HadofConfig: readout_flip outside [0, 1)");
    if (!std::isfinite(schedule_scale)) throw ConfigError("HadofConfig: schedule_scale must be finite");
  }

  [[nodiscard]] AnnealSchedule schedule() const { return AnnealSchedule::linear(p).with_gamma_scale(schedule_scale); }
};

struct Partition {
  std::vector<std::vector<std::size_t>> subsets;
  std::size_t k = 0;
};

// Contiguous blocks of k; the last block holds the remainder.
inline Partition make_partition(std::size_t n, std::size_t k) {
  if (n < 1 || k < 1) throw ConfigError("make_partition: n and k must be >= 1");
  Partition out;
  out.k = k;
  for (std::size_t start = 0; start < n; start += k) {
    std::vector<std::size_t> block(std::min(k, n - start));
    std::iota(block.begin(), block.end(), start);
    out.subsets.push_back(std::move(block));
  }
  return out;
}

struct SubProblem {
  std::vector<std::size_t> subset;  // subset[local] == global index
  QuboProblem qubo;
};

// Restriction of `global` to `subset`, with every other variable replaced by
// its expectation: couplings to the outside fold into the diagonal, and
// outside-only terms fold into the offset.
inline SubProblem build_subproblem(const QuboProblem& global, const std::vector<std::size_t>& subset,
                                   const ExpectationVector& expectations) {
  const std::size_t n = global.n();
  if (expectations.size() != n) throw DimensionError("build_subproblem: expectation vector length != n");
  if (subset.empty()) throw DimensionError("build_subproblem: empty subset");
  constexpr auto kOutside = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> local(n, kOutside);
  for (std::size_t l = 0; l < subset.size(); ++l) {
    if (subset[l] >= n) throw DimensionError("build_subproblem: index " + std::to_string(subset[l]) + " out of range");
    if (local[subset[l]] != kOutside) throw DimensionError("build_subproblem: duplicate index in subset");
    local[subset[l]] = l;
  }

  SubProblem out{subset, QuboProblem(subset.size(), global.offset())};
  for (const auto& [ij, q] : global.coefficients()) {
    const auto [i, j] = ij;
    const std::size_t li = local[i];
    const std::size_t lj = local[j];
    if (li != kOutside && lj != kOutside) {
      out.qubo.add(li, lj, q);
    } else if (li != kOutside) {
      out.qubo.add(li, li, q * expectations[j]);
    } else if (lj != kOutside) {
      out.qubo.add(lj, lj, q * expectations[i]);
    } else if (i == j) {
      out.qubo.add_offset(q * expectations[i]);
    } else {
      out.qubo.add_offset(q * expectations[i] * expectations[j]);
    }
  }
  return out;
}

struct SolveReport {
  BinaryAssignment best_assignment;
  double best_objective = 0.0;
  std::vector<double> sample_objectives;
  ExpectationVector final_expectations;
  double wall_clock_s = 0.0;
  double modelled_qpu_s = 0.0;
  double modelled_makespan_s = 0.0;
  std::size_t jobs_executed = 0;
  std::vector<ExpectationVector> trace;  // initial vector, then one per iteration
  TimingLedger ledger;
};

namespace detail {

enum Phase : std::uint64_t { kSweep = 0, kFinal = 1, kFull = 2 };

inline CircuitJob make_job(std::size_t id, const QuboProblem& sub, const HadofConfig& config,
                           const AnnealSchedule& schedule, std::size_t depth, std::size_t iteration,
                           std::size_t subset, Phase phase) {
  CircuitJob job;
  job.job_id = id;
  job.model = to_ising(sub);
  job.schedule = schedule;
  if (config.normalize_hamiltonian) {
    double peak = 0.0;
    for (double h : job.model.h) peak = std::max(peak, std::abs(h));
    for (const auto& [ij, v] : job.model.J) peak = std::max(peak, std::abs(v));
    if (peak > 0.0) job.schedule = schedule.with_gamma_scale(1.0 / peak);
  }
  job.depth = depth;
  job.iteration = iteration;
  job.subset = subset;
  job.readout_flip = config.readout_flip;
  job.seed = derive_seed(config.seed, {iteration, subset, phase});
  if (phase == kSweep) {
    job.mode = config.exact_expectations ? ShotMode::exact_expectations : ShotMode::sampled_expectations;
    job.shots = config.shots_expectation;
  } else {
    job.mode = ShotMode::bitstrings;
    job.shots = config.shots_final;
  }
  return job;
}

inline void commit(ExpectationVector& expectations, const std::vector<std::size_t>& subset,
                   const std::vector<double>& values) {
  if (values.size() != subset.size()) throw DimensionError("expectation update size mismatch");
  for (std::size_t l = 0; l < subset.size(); ++l) expectations[subset[l]] = std::clamp(values[l], 0.0, 1.0);
}

inline void finish_report(SolveReport& report, const Executor& executor,
                          std::chrono::steady_clock::time_point started) {
  report.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  report.ledger = executor.ledger();
  report.modelled_qpu_s = report.ledger.modelled_qpu_s;
  report.modelled_makespan_s = report.ledger.modelled_makespan_s;
  report.jobs_executed = report.ledger.jobs.size();
}

}  // namespace detail

// Resets the executor's ledger; the report carries this solve's ledger.
inline SolveReport hadof_solve(const QuboProblem& global, const HadofConfig& config, Executor& executor) {
  config.validate();
  const std::size_t n = global.n();
  if (n < config.k) {
    throw ConfigError("hadof_solve: n=" + std::to_string(n) + " smaller than subset size k=" + std::to_string(config.k));
  }
  const auto started = std::chrono::steady_clock::now();
  executor.reset_ledger();

  const Partition partition = make_partition(n, config.k);
  const std::size_t m = partition.subsets.size();
  const AnnealSchedule schedule = config.schedule();

  SolveReport report;
  ExpectationVector expectations(n, 0.5);
  report.trace.push_back(expectations);
  std::size_t next_id = 0;

  for (std::size_t layer = 1; layer <= config.p; ++layer) {
    const std::size_t iteration = layer - 1;
    if (config.mode == UpdateMode::sequential) {
      for (std::size_t i = 0; i < m; ++i) {
        const auto sub = build_subproblem(global, partition.subsets[i], expectations);
        const CircuitJob job =
            detail::make_job(next_id++, sub.qubo, config, schedule, layer, iteration, i, detail::kSweep);
        const auto results = executor.execute(std::span(&job, 1));
        detail::commit(expectations, partition.subsets[i], results.front().expectations);
      }
    } else {
      std::vector<CircuitJob> jobs;
      jobs.reserve(m);
      for (std::size_t i = 0; i < m; ++i) {
        const auto sub = build_subproblem(global, partition.subsets[i], expectations);
        jobs.push_back(detail::make_job(next_id++, sub.qubo, config, schedule, layer, iteration, i, detail::kSweep));
      }
      const auto results = executor.execute(jobs);
      for (std::size_t i = 0; i < m; ++i) detail::commit(expectations, partition.subsets[i], results[i].expectations);
    }
    report.trace.push_back(expectations);
  }

  // Final full-depth sampling, rebuilt from the final expectations.
  std::vector<CircuitJob> final_jobs;
  final_jobs.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto sub = build_subproblem(global, partition.subsets[i], expectations);
    final_jobs.push_back(
        detail::make_job(next_id++, sub.qubo, config, schedule, config.p, config.p, i, detail::kFinal));
  }
  std::vector<JobResult> final_results;
  if (config.mode == UpdateMode::sequential) {
    for (const auto& job : final_jobs) final_results.push_back(std::move(executor.execute(std::span(&job, 1)).front()));
  } else {
    final_results = executor.execute(final_jobs);
  }

  const QuboEvaluator evaluate_global(global);
  BinaryAssignment candidate(n);
  report.sample_objectives.reserve(config.shots_final);
  report.best_objective = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < config.shots_final; ++s) {
    for (std::size_t i = 0; i < m; ++i) {
      const auto& subset = partition.subsets[i];
      const BasisIndex draw = final_results[i].samples.draws[s];
      for (std::size_t l = 0; l < subset.size(); ++l) candidate[subset[l]] = static_cast<Bit>((draw >> l) & 1U);
    }
    const double value = evaluate_global(candidate);
    report.sample_objectives.push_back(value);
    if (value < report.best_objective) {
      report.best_objective = value;
      report.best_assignment = candidate;
    }
  }
  report.final_expectations = std::move(expectations);
  detail::finish_report(report, executor, started);
  return report;
}

inline constexpr std::size_t kMaxFullCircuitQubits = 20;

// One n-qubit circuit over the whole problem, no decomposition.
inline SolveReport full_qaoa_solve(const QuboProblem& global, const HadofConfig& config, Executor& executor) {
  config.validate();
  const std::size_t n = global.n();
  if (n > kMaxFullCircuitQubits) {
    throw CapacityError("full_qaoa_solve: n=" + std::to_string(n) + " exceeds the full-circuit cap of " +
                        std::to_string(kMaxFullCircuitQubits));
  }
  const auto started = std::chrono::steady_clock::now();
  executor.reset_ledger();

  const CircuitJob job = detail::make_job(0, global, config, config.schedule(), config.p, 0, 0, detail::kFull);
  const auto results = executor.execute(std::span(&job, 1));
  const SampleSet& samples = results.front().samples;

  SolveReport report;
  const QuboEvaluator evaluate_global(global);
  std::vector<std::size_t> ones(n, 0);
  report.best_objective = std::numeric_limits<double>::infinity();
  report.sample_objectives.reserve(samples.draws.size());
  for (const BasisIndex draw : samples.draws) {
    const BinaryAssignment x = bits_from_index(draw, n);
    for (std::size_t j = 0; j < n; ++j) ones[j] += x[j];
    const double value = evaluate_global(x);
    report.sample_objectives.push_back(value);
    if (value < report.best_objective) {
      report.best_objective = value;
      report.best_assignment = x;
    }
  }
  report.final_expectations.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    report.final_expectations[j] = static_cast<double>(ones[j]) / static_cast<double>(samples.draws.size());
  }
  detail::finish_report(report, executor, started);
  return report;
}

inline SolveReport full_qaoa_solve(const QuboProblem& global, const HadofConfig& config) {
  Executor executor({BackendSpec{}}, Policy::sequential, 1);
  return full_qaoa_solve(global, config, executor);
}

struct Accuracy {
  double value = 0.0;
  bool comparable = true;  // false when objective and reference have mixed signs
};

// Ratio against a reference that scores 1.
inline Accuracy accuracy(double objective, double reference) {
  if (reference == 0.0) throw ConfigError("accuracy: zero reference objective");
  if (reference < 0.0 && objective <= 0.0) return {objective / reference, true};
  if (reference > 0.0 && objective > 0.0) return {reference / objective, true};
  return {0.0, false};
}

struct AccuracySummary {
  double best = 0.0;
  double average = 0.0;
  bool best_comparable = true;
};

inline AccuracySummary summarize_accuracy(const SolveReport& report, double reference) {
  AccuracySummary out;
  const auto best = accuracy(report.best_objective, reference);
  out.best = best.value;
  out.best_comparable = best.comparable;
  double sum = 0.0;
  for (double v : report.sample_objectives) sum += accuracy(v, reference).value;
  out.average = report.sample_objectives.empty() ? 0.0 : sum / static_cast<double>(report.sample_objectives.size());
  return out;
}

inline std::string to_bitstring(const BinaryAssignment& x) {
  std::string s;
  s.reserve(x.size());
  for (Bit b : x) s.push_back(b ? '1' : '0');
  return s;
}

// Assignment strings list variable 0 first.
inline nlohmann::json report_to_json(const SolveReport& report, bool include_wall_clock = true) {
  nlohmann::json j;
  j["best_assignment"] = to_bitstring(report.best_assignment);
  j["best_objective"] = report.best_objective;
  j["jobs_executed"] = report.jobs_executed;
  j["modelled_qpu_s"] = report.modelled_qpu_s;
  j["modelled_makespan_s"] = report.modelled_makespan_s;
  if (include_wall_clock) j["wall_clock_s"] = report.wall_clock_s;
  j["final_expectations"] = report.final_expectations;
  j["trace"] = report.trace;
  j["sample_objectives"] = report.sample_objectives;
  return j;
}

}  // namespace hadof
