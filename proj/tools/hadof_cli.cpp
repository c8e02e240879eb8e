// hadof: command-line driver for solving, benchmarking and genome assembly.
//
// Exit codes: 0 success, 2 bad spec or arguments, 3 solver failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hadof/experiment.hpp"

namespace {

constexpr int kSpecError = 2;
constexpr int kSolverFailure = 3;

struct HadofFlags {
  std::size_t k = 5;
  std::size_t p = 5;
  std::size_t shots_expectation = 500;
  std::size_t shots_final = 5000;
  double readout_flip = 0.0;
  double schedule_scale = 1.0;
  bool exact_expectations = false;
  bool raw_hamiltonian = false;

  void attach(CLI::App* app) {
    app->add_option("-k,--subset-size", k, "variables per sub-circuit");
    app->add_option("-p,--layers", p, "annealing layers / iterations");
    app->add_option("--shots-expectation", shots_expectation, "shots per expectation sweep");
    app->add_option("--shots-final", shots_final, "shots in the final sampling sweep");
    app->add_option("--readout-flip", readout_flip, "per-bit readout flip probability");
    app->add_option("--schedule-scale", schedule_scale, "multiplier on every gamma");
    app->add_flag("--exact-expectations", exact_expectations, "use exact qubit probabilities in sweeps");
    app->add_flag("--raw-hamiltonian", raw_hamiltonian, "do not normalise each circuit's coefficients");
  }

  [[nodiscard]] hadof::HadofConfig config(std::uint64_t seed) const {
    hadof::HadofConfig c;
    c.k = k;
    c.p = p;
    c.shots_expectation = shots_expectation;
    c.shots_final = shots_final;
    c.readout_flip = readout_flip;
    c.schedule_scale = schedule_scale;
    c.exact_expectations = exact_expectations;
    c.normalize_hamiltonian = !raw_hamiltonian;
    c.seed = seed;
    return c;
  }
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_solve(const std::string& qubo_path, std::size_t random_n, double lo, double hi, std::uint64_t problem_seed,
              const std::string& solver_name, std::uint64_t seed, const HadofFlags& flags, std::size_t sweeps,
              std::size_t reads, const std::string& policy_name, std::size_t workers, const std::string& out_path,
              const std::string& ledger_path, bool reference) {
  using namespace hadof;
  QuboProblem problem = qubo_path.empty() ? random_qubo(random_n, lo, hi, problem_seed) : load_qubo(qubo_path);
  const SolverKind solver = parse_solver(solver_name);
  const Policy policy = parse_policy(policy_name);
  HadofConfig hc = flags.config(seed);
  hc.validate();
  SaConfig sa;
  sa.sweeps = sweeps;
  sa.reads = reads;
  sa.seed = seed;

  SolverRun run;
  try {
    run = run_solver(solver, problem, hc, sa, {BackendSpec{}}, policy, workers);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "solver failed: " << e.what() << '\n';
    return kSolverFailure;
  }

  nlohmann::json doc = run.report ? report_to_json(*run.report) : nlohmann::json::object();
  doc["solver"] = solver_name;
  doc["n"] = problem.n();
  doc["best_objective"] = run.best_objective;
  doc["best_assignment"] = to_bitstring(run.best_assignment);
  doc["wall_s"] = run.wall_s;
  std::printf("solver=%s n=%zu best_objective=%.10g wall_s=%.4f modelled_qpu_s=%.1f makespan_s=%.1f\n",
              solver_name.c_str(), problem.n(), run.best_objective, run.wall_s, run.modelled_qpu_s, run.makespan_s);
  if (reference) {
    SaConfig ref = sa;
    ref.seed = derive_seed(seed, {2});
    const double r = reference_objective(problem, ref);
    doc["reference_objective"] = r;
    if (r != 0.0) {
      SolveReport shim;
      shim.best_objective = run.best_objective;
      shim.sample_objectives = run.sample_objectives;
      const auto acc = summarize_accuracy(shim, r);
      doc["best_acc"] = acc.best;
      doc["avg_acc"] = acc.average;
      std::printf("reference=%.10g best_acc=%.4f avg_acc=%.4f%s\n", r, acc.best, acc.average,
                  acc.best_comparable ? "" : " (mixed signs)");
    }
  }
  if (!out_path.empty()) write_file(out_path, doc.dump(1) + "\n");
  if (!ledger_path.empty() && run.report) write_ledger_csv(run.report->ledger, ledger_path);
  return 0;
}

int cmd_bench(const std::string& spec_path, std::uint64_t seed, const std::string& out_dir, std::size_t reps,
              const std::vector<std::string>& solvers, std::size_t workers, bool no_wall_clock, bool concurrent) {
  using namespace hadof;
  ExperimentSpec spec = load_spec(spec_path);
  spec.seed = seed;
  if (!out_dir.empty()) spec.output_dir = out_dir;
  if (reps > 0) spec.repetitions = reps;
  if (!solvers.empty()) {
    spec.solvers.clear();
    for (const auto& s : solvers) spec.solvers.push_back(parse_solver(s));
  }
  if (workers > 0) spec.workers = workers;
  if (no_wall_clock) spec.record_wall_clock = false;
  if (concurrent) spec.concurrent_repetitions = true;
  spec.validate();

  const auto result = run_experiment(spec);
  std::cout << "wrote " << result.records.size() << " rows to " << (spec.output_dir / "results.csv").string() << '\n';
  print_summary(std::cout, report_summary(spec.output_dir / "results.csv"));
  if (result.failures > 0) {
    std::cerr << result.failures << " solver run(s) failed; see status=error rows\n";
    return kSolverFailure;
  }
  return 0;
}

int cmd_assemble(const std::string& fasta, const std::string& out_path, const std::string& encoding,
                 std::size_t min_overlap, double penalty, bool reduce, const std::string& solver, std::uint64_t seed,
                 const HadofFlags& flags, std::size_t workers, const std::string& edges_path,
                 const std::string& qubo_path) {
  using namespace hadof;
  const ReadSet reads = load_fasta(fasta);
  AssemblyConfig config;
  config.encoding = parse_encoding(encoding);
  config.min_overlap = min_overlap;
  config.penalty = penalty;
  config.transitive_reduction = reduce;
  config.solver = parse_solver(solver);
  config.hadof = flags.config(seed);
  config.sa.seed = seed;
  config.workers = workers;

  AssemblyResult result;
  try {
    result = assemble(reads, config);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "solver failed: " << e.what() << '\n';
    return kSolverFailure;
  }
  std::printf("reads=%zu edges=%zu variables=%zu best_objective=%.10g\n", reads.size(), result.graph.edges.size(),
              result.qubo.n(), result.best_objective);
  if (!edges_path.empty()) {
    std::ofstream e(edges_path);
    write_edge_csv(e, result.graph);
  }
  if (!qubo_path.empty()) save_qubo(result.qubo, qubo_path);
  if (!result.path.valid) {
    std::cerr << "no valid path decoded: " << result.path.diagnostic << '\n';
    return kSolverFailure;
  }
  if (result.path.order.size() != reads.size()) {
    std::cerr << "warning: path covers " << result.path.order.size() << " of " << reads.size() << " reads\n";
  }
  ReadSet contig;
  contig.reads.push_back({"contig_1 length=" + std::to_string(result.sequence.size()), result.sequence});
  std::ostringstream text;
  write_fasta(text, contig);
  if (out_path.empty() || out_path == "-") {
    std::cout << text.str();
  } else {
    write_file(out_path, text.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HADOF QUBO decomposition solver"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "solve one QUBO with one solver");
  std::string qubo_path;
  std::size_t random_n = 0;
  double lo = -10.0;
  double hi = 10.0;
  std::uint64_t problem_seed = 0;
  std::string solver = "hadof-sequential";
  std::uint64_t seed = 0;
  HadofFlags flags;
  std::size_t sweeps = 1000;
  std::size_t reads = 100;
  std::string policy = "parallel-one-backend";
  std::size_t workers = 0;
  std::string out_path;
  std::string ledger_path;
  bool reference = false;
  auto* src = solve->add_option_group("problem");
  src->add_option("--qubo", qubo_path, "QUBO JSON file")->check(CLI::ExistingFile);
  src->add_option("--random-n", random_n, "generate a random QUBO with n variables");
  src->require_option(1);
  solve->add_option("--lo", lo, "random coefficient lower bound");
  solve->add_option("--hi", hi, "random coefficient upper bound");
  solve->add_option("--problem-seed", problem_seed, "random QUBO seed");
  solve->add_option("--solver", solver, "hadof-sequential | hadof-parallel | full-qaoa | sa | brute");
  solve->add_option("--seed", seed, "master seed");
  flags.attach(solve);
  solve->add_option("--sa-sweeps", sweeps);
  solve->add_option("--sa-reads", reads);
  solve->add_option("--policy", policy, "sequential | parallel-one-backend | parallel-multi-backend");
  solve->add_option("--workers", workers, "worker threads (0: all cores)");
  solve->add_option("-o,--out", out_path, "write the report JSON here");
  solve->add_option("--ledger", ledger_path, "write the job timing ledger CSV here");
  solve->add_flag("--reference", reference, "also run the SA reference and print accuracies");

  // bench
  auto* bench = app.add_subcommand("bench", "run an experiment spec");
  std::string spec_path;
  std::uint64_t bench_seed = 0;
  std::string bench_out;
  std::size_t bench_reps = 0;
  std::vector<std::string> bench_solvers;
  std::size_t bench_workers = 0;
  bool no_wall_clock = false;
  bool concurrent = false;
  bench->add_option("spec", spec_path, "experiment spec JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--seed", bench_seed, "master seed")->required();
  bench->add_option("-o,--out", bench_out, "output directory (overrides the spec)");
  bench->add_option("--reps", bench_reps, "repetitions (overrides the spec)");
  bench->add_option("--solvers", bench_solvers, "solver list (overrides the spec)");
  bench->add_option("--workers", bench_workers, "worker threads (overrides the spec)");
  bench->add_flag("--no-wall-clock", no_wall_clock, "write wall-clock fields as 0 for reproducible output");
  bench->add_flag("--concurrent", concurrent, "run repetitions concurrently (accuracy-only sweeps)");

  // assemble
  auto* asm_cmd = app.add_subcommand("assemble", "assemble reads from a FASTA file");
  std::string fasta;
  std::string asm_out;
  std::string encoding = "edge";
  std::size_t min_overlap = 3;
  double penalty = 1.0;
  bool reduce = false;
  std::string asm_solver = "brute";
  std::uint64_t asm_seed = 0;
  HadofFlags asm_flags;
  std::size_t asm_workers = 0;
  std::string edges_path;
  std::string asm_qubo;
  asm_cmd->add_option("fasta", fasta, "input reads")->required()->check(CLI::ExistingFile);
  asm_cmd->add_option("-o,--out", asm_out, "assembled FASTA (default stdout)");
  asm_cmd->add_option("--encoding", encoding, "edge | permutation");
  asm_cmd->add_option("--min-overlap", min_overlap);
  asm_cmd->add_option("--penalty", penalty);
  asm_cmd->add_flag("--transitive-reduction", reduce);
  asm_cmd->add_option("--solver", asm_solver, "brute | sa | hadof-sequential | hadof-parallel | full-qaoa");
  asm_cmd->add_option("--seed", asm_seed);
  asm_flags.attach(asm_cmd);
  asm_cmd->add_option("--workers", asm_workers);
  asm_cmd->add_option("--edges", edges_path, "write the overlap graph as tail,head,weight CSV");
  asm_cmd->add_option("--qubo-out", asm_qubo, "write the encoded QUBO JSON");

  // gen
  auto* gen = app.add_subcommand("gen", "generate inputs");
  gen->require_subcommand(1);
  auto* gen_qubo = gen->add_subcommand("qubo", "random QUBO JSON");
  std::size_t gen_n = 10;
  double gen_lo = -10.0;
  double gen_hi = 10.0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen_qubo->add_option("-n", gen_n)->required();
  gen_qubo->add_option("--lo", gen_lo);
  gen_qubo->add_option("--hi", gen_hi);
  gen_qubo->add_option("--seed", gen_seed);
  gen_qubo->add_option("-o,--out", gen_out)->required();
  auto* gen_reads = gen->add_subcommand("reads", "error-free reads from a random genome");
  std::size_t genome_length = 600;
  std::size_t read_length = 100;
  std::size_t stride = 50;
  bool shuffle = false;
  std::string genome_out;
  gen_reads->add_option("--genome-length", genome_length);
  gen_reads->add_option("--read-length", read_length);
  gen_reads->add_option("--stride", stride);
  gen_reads->add_option("--seed", gen_seed);
  gen_reads->add_flag("--shuffle", shuffle);
  gen_reads->add_option("-o,--out", gen_out, "reads FASTA")->required();
  gen_reads->add_option("--genome-out", genome_out, "reference genome FASTA");

  // report
  auto* report = app.add_subcommand("report", "summarise a results CSV");
  std::string csv_path;
  report->add_option("csv", csv_path, "results.csv from bench")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kSpecError;
  }

  try {
    if (*solve) {
      return cmd_solve(qubo_path, random_n, lo, hi, problem_seed, solver, seed, flags, sweeps, reads, policy, workers,
                       out_path, ledger_path, reference);
    }
    if (*bench) {
      return cmd_bench(spec_path, bench_seed, bench_out, bench_reps, bench_solvers, bench_workers, no_wall_clock,
                       concurrent);
    }
    if (*asm_cmd) {
      return cmd_assemble(fasta, asm_out, encoding, min_overlap, penalty, reduce, asm_solver, asm_seed, asm_flags,
                          asm_workers, edges_path, asm_qubo);
    }
    if (*gen_qubo) {
      hadof::save_qubo(hadof::random_qubo(gen_n, gen_lo, gen_hi, gen_seed), gen_out);
      return 0;
    }
    if (*gen_reads) {
      const std::string genome = hadof::random_genome(genome_length, gen_seed);
      const auto set = hadof::synthesize_reads(genome, read_length, stride, hadof::derive_seed(gen_seed, {1}), shuffle);
      std::ostringstream text;
      hadof::write_fasta(text, set);
      write_file(gen_out, text.str());
      if (!genome_out.empty()) {
        std::ostringstream g;
        hadof::write_fasta(g, hadof::ReadSet{{{"genome", genome}}});
        write_file(genome_out, g.str());
      }
      return 0;
    }
    if (*report) {
      hadof::print_summary(std::cout, hadof::report_summary(std::filesystem::path(csv_path)));
      return 0;
    }
  } catch (const hadof::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSpecError;
  } catch (const hadof::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSpecError;
  } catch (const hadof::DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSpecError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverFailure;
  }
  return 0;
}
