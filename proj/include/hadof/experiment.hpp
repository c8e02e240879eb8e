#pragma once

// Declarative experiment sweeps: problem source x solvers x repetitions,
// accuracy against an SA reference, CSV/JSON emission and summaries.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "hadof/annealing.hpp"
#include "hadof/engine.hpp"
#include "hadof/errors.hpp"
#include "hadof/genome.hpp"
#include "hadof/qubo.hpp"
#include "hadof/qubo_io.hpp"
#include "hadof/scheduler.hpp"

namespace hadof {

enum class SolverKind { hadof_sequential, hadof_parallel, full_qaoa, sa, brute };

inline std::string to_string(SolverKind s) {
  switch (s) {
    case SolverKind::hadof_sequential: return "hadof-sequential";
    case SolverKind::hadof_parallel: return "hadof-parallel";
    case SolverKind::full_qaoa: return "full-qaoa";
    case SolverKind::sa: return "sa";
    case SolverKind::brute: return "brute";
  }
  return "?";
}

inline SolverKind parse_solver(const std::string& s) {
  for (auto k : {SolverKind::hadof_sequential, SolverKind::hadof_parallel, SolverKind::full_qaoa, SolverKind::sa,
                 SolverKind::brute}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown solver '" + s + "'");
}

enum class Encoding { edge, permutation };

inline Encoding parse_encoding(const std::string& s) {
  if (s == "edge") return Encoding::edge;
  if (s == "permutation") return Encoding::permutation;
  throw ConfigError("unknown encoding '" + s + "'");
}

inline std::string to_string(Encoding e) { return e == Encoding::edge ? "edge" : "permutation"; }

struct ProblemSource {
  enum class Kind { random, qubo_file, fasta };
  Kind kind = Kind::random;
  std::vector<std::size_t> sizes{10};  // random only
  double lo = -10.0;
  double hi = 10.0;
  std::filesystem::path path;  // qubo_file / fasta
  Encoding encoding = Encoding::edge;
  std::size_t min_overlap = 3;
  double penalty = 1.0;
  bool transitive_reduction = false;
};

struct ExperimentSpec {
  ProblemSource problem;
  std::vector<SolverKind> solvers;
  std::size_t repetitions = 1;
  std::uint64_t seed = 0;
  HadofConfig hadof;
  SaConfig sa;
  std::vector<BackendSpec> backends{BackendSpec{}};
  Policy policy = Policy::parallel_one_backend;
  std::size_t workers = 0;  // 0: hardware concurrency
  std::filesystem::path output_dir = "results";
  // Off: wall-clock fields are written as 0 so output is byte-reproducible.
  bool record_wall_clock = true;
  bool concurrent_repetitions = false;

  void validate() const {
    if (solvers.empty()) throw ConfigError("experiment: at least one solver required");
    if (repetitions < 1) throw ConfigError("experiment: repetitions must be >= 1");
    if (backends.empty()) throw ConfigError("experiment: empty backend list");
    for (const auto& b : backends) b.validate();
    hadof.validate();
    if (sa.sweeps < 1 || sa.reads < 1) throw ConfigError("experiment: sa sweeps and reads must be >= 1");
    if (problem.kind == ProblemSource::Kind::random) {
      if (problem.sizes.empty()) throw ConfigError("experiment: random problem needs at least one size");
      for (auto n : problem.sizes) {
        if (n < 1) throw ConfigError("experiment: problem size must be >= 1");
      }
      if (!(problem.lo < problem.hi)) throw ConfigError("experiment: require lo < hi");
    } else if (problem.path.empty()) {
      throw ConfigError("experiment: problem path missing");
    }
    if (problem.min_overlap < 1) throw ConfigError("experiment: min_overlap must be >= 1");
    if (!(problem.penalty > 0.0)) throw ConfigError("experiment: penalty must be > 0");
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace detail

// Relative paths inside the spec resolve against `base_dir`.
inline ExperimentSpec spec_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {}) {
  ExperimentSpec spec;
  try {
    detail::reject_unknown(doc,
                           {"problem", "solvers", "repetitions", "seed", "hadof", "sa", "backends", "policy", "workers",
                            "output_dir", "record_wall_clock", "concurrent_repetitions"},
                           "spec");
    const auto& p = doc.at("problem");
    detail::reject_unknown(p, {"type", "n", "sizes", "lo", "hi", "path", "encoding", "min_overlap", "penalty",
                               "transitive_reduction"},
                           "spec.problem");
    const auto type = p.at("type").get<std::string>();
    auto& src = spec.problem;
    if (type == "random") {
      src.kind = ProblemSource::Kind::random;
      if (p.contains("sizes")) {
        src.sizes = p["sizes"].get<std::vector<std::size_t>>();
      } else {
        src.sizes = {p.at("n").get<std::size_t>()};
      }
      src.lo = p.value("lo", src.lo);
      src.hi = p.value("hi", src.hi);
    } else if (type == "qubo" || type == "fasta") {
      src.kind = type == "qubo" ? ProblemSource::Kind::qubo_file : ProblemSource::Kind::fasta;
      src.path = p.at("path").get<std::string>();
      if (src.path.is_relative() && !base_dir.empty()) src.path = base_dir / src.path;
      src.encoding = parse_encoding(p.value("encoding", std::string("edge")));
      src.min_overlap = p.value("min_overlap", src.min_overlap);
      src.penalty = p.value("penalty", src.penalty);
      src.transitive_reduction = p.value("transitive_reduction", false);
    } else {
      throw ConfigError("spec.problem.type must be random, qubo or fasta");
    }

    for (const auto& s : doc.at("solvers")) spec.solvers.push_back(parse_solver(s.get<std::string>()));
    spec.repetitions = doc.value("repetitions", spec.repetitions);
    spec.seed = doc.value("seed", spec.seed);

    if (doc.contains("hadof")) {
      const auto& h = doc["hadof"];
      detail::reject_unknown(h, {"k", "p", "shots_expectation", "shots_final", "readout_flip", "schedule_scale",
                                 "exact_expectations", "normalize_hamiltonian"},
                             "spec.hadof");
      auto& c = spec.hadof;
      c.k = h.value("k", c.k);
      c.p = h.value("p", c.p);
      c.shots_expectation = h.value("shots_expectation", c.shots_expectation);
      c.shots_final = h.value("shots_final", c.shots_final);
      c.readout_flip = h.value("readout_flip", c.readout_flip);
      c.schedule_scale = h.value("schedule_scale", c.schedule_scale);
      c.exact_expectations = h.value("exact_expectations", c.exact_expectations);
      c.normalize_hamiltonian = h.value("normalize_hamiltonian", c.normalize_hamiltonian);
    }
    if (doc.contains("sa")) {
      const auto& s = doc["sa"];
      detail::reject_unknown(s, {"sweeps", "reads", "beta_initial", "beta_final"}, "spec.sa");
      spec.sa.sweeps = s.value("sweeps", spec.sa.sweeps);
      spec.sa.reads = s.value("reads", spec.sa.reads);
      spec.sa.beta_initial = s.value("beta_initial", spec.sa.beta_initial);
      spec.sa.beta_final = s.value("beta_final", spec.sa.beta_final);
    }
    if (doc.contains("backends")) {
      spec.backends.clear();
      for (const auto& b : doc["backends"]) {
        detail::reject_unknown(b, {"name", "kind", "service_time_s", "queue_delay_s", "worker_slots"}, "spec.backends[]");
        BackendSpec bs;
        bs.name = b.value("name", bs.name);
        const auto kind = b.value("kind", std::string("local_exact"));
        if (kind == "local_exact") {
          bs.kind = BackendKind::local_exact;
        } else if (kind == "local_noisy") {
          bs.kind = BackendKind::local_noisy;
        } else {
          throw ConfigError("spec.backends[].kind must be local_exact or local_noisy");
        }
        bs.service_time_s = b.value("service_time_s", bs.service_time_s);
        bs.queue_delay_s = b.value("queue_delay_s", bs.queue_delay_s);
        bs.worker_slots = b.value("worker_slots", bs.worker_slots);
        spec.backends.push_back(std::move(bs));
      }
    }
    if (doc.contains("policy")) spec.policy = parse_policy(doc["policy"].get<std::string>());
    spec.workers = doc.value("workers", spec.workers);
    if (doc.contains("output_dir")) spec.output_dir = doc["output_dir"].get<std::string>();
    spec.record_wall_clock = doc.value("record_wall_clock", spec.record_wall_clock);
    spec.concurrent_repetitions = doc.value("concurrent_repetitions", spec.concurrent_repetitions);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

inline ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return spec_from_json(doc, path.parent_path());
}

// A problem instance plus what is needed to interpret its solutions.
struct Instance {
  QuboProblem qubo{1};
  std::string label;
  std::optional<ReadSet> reads;
  std::optional<OverlapGraph> graph;
  std::optional<EdgeEncoding> edge_context;
  std::optional<PermutationEncoding> permutation_context;
};

inline Instance genome_instance(const ReadSet& reads, Encoding encoding, std::size_t min_overlap, double penalty,
                                bool reduce) {
  Instance inst;
  OverlapGraph graph = compute_overlaps(reads, min_overlap);
  if (reduce) graph = transitive_reduction(graph);
  if (encoding == Encoding::edge) {
    auto enc = encode_edge_qubo(graph, penalty);
    inst.qubo = std::move(enc.qubo);
    inst.edge_context = std::move(enc.context);
  } else {
    auto enc = encode_permutation_qubo(graph, penalty);
    inst.qubo = std::move(enc.qubo);
    inst.permutation_context = std::move(enc.context);
  }
  inst.label = "genome-" + to_string(encoding);
  inst.reads = reads;
  inst.graph = std::move(graph);
  return inst;
}

// Instances of a sweep: one per (size, repetition) for random sources, a
// single shared instance otherwise.
inline Instance make_instance(const ExperimentSpec& spec, std::size_t n, std::size_t rep) {
  const auto& src = spec.problem;
  switch (src.kind) {
    case ProblemSource::Kind::random: {
      Instance inst;
      inst.qubo = random_qubo(n, src.lo, src.hi, derive_seed(spec.seed, {n, rep, 0}));
      inst.label = "random";
      return inst;
    }
    case ProblemSource::Kind::qubo_file: {
      Instance inst;
      inst.qubo = load_qubo(src.path);
      inst.label = src.path.filename().string();
      return inst;
    }
    case ProblemSource::Kind::fasta:
      return genome_instance(load_fasta(src.path), src.encoding, src.min_overlap, src.penalty, src.transitive_reduction);
  }
  throw ConfigError("unknown problem source");
}

struct SolverRun {
  SolverKind solver = SolverKind::sa;
  double best_objective = 0.0;
  BinaryAssignment best_assignment;
  std::vector<double> sample_objectives;
  double wall_s = 0.0;
  double modelled_qpu_s = 0.0;
  double makespan_s = 0.0;
  std::optional<SolveReport> report;  // quantum solvers only
};

inline SolverRun run_solver(SolverKind solver, const QuboProblem& problem, HadofConfig hadof, SaConfig sa,
                            const std::vector<BackendSpec>& backends, Policy policy, std::size_t workers) {
  SolverRun out;
  out.solver = solver;
  const std::size_t width = workers == 0 ? std::max(1U, std::thread::hardware_concurrency()) : workers;
  auto from_report = [&](SolveReport r) {
    out.best_objective = r.best_objective;
    out.best_assignment = r.best_assignment;
    out.sample_objectives = r.sample_objectives;
    out.wall_s = r.wall_clock_s;
    out.modelled_qpu_s = r.modelled_qpu_s;
    out.makespan_s = r.modelled_makespan_s;
    out.report = std::move(r);
  };
  switch (solver) {
    case SolverKind::hadof_sequential:
    case SolverKind::hadof_parallel: {
      hadof.mode = solver == SolverKind::hadof_sequential ? UpdateMode::sequential : UpdateMode::parallel;
      Executor executor(backends, policy, width);
      from_report(hadof_solve(problem, hadof, executor));
      break;
    }
    case SolverKind::full_qaoa: {
      Executor executor(backends, policy, width);
      from_report(full_qaoa_solve(problem, hadof, executor));
      break;
    }
    case SolverKind::sa: {
      const auto started = std::chrono::steady_clock::now();
      auto r = simulated_annealing(problem, sa);
      out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      out.best_objective = r.best_objective;
      out.best_assignment = std::move(r.best_assignment);
      out.sample_objectives = std::move(r.read_objectives);
      break;
    }
    case SolverKind::brute: {
      const auto started = std::chrono::steady_clock::now();
      auto r = brute_force(problem);
      out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      out.best_objective = r.objective;
      out.best_assignment = std::move(r.assignment);
      out.sample_objectives = {r.objective};
      break;
    }
  }
  return out;
}

// One CSV row.
struct RunRecord {
  std::string solver;
  std::size_t n = 0;
  std::size_t rep = 0;
  double best_acc = 0.0;
  double avg_acc = 0.0;
  double wall_s = 0.0;
  double modelled_qpu_s = 0.0;
  double makespan_s = 0.0;
  std::string status = "ok";  // ok | mixed_sign | zero_reference | error
  double best_objective = 0.0;
  std::string error;
  nlohmann::json detail;  // per-run JSON document
  std::optional<TimingLedger> ledger;
};

inline constexpr const char* kResultsHeader =
    "solver,n,rep,best_acc,avg_acc,wall_s,modelled_qpu_s,makespan_s,status,best_objective";

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string csv_row(const RunRecord& r) {
  std::ostringstream s;
  s << r.solver << ',' << r.n << ',' << r.rep << ',';
  if (r.status == "error") {
    s << ",,,,," << r.status << ',';
  } else {
    s << format_number(r.best_acc) << ',' << format_number(r.avg_acc) << ',' << format_number(r.wall_s) << ','
      << format_number(r.modelled_qpu_s) << ',' << format_number(r.makespan_s) << ',' << r.status << ','
      << format_number(r.best_objective);
  }
  return s.str();
}

struct ExperimentResult {
  std::vector<RunRecord> records;  // reference row first within each (n, rep)
  std::size_t failures = 0;
};

namespace detail {

inline std::string run_stem(const std::string& solver, std::size_t n, std::size_t rep) {
  return solver + "_n" + std::to_string(n) + "_rep" + std::to_string(rep);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

// Sample standard deviation; 0 for a single value.
inline Moments moments(const std::vector<double>& values) {
  Moments m;
  m.count = values.size();
  if (values.empty()) return m;
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return m;
}

// Solvers and references for one (n, rep) cell.
inline std::vector<RunRecord> run_cell(const ExperimentSpec& spec, std::size_t n_requested, std::size_t rep) {
  std::vector<RunRecord> rows;
  const Instance inst = make_instance(spec, n_requested, rep);
  const std::size_t n = inst.qubo.n();

  SaConfig ref_config = spec.sa;
  ref_config.seed = derive_seed(spec.seed, {n, rep, 2});
  const auto ref_started = std::chrono::steady_clock::now();
  const double reference = reference_objective(inst.qubo, ref_config);
  const double ref_wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - ref_started).count();

  RunRecord ref_row;
  ref_row.solver = "reference";
  ref_row.n = n;
  ref_row.rep = rep;
  ref_row.best_acc = 1.0;
  ref_row.avg_acc = 1.0;
  ref_row.wall_s = spec.record_wall_clock ? ref_wall : 0.0;
  ref_row.best_objective = reference;
  ref_row.status = reference == 0.0 ? "zero_reference" : "ok";
  ref_row.detail = {{"solver", "reference"}, {"n", n}, {"rep", rep}, {"problem", inst.label},
                    {"reference_objective", reference}};
  rows.push_back(ref_row);

  for (const SolverKind solver : spec.solvers) {
    RunRecord row;
    row.solver = to_string(solver);
    row.n = n;
    row.rep = rep;
    row.detail = {{"solver", row.solver}, {"n", n}, {"rep", rep}, {"problem", inst.label},
                  {"reference_objective", reference}};
    try {
      HadofConfig hadof = spec.hadof;
      hadof.seed = derive_seed(spec.seed, {n, rep, 1});
      SaConfig sa = spec.sa;
      sa.seed = derive_seed(spec.seed, {n, rep, 3});
      SolverRun run = run_solver(solver, inst.qubo, hadof, sa, spec.backends, spec.policy, spec.workers);
      row.best_objective = run.best_objective;
      row.wall_s = spec.record_wall_clock ? run.wall_s : 0.0;
      row.modelled_qpu_s = run.modelled_qpu_s;
      row.makespan_s = run.makespan_s;
      if (reference == 0.0) {
        row.status = "zero_reference";
      } else {
        SolveReport shim;
        shim.best_objective = run.best_objective;
        shim.sample_objectives = run.sample_objectives;
        const auto acc = summarize_accuracy(shim, reference);
        row.best_acc = acc.best;
        row.avg_acc = acc.average;
        if (!acc.best_comparable) row.status = "mixed_sign";
      }
      row.detail["status"] = row.status;
      row.detail["best_objective"] = run.best_objective;
      row.detail["best_assignment"] = to_bitstring(run.best_assignment);
      row.detail["best_acc"] = row.best_acc;
      row.detail["avg_acc"] = row.avg_acc;
      row.detail["modelled_qpu_s"] = row.modelled_qpu_s;
      row.detail["makespan_s"] = row.makespan_s;
      if (spec.record_wall_clock) row.detail["wall_s"] = row.wall_s;
      if (run.report) {
        row.detail["report"] = report_to_json(*run.report, spec.record_wall_clock);
        row.detail["ledger"] = ledger_totals_json(run.report->ledger);
        if (!spec.record_wall_clock) row.detail["ledger"].erase("measured_wall_clock_s");
        row.ledger = run.report->ledger;
      } else {
        row.detail["sample_objectives"] = run.sample_objectives;
      }
      if (inst.edge_context || inst.permutation_context) {
        const PathSolution path = inst.edge_context ? decode_path(run.best_assignment, *inst.edge_context)
                                                    : decode_path(run.best_assignment, *inst.permutation_context);
        row.detail["path_valid"] = path.valid;
        row.detail["path"] = path.order;
        if (!path.valid) row.detail["path_diagnostic"] = path.diagnostic;
        if (path.valid) row.detail["assembly_length"] = merge_sequence(path, *inst.reads).size();
      }
    } catch (const std::exception& e) {
      row.status = "error";
      row.error = e.what();
      row.detail["status"] = "error";
      row.detail["error"] = row.error;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

// Writes <output_dir>/results.csv, runs/<stem>.json, ledgers/<stem>.csv and
// series_*.csv. Solver failures become "error" rows; IO failures throw.
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(spec.output_dir / "runs");
  fs::create_directories(spec.output_dir / "ledgers");

  std::vector<std::size_t> sizes = spec.problem.kind == ProblemSource::Kind::random ? spec.problem.sizes
                                                                                    : std::vector<std::size_t>{0};
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (auto n : sizes) {
    for (std::size_t rep = 0; rep < spec.repetitions; ++rep) cells.emplace_back(n, rep);
  }

  std::vector<std::vector<RunRecord>> cell_rows(cells.size());
  if (spec.concurrent_repetitions) {
    std::vector<std::future<std::vector<RunRecord>>> futures;
    for (const auto& [n, rep] : cells) {
      futures.push_back(std::async(std::launch::async, [&spec, n = n, rep = rep] { return detail::run_cell(spec, n, rep); }));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) cell_rows[c] = futures[c].get();
  } else {
    for (std::size_t c = 0; c < cells.size(); ++c) cell_rows[c] = detail::run_cell(spec, cells[c].first, cells[c].second);
  }

  ExperimentResult result;
  std::ostringstream csv;
  csv << kResultsHeader << '\n';
  for (auto& rows : cell_rows) {
    for (auto& row : rows) {
      csv << csv_row(row) << '\n';
      const std::string stem = detail::run_stem(row.solver, row.n, row.rep);
      detail::write_text(spec.output_dir / "runs" / (stem + ".json"), row.detail.dump(1) + "\n");
      if (row.ledger) write_ledger_csv(*row.ledger, spec.output_dir / "ledgers" / (stem + ".csv"));
      if (row.status == "error") ++result.failures;
      result.records.push_back(std::move(row));
    }
  }
  detail::write_text(spec.output_dir / "results.csv", csv.str());

  // series_<metric>.csv: solver,n,mean,std,count over repetitions
  const std::vector<std::pair<std::string, double RunRecord::*>> metrics{
      {"best_accuracy", &RunRecord::best_acc},
      {"average_accuracy", &RunRecord::avg_acc},
      {"wall_clock", &RunRecord::wall_s},
      {"qpu_usage", &RunRecord::modelled_qpu_s},
      {"makespan", &RunRecord::makespan_s},
  };
  for (const auto& [name, field] : metrics) {
    std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
    for (const auto& r : result.records) {
      if (r.status == "ok") groups[{r.solver, r.n}].push_back(r.*field);
    }
    std::ostringstream s;
    s << "solver,n,mean,std,count\n";
    for (const auto& [key, values] : groups) {
      const auto m = detail::moments(values);
      s << key.first << ',' << key.second << ',' << format_number(m.mean) << ',' << format_number(m.stddev) << ','
        << m.count << '\n';
    }
    detail::write_text(spec.output_dir / ("series_" + name + ".csv"), s.str());
  }
  return result;
}

struct SummaryRow {
  std::string solver;
  std::size_t n = 0;
  std::size_t runs = 0;
  std::size_t flagged = 0;  // mixed_sign, zero_reference or error rows
  double best_acc_mean = 0.0;
  double best_acc_std = 0.0;
  double avg_acc_mean = 0.0;
  double avg_acc_std = 0.0;
  double wall_mean = 0.0;
  double wall_std = 0.0;
  double qpu_mean = 0.0;
  double makespan_mean = 0.0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream s(line);
  while (std::getline(s, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("results CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

}  // namespace detail

// Per (solver, n) means and standard deviations over rows with status ok.
// Reference rows are skipped.
inline std::vector<SummaryRow> report_summary(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::map<std::pair<std::string, std::size_t>, std::vector<std::vector<double>>> ok;
  std::map<std::pair<std::string, std::size_t>, std::size_t> flagged;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line.rfind("solver,n,rep,best_acc,avg_acc,wall_s,modelled_qpu_s,makespan_s", 0) != 0) {
        throw ParseError("results CSV: unexpected header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = detail::split_csv_line(line);
    if (f.size() < 8) throw ParseError("results CSV line " + std::to_string(line_no) + ": too few columns");
    const std::string& solver = f[0];
    if (solver == "reference") continue;
    const auto n = static_cast<std::size_t>(detail::parse_double(f[1], line_no));
    const std::string status = f.size() > 8 ? f[8] : "ok";
    const std::pair key{solver, n};
    flagged.try_emplace(key, 0);
    if (status != "ok") {
      ++flagged[key];
      continue;
    }
    std::vector<double> values;
    for (std::size_t c = 3; c < 8; ++c) values.push_back(detail::parse_double(f[c], line_no));
    ok[key].push_back(std::move(values));
  }

  std::vector<SummaryRow> out;
  for (const auto& [key, nflag] : flagged) {
    SummaryRow row;
    row.solver = key.first;
    row.n = key.second;
    row.flagged = nflag;
    const auto it = ok.find(key);
    if (it != ok.end()) {
      const auto& rows = it->second;
      row.runs = rows.size();
      auto column = [&](std::size_t c) {
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(r[c]);
        return detail::moments(v);
      };
      const auto best = column(0);
      const auto avg = column(1);
      const auto wall = column(2);
      row.best_acc_mean = best.mean;
      row.best_acc_std = best.stddev;
      row.avg_acc_mean = avg.mean;
      row.avg_acc_std = avg.stddev;
      row.wall_mean = wall.mean;
      row.wall_std = wall.stddev;
      row.qpu_mean = column(3).mean;
      row.makespan_mean = column(4).mean;
    }
    out.push_back(row);
  }
  return out;
}

inline std::vector<SummaryRow> report_summary(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw ParseError("cannot open " + csv_path.string());
  return report_summary(in);
}

inline void print_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-18s %6s %4s %17s %17s %12s %10s %10s %s\n", "solver", "n", "runs", "best_acc",
                "avg_acc", "wall_s", "qpu_s", "makespan", "flagged");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-18s %6zu %4zu %8.4f+-%-7.4f %8.4f+-%-7.4f %12.4f %10.1f %10.1f %zu\n",
                  r.solver.c_str(), r.n, r.runs, r.best_acc_mean, r.best_acc_std, r.avg_acc_mean, r.avg_acc_std,
                  r.wall_mean, r.qpu_mean, r.makespan_mean, r.flagged);
    out << buf;
  }
}

struct AssemblyConfig {
  Encoding encoding = Encoding::edge;
  std::size_t min_overlap = 3;
  double penalty = 1.0;
  bool transitive_reduction = false;
  SolverKind solver = SolverKind::brute;
  HadofConfig hadof;
  SaConfig sa;
  std::size_t workers = 0;
};

struct AssemblyResult {
  OverlapGraph graph;
  QuboProblem qubo{1};
  double best_objective = 0.0;
  BinaryAssignment best_assignment;
  PathSolution path;
  std::string sequence;  // empty when the path is invalid
};

inline AssemblyResult assemble(const ReadSet& reads, const AssemblyConfig& config) {
  Instance inst = genome_instance(reads, config.encoding, config.min_overlap, config.penalty, config.transitive_reduction);
  AssemblyResult out;
  const SolverRun run = run_solver(config.solver, inst.qubo, config.hadof, config.sa, {BackendSpec{}},
                                   config.solver == SolverKind::hadof_sequential ? Policy::sequential
                                                                                 : Policy::parallel_one_backend,
                                   config.workers);
  out.best_objective = run.best_objective;
  out.best_assignment = run.best_assignment;
  out.path = inst.edge_context ? decode_path(run.best_assignment, *inst.edge_context)
                               : decode_path(run.best_assignment, *inst.permutation_context);
  if (out.path.valid) out.sequence = merge_sequence(out.path, reads);
  out.graph = std::move(*inst.graph);
  out.qubo = std::move(inst.qubo);
  return out;
}

}  // namespace hadof
