#pragma once

// Circuit-job execution: a local worker pool that really runs the simulator,
// and a discrete-event model of backend occupancy that fills a TimingLedger
// (modelled QPU seconds and makespan) without sleeping.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "hadof/errors.hpp"
#include "hadof/qubo.hpp"
#include "hadof/random.hpp"
#include "hadof/statevector.hpp"

namespace hadof {

enum class Policy { sequential, parallel_one_backend, parallel_multi_backend };

inline std::string to_string(Policy p) {
  switch (p) {
    case Policy::sequential: return "sequential";
    case Policy::parallel_one_backend: return "parallel-one-backend";
    case Policy::parallel_multi_backend: return "parallel-multi-backend";
  }
  return "?";
}

inline Policy parse_policy(const std::string& s) {
  if (s == "sequential") return Policy::sequential;
  if (s == "parallel-one-backend") return Policy::parallel_one_backend;
  if (s == "parallel-multi-backend") return Policy::parallel_multi_backend;
  throw ConfigError("unknown policy '" + s + "'");
}

enum class BackendKind { local_exact, local_noisy };

struct BackendSpec {
  std::string name = "local";
  BackendKind kind = BackendKind::local_exact;
  double service_time_s = 3.0;
  double queue_delay_s = 0.0;
  std::size_t worker_slots = 1;

  void validate() const {
    if (!(service_time_s >= 0.0)) throw ConfigError("backend " + name + ": service_time_s must be >= 0");
    if (!(queue_delay_s >= 0.0)) throw ConfigError("backend " + name + ": queue_delay_s must be >= 0");
    if (worker_slots < 1) throw ConfigError("backend " + name + ": worker_slots must be >= 1");
  }
};

enum class ShotMode {
  exact_expectations,    // per-qubit P(1) straight from the statevector
  sampled_expectations,  // per-qubit frequencies over `shots` draws
  bitstrings,            // ordered full-register samples
};

struct CircuitJob {
  std::size_t job_id = 0;
  IsingModel model;
  AnnealSchedule schedule;
  std::size_t depth = 1;
  ShotMode mode = ShotMode::sampled_expectations;
  std::size_t shots = 1;
  double readout_flip = 0.0;
  std::uint64_t seed = 0;
  std::size_t subset = 0;
  std::size_t iteration = 0;
};

struct JobResult {
  std::size_t job_id = 0;
  std::vector<double> expectations;
  SampleSet samples;
};

inline JobResult run_job(const CircuitJob& job) {
  const Statevector state = run_circuit(job.model, job.schedule, job.depth);
  JobResult out;
  out.job_id = job.job_id;
  Rng rng(job.seed);
  switch (job.mode) {
    case ShotMode::exact_expectations:
      out.expectations = qubit_expectations(state);
      break;
    case ShotMode::sampled_expectations:
      if (job.readout_flip > 0.0) {
        // readout noise applies to every measurement, not only final sampling
        const auto noisy = sample_bitstrings(state, job.shots, rng, job.readout_flip);
        out.expectations.assign(state.qubits(), 0.0);
        for (const BasisIndex b : noisy.draws) {
          for (std::size_t q = 0; q < state.qubits(); ++q) out.expectations[q] += (b >> q) & 1U;
        }
        for (auto& e : out.expectations) e /= static_cast<double>(job.shots);
      } else {
        out.expectations = sample_expectations(state, job.shots, rng);
      }
      break;
    case ShotMode::bitstrings:
      out.samples = sample_bitstrings(state, job.shots, rng, job.readout_flip);
      break;
  }
  return out;
}

// Persistent pool. The calling thread participates, so width W means W-1
// helper threads. parallel_for blocks until every index has run.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t width = std::max(1U, std::thread::hardware_concurrency()))
      : width_(std::max<std::size_t>(1, width)) {
    for (std::size_t id = 0; id + 1 < width_; ++id) threads_.emplace_back([this, id] { helper_loop(id); });
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    wake_.notify_all();
    for (auto& t : threads_) t.join();
  }

  [[nodiscard]] std::size_t width() const noexcept { return width_; }

  void parallel_for(std::size_t count, std::size_t max_width, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    const std::size_t helpers = std::min({std::max<std::size_t>(max_width, 1), width_, count}) - 1;
    if (helpers == 0) {
      for (std::size_t i = 0; i < count; ++i) fn(i);
      return;
    }
    {
      std::lock_guard lock(mutex_);
      task_ = &fn;
      count_ = count;
      next_.store(0);
      helpers_wanted_ = helpers;
      pending_ = helpers;
      ++generation_;
    }
    wake_.notify_all();
    drain(fn);
    std::unique_lock lock(mutex_);
    done_.wait(lock, [this] { return pending_ == 0; });
    task_ = nullptr;
  }

 private:
  void drain(const std::function<void(std::size_t)>& fn) {
    for (std::size_t i = next_.fetch_add(1); i < count_; i = next_.fetch_add(1)) fn(i);
  }

  void helper_loop(std::size_t id) {
    std::uint64_t seen = 0;
    std::unique_lock lock(mutex_);
    while (true) {
      wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      if (id >= helpers_wanted_) continue;
      const auto* fn = task_;
      lock.unlock();
      drain(*fn);
      lock.lock();
      if (--pending_ == 0) done_.notify_all();
    }
  }

  std::size_t width_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* task_ = nullptr;
  std::size_t count_ = 0;
  std::atomic<std::size_t> next_{0};
  std::size_t helpers_wanted_ = 0;
  std::size_t pending_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
};

struct JobTiming {
  std::size_t job_id = 0;
  std::string backend;
  double submit_s = 0.0;
  double start_s = 0.0;
  double finish_s = 0.0;
};

struct TimingLedger {
  std::vector<JobTiming> jobs;
  double modelled_qpu_s = 0.0;
  double modelled_makespan_s = 0.0;
  double measured_wall_clock_s = 0.0;

  [[nodiscard]] double end_clock() const {
    double end = 0.0;
    for (const auto& j : jobs) end = std::max(end, j.finish_s);
    return end;
  }

  void recompute_totals() {
    modelled_qpu_s = 0.0;
    if (jobs.empty()) {
      modelled_makespan_s = 0.0;
      return;
    }
    double first_submit = jobs.front().submit_s;
    double last_finish = jobs.front().finish_s;
    for (const auto& j : jobs) {
      modelled_qpu_s += j.finish_s - j.start_s;
      first_submit = std::min(first_submit, j.submit_s);
      last_finish = std::max(last_finish, j.finish_s);
    }
    modelled_makespan_s = last_finish - first_submit;
  }

  void append(const TimingLedger& other) {
    jobs.insert(jobs.end(), other.jobs.begin(), other.jobs.end());
    measured_wall_clock_s += other.measured_wall_clock_s;
    recompute_totals();
  }
};

// Discrete-event occupancy model for one batch submitted at `submit_s`.
// Each backend owns `worker_slots` servers that become free after its queue
// delay; a job takes the earliest-free server of its assigned backend.
inline TimingLedger model_batch(std::span<const std::size_t> job_ids, std::span<const BackendSpec> backends,
                                Policy policy, double submit_s = 0.0) {
  if (backends.empty()) throw ConfigError("execute_batch: empty backend list");
  for (const auto& b : backends) b.validate();

  using Server = std::pair<double, std::size_t>;  // (free_at, slot)
  using ServerQueue = std::priority_queue<Server, std::vector<Server>, std::greater<>>;
  const std::size_t used = policy == Policy::parallel_multi_backend ? backends.size() : 1;
  std::vector<ServerQueue> servers(used);
  for (std::size_t b = 0; b < used; ++b) {
    const std::size_t slots = policy == Policy::sequential ? 1 : backends[b].worker_slots;
    for (std::size_t s = 0; s < slots; ++s) servers[b].push({submit_s + backends[b].queue_delay_s, s});
  }

  TimingLedger ledger;
  for (std::size_t j = 0; j < job_ids.size(); ++j) {
    const std::size_t b = policy == Policy::parallel_multi_backend ? j % backends.size() : 0;
    auto [free_at, slot] = servers[b].top();
    servers[b].pop();
    JobTiming t;
    t.job_id = job_ids[j];
    t.backend = backends[b].name;
    t.submit_s = submit_s;
    t.start_s = free_at;
    t.finish_s = free_at + backends[b].service_time_s;
    servers[b].push({t.finish_s, slot});
    ledger.jobs.push_back(std::move(t));
  }
  ledger.recompute_totals();
  return ledger;
}

struct BatchOutcome {
  std::vector<JobResult> results;  // same order as the submitted jobs
  TimingLedger ledger;
};

// Runs every job for real and models its backend timing. Results depend only
// on the job payloads, never on policy or pool width.
inline BatchOutcome execute_batch(std::span<const CircuitJob> jobs, std::span<const BackendSpec> backends,
                                  Policy policy, WorkerPool& pool, double submit_s = 0.0) {
  std::vector<std::size_t> ids;
  ids.reserve(jobs.size());
  for (const auto& j : jobs) ids.push_back(j.job_id);
  BatchOutcome out;
  out.ledger = model_batch(ids, backends, policy, submit_s);

  out.results.resize(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  const std::size_t width = policy == Policy::sequential ? 1 : pool.width();
  const auto started = std::chrono::steady_clock::now();
  pool.parallel_for(jobs.size(), width, [&](std::size_t i) {
    try {
      out.results[i] = run_job(jobs[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  out.ledger.measured_wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw JobFailure(jobs[i].job_id, e.what());
    } catch (...) {
      throw JobFailure(jobs[i].job_id, "unknown error");
    }
  }
  return out;
}

// Stateful handle used by the solvers: owns the pool and accumulates one
// ledger across batches. Each batch is submitted when the previous one ends.
class Executor {
 public:
  explicit Executor(std::vector<BackendSpec> backends = {BackendSpec{}}, Policy policy = Policy::parallel_one_backend,
                    std::size_t workers = std::max(1U, std::thread::hardware_concurrency()))
      : backends_(std::move(backends)), policy_(policy), pool_(workers) {
    if (backends_.empty()) throw ConfigError("Executor: empty backend list");
    for (const auto& b : backends_) b.validate();
  }

  std::vector<JobResult> execute(std::span<const CircuitJob> jobs) {
    auto outcome = execute_batch(jobs, backends_, policy_, pool_, ledger_.end_clock());
    ledger_.append(outcome.ledger);
    return std::move(outcome.results);
  }

  [[nodiscard]] const TimingLedger& ledger() const noexcept { return ledger_; }
  void reset_ledger() { ledger_ = {}; }
  [[nodiscard]] std::size_t workers() const noexcept { return pool_.width(); }
  [[nodiscard]] Policy policy() const noexcept { return policy_; }
  [[nodiscard]] const std::vector<BackendSpec>& backends() const noexcept { return backends_; }

 private:
  std::vector<BackendSpec> backends_;
  Policy policy_;
  WorkerPool pool_;
  TimingLedger ledger_;
};

enum class QpuAccounting {
  sweeps_and_final,  // p expectation sweeps plus the final sampling sweep
  sweeps_only,       // the p expectation sweeps alone (3n s at k=5, p=5, 3 s)
};

inline double qpu_usage_model(std::size_t n, std::size_t k, std::size_t p, double service_time_s,
                              QpuAccounting accounting = QpuAccounting::sweeps_and_final) {
  if (n == 0 || k == 0 || p == 0) throw ConfigError("qpu_usage_model: n, k, p must be positive");
  if (service_time_s < 0.0) throw ConfigError("qpu_usage_model: negative service time");
  const double circuits = static_cast<double>((n + k - 1) / k);
  const double sweeps = static_cast<double>(p) + (accounting == QpuAccounting::sweeps_and_final ? 1.0 : 0.0);
  return sweeps * circuits * service_time_s;
}

inline void write_ledger_csv(const TimingLedger& ledger, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << "job_id,backend,submit_s,start_s,finish_s\n";
  for (const auto& j : ledger.jobs) {
    out << j.job_id << ',' << j.backend << ',' << j.submit_s << ',' << j.start_s << ',' << j.finish_s << '\n';
  }
}

inline nlohmann::json ledger_totals_json(const TimingLedger& ledger) {
  return {{"jobs", ledger.jobs.size()},
          {"modelled_qpu_s", ledger.modelled_qpu_s},
          {"modelled_makespan_s", ledger.modelled_makespan_s},
          {"measured_wall_clock_s", ledger.measured_wall_clock_s}};
}

inline void write_ledger_totals(const TimingLedger& ledger, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << ledger_totals_json(ledger).dump(2) << '\n';
}

}  // namespace hadof
