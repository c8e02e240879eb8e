#pragma once

// Single-flip Metropolis simulated annealing over QUBO assignments, used as
// the accuracy reference.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "hadof/errors.hpp"
#include "hadof/qubo.hpp"
#include "hadof/random.hpp"

namespace hadof {

struct SaConfig {
  std::size_t sweeps = 1000;
  std::size_t reads = 100;
  // <= 0 means derive from the coefficient range.
  double beta_initial = 0.0;
  double beta_final = 0.0;
  std::uint64_t seed = 0;
};

struct SaResult {
  BinaryAssignment best_assignment;
  double best_objective = 0.0;
  std::vector<double> read_objectives;  // final objective of each read
};

// Compressed symmetric coupling structure with per-variable linear terms.
class FlipModel {
 public:
  explicit FlipModel(const QuboProblem& problem) : n_(problem.n()), linear_(problem.n(), 0.0) {
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(n_);
    for (const auto& [ij, v] : problem.coefficients()) {
      if (ij.first == ij.second) {
        linear_[ij.first] += v;
      } else if (v != 0.0) {
        adj[ij.first].emplace_back(ij.second, v);
        adj[ij.second].emplace_back(ij.first, v);
      }
    }
    start_.push_back(0);
    for (const auto& row : adj) {
      for (const auto& [j, v] : row) {
        neighbour_.push_back(j);
        weight_.push_back(v);
      }
      start_.push_back(neighbour_.size());
    }
  }

  [[nodiscard]] std::size_t n() const noexcept { return n_; }
  [[nodiscard]] double linear(std::size_t i) const { return linear_[i]; }

  template <typename Fn>
  void for_each_neighbour(std::size_t i, Fn&& fn) const {
    for (std::size_t e = start_[i]; e < start_[i + 1]; ++e) fn(neighbour_[e], weight_[e]);
  }

  // Largest possible |delta E| of a single flip.
  [[nodiscard]] double max_flip_delta() const {
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double s = std::abs(linear_[i]);
      for_each_neighbour(i, [&](std::size_t, double w) { s += std::abs(w); });
      best = std::max(best, s);
    }
    return best;
  }

  [[nodiscard]] double min_nonzero_coefficient() const {
    double best = std::numeric_limits<double>::infinity();
    for (double v : linear_) {
      if (v != 0.0) best = std::min(best, std::abs(v));
    }
    for (double v : weight_) best = std::min(best, std::abs(v));
    return best;
  }

 private:
  std::size_t n_;
  std::vector<double> linear_;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> neighbour_;
  std::vector<double> weight_;
};

// beta_initial = ln 2 / dE_max, beta_final = ln 1000 / dE_min, clipped to [1e-3, 1e3].
inline std::pair<double, double> default_beta_range(const FlipModel& model) {
  const double dmax = model.max_flip_delta();
  const double dmin = model.min_nonzero_coefficient();
  if (dmax <= 0.0 || !std::isfinite(dmin)) return {1.0, 1.0};
  const double lo = std::clamp(std::log(2.0) / dmax, 1e-3, 1e3);
  const double hi = std::clamp(std::log(1000.0) / dmin, 1e-3, 1e3);
  return {lo, std::max(lo, hi)};
}

inline std::vector<double> geometric_betas(double beta_initial, double beta_final, std::size_t sweeps) {
  std::vector<double> betas(sweeps);
  for (std::size_t s = 0; s < sweeps; ++s) {
    const double t = sweeps == 1 ? 0.0 : static_cast<double>(s) / static_cast<double>(sweeps - 1);
    betas[s] = beta_initial * std::pow(beta_final / beta_initial, t);
  }
  return betas;
}

// Observer hook: called with (variable, delta E) for every accepted flip.
using FlipObserver = std::function<void(std::size_t, double)>;

inline BinaryAssignment anneal_once(const FlipModel& model, const std::vector<double>& betas, Rng& rng,
                                    const FlipObserver& observer = {}) {
  const std::size_t n = model.n();
  BinaryAssignment x(n);
  for (auto& b : x) b = static_cast<Bit>(rng() >> 63);

  // field_i = linear_i + sum_j w_ij x_j; flipping i changes f by (1 - 2 x_i) field_i
  std::vector<double> field(n);
  for (std::size_t i = 0; i < n; ++i) {
    double f = model.linear(i);
    model.for_each_neighbour(i, [&](std::size_t j, double w) { f += w * x[j]; });
    field[i] = f;
  }

  for (const double beta : betas) {
    for (std::size_t i = 0; i < n; ++i) {
      const double delta = x[i] ? -field[i] : field[i];
      const bool accept = delta <= 0.0 || unit_uniform(rng) < std::exp(-beta * delta);
      if (!accept) continue;
      const double dx = x[i] ? -1.0 : 1.0;
      x[i] ^= 1U;
      model.for_each_neighbour(i, [&](std::size_t j, double w) { field[j] += w * dx; });
      if (observer) observer(i, delta);
    }
  }
  return x;
}

inline SaResult simulated_annealing(const QuboProblem& problem, const SaConfig& config,
                                    const FlipObserver& observer = {}) {
  if (config.sweeps < 1 || config.reads < 1) throw ConfigError("SaConfig: sweeps and reads must be >= 1");
  const FlipModel model(problem);
  auto [b0, b1] = default_beta_range(model);
  if (config.beta_initial > 0.0) b0 = config.beta_initial;
  if (config.beta_final > 0.0) b1 = config.beta_final;
  if (!(b1 >= b0 && b0 > 0.0)) throw ConfigError("SaConfig: require beta_final >= beta_initial > 0");
  const auto betas = geometric_betas(b0, b1, config.sweeps);

  const QuboEvaluator evaluate_problem(problem);
  SaResult out;
  out.best_objective = std::numeric_limits<double>::infinity();
  out.read_objectives.reserve(config.reads);
  for (std::size_t r = 0; r < config.reads; ++r) {
    Rng rng(derive_seed(config.seed, {r}));
    BinaryAssignment x = anneal_once(model, betas, rng, observer);
    const double value = evaluate_problem(x);
    out.read_objectives.push_back(value);
    if (value < out.best_objective) {
      out.best_objective = value;
      out.best_assignment = std::move(x);
    }
  }
  return out;
}

// Memoised SA best objective keyed by (problem fingerprint, config).
class ReferenceCache {
 public:
  double get(const QuboProblem& problem, const SaConfig& config) {
    const Key key{fingerprint(problem), config.sweeps, config.reads, config.beta_initial, config.beta_final,
                  config.seed};
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    const double value = simulated_annealing(problem, config).best_objective;
    std::lock_guard lock(mutex_);
    return cache_.emplace(key, value).first->second;
  }

  [[nodiscard]] std::size_t size() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
  }

 private:
  using Key = std::tuple<std::uint64_t, std::size_t, std::size_t, double, double, std::uint64_t>;
  mutable std::mutex mutex_;
  std::map<Key, double> cache_;
};

inline double reference_objective(const QuboProblem& problem, const SaConfig& config) {
  static ReferenceCache cache;
  return cache.get(problem, config);
}

}  // namespace hadof
