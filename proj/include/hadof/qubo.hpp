#pragma once

// QUBO problems, their Ising form, objective evaluation and the exhaustive
// reference solver.
//
// Objective convention: f(x) = offset + sum_{i<=j} Q_ij x_i x_j with
// x_i x_i = x_i. Spin convention: x = (1 - z) / 2, so bit 1 <-> spin -1.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hadof/errors.hpp"
#include "hadof/random.hpp"

namespace hadof {

using Bit = std::uint8_t;
using BinaryAssignment = std::vector<Bit>;
using Spin = std::int8_t;
using IndexPair = std::pair<std::size_t, std::size_t>;

struct Term {
  std::size_t i;
  std::size_t j;
  double value;
};

class QuboProblem {
 public:
  explicit QuboProblem(std::size_t n, double offset = 0.0) : n_(n), offset_(offset) {
    if (n == 0) throw ConfigError("QuboProblem: n must be positive");
  }

  // Accumulates into the (min(i,j), max(i,j)) slot.
  void add(std::size_t i, std::size_t j, double value) {
    if (i >= n_ || j >= n_) {
      throw DimensionError("QuboProblem::add: index (" + std::to_string(i) + "," + std::to_string(j) +
                           ") out of range for n=" + std::to_string(n_));
    }
    if (i > j) std::swap(i, j);
    coeffs_[{i, j}] += value;
  }

  void add_offset(double value) { offset_ += value; }

  [[nodiscard]] std::size_t n() const noexcept { return n_; }
  [[nodiscard]] double offset() const noexcept { return offset_; }
  [[nodiscard]] const std::map<IndexPair, double>& coefficients() const noexcept { return coeffs_; }

  [[nodiscard]] double coefficient(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    auto it = coeffs_.find({i, j});
    return it == coeffs_.end() ? 0.0 : it->second;
  }

  [[nodiscard]] std::vector<Term> terms() const {
    std::vector<Term> out;
    out.reserve(coeffs_.size());
    for (const auto& [ij, v] : coeffs_) out.push_back({ij.first, ij.second, v});
    return out;
  }

  friend bool operator==(const QuboProblem&, const QuboProblem&) = default;

 private:
  std::size_t n_;
  double offset_;
  std::map<IndexPair, double> coeffs_;
};

struct IsingModel {
  std::size_t k = 0;
  std::vector<double> h;
  std::map<IndexPair, double> J;  // keys satisfy i < j
  double offset = 0.0;

  friend bool operator==(const IsingModel&, const IsingModel&) = default;
};

inline double evaluate(const QuboProblem& problem, std::span<const Bit> x) {
  if (x.size() != problem.n()) {
    throw DimensionError("evaluate: assignment length " + std::to_string(x.size()) + " != n=" +
                         std::to_string(problem.n()));
  }
  double total = problem.offset();
  for (const auto& [ij, v] : problem.coefficients()) {
    if (x[ij.first] && x[ij.second]) total += v;
  }
  return total;
}

// Flattened term list for repeated evaluation on hot paths.
class QuboEvaluator {
 public:
  explicit QuboEvaluator(const QuboProblem& problem)
      : n_(problem.n()), offset_(problem.offset()), terms_(problem.terms()) {}

  [[nodiscard]] std::size_t n() const noexcept { return n_; }

  double operator()(std::span<const Bit> x) const {
    if (x.size() != n_) throw DimensionError("QuboEvaluator: assignment length mismatch");
    double total = offset_;
    for (const auto& t : terms_) {
      if (x[t.i] & x[t.j]) total += t.value;
    }
    return total;
  }

 private:
  std::size_t n_;
  double offset_;
  std::vector<Term> terms_;
};

inline IsingModel to_ising(const QuboProblem& problem) {
  IsingModel model;
  model.k = problem.n();
  model.h.assign(problem.n(), 0.0);
  model.offset = problem.offset();
  for (const auto& [ij, q] : problem.coefficients()) {
    const auto [i, j] = ij;
    if (i == j) {
      // q (1 - z) / 2
      model.h[i] -= q / 2.0;
      model.offset += q / 2.0;
    } else {
      // q (1 - z_i)(1 - z_j) / 4
      model.h[i] -= q / 4.0;
      model.h[j] -= q / 4.0;
      model.J[{i, j}] += q / 4.0;
      model.offset += q / 4.0;
    }
  }
  return model;
}

inline std::vector<Spin> spins_from_bits(std::span<const Bit> x) {
  std::vector<Spin> z(x.size());
  std::transform(x.begin(), x.end(), z.begin(), [](Bit b) { return static_cast<Spin>(b ? -1 : 1); });
  return z;
}

inline double ising_energy(const IsingModel& model, std::span<const Spin> z) {
  if (z.size() != model.k) throw DimensionError("ising_energy: spin vector length mismatch");
  double e = model.offset;
  for (std::size_t i = 0; i < model.k; ++i) e += model.h[i] * z[i];
  for (const auto& [ij, v] : model.J) e += v * z[ij.first] * z[ij.second];
  return e;
}

inline QuboProblem random_qubo(std::size_t n, double lo, double hi, std::uint64_t seed) {
  if (n == 0) throw ConfigError("random_qubo: n must be positive");
  if (!(lo < hi)) throw ConfigError("random_qubo: require lo < hi");
  QuboProblem problem(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) problem.add(i, j, uniform_between(rng, lo, hi));
  }
  return problem;
}

// Order-sensitive 64-bit fingerprint of the problem content.
inline std::uint64_t fingerprint(const QuboProblem& problem) {
  auto bits_of = [](double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof u);
    return u;
  };
  std::uint64_t h = mix64(problem.n()) ^ mix64(bits_of(problem.offset()));
  for (const auto& [ij, v] : problem.coefficients()) {
    h = mix64(h ^ ij.first);
    h = mix64(h ^ ij.second);
    h = mix64(h ^ bits_of(v));
  }
  return h;
}

inline constexpr std::size_t kMaxBruteForceVariables = 24;

struct BruteForceResult {
  BinaryAssignment assignment;
  double objective = 0.0;
};

inline BinaryAssignment bits_from_index(std::uint64_t index, std::size_t n) {
  BinaryAssignment x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<Bit>((index >> i) & 1U);
  return x;
}

// Exhaustive minimisation. Walks the Gray code with O(n) incremental updates,
// keeps every state within a tolerance of the running minimum, then re-scores
// those exactly. Ties (within tolerance) go to the smallest integer encoding,
// bit 0 least significant.
inline BruteForceResult brute_force(const QuboProblem& problem) {
  const std::size_t n = problem.n();
  if (n > kMaxBruteForceVariables) {
    throw CapacityError("brute_force: n=" + std::to_string(n) + " exceeds cap of " +
                        std::to_string(kMaxBruteForceVariables));
  }

  std::vector<double> w(n * n, 0.0);
  std::vector<double> field(n, 0.0);  // Q_ii + sum_{j != i} W_ij x_j
  double scale = 1.0;
  for (const auto& [ij, v] : problem.coefficients()) {
    const auto [i, j] = ij;
    scale += std::abs(v);
    if (i == j) {
      field[i] += v;
    } else {
      w[i * n + j] += v;
      w[j * n + i] += v;
    }
  }
  const double tol = 1e-9 * scale;

  std::uint64_t state = 0;
  double energy = problem.offset();
  double best = energy;
  std::vector<std::uint64_t> candidates{0};

  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t t = 1; t < total; ++t) {
    const auto i = static_cast<std::size_t>(std::countr_zero(t));
    const bool was_set = (state >> i) & 1U;
    const double dx = was_set ? -1.0 : 1.0;
    energy += dx * field[i];
    state ^= std::uint64_t{1} << i;
    const double* row = &w[i * n];
    for (std::size_t j = 0; j < n; ++j) field[j] += row[j] * dx;

    if (energy < best - tol) {
      best = energy;
      candidates.clear();
      candidates.push_back(state);
    } else if (energy <= best + tol) {
      best = std::min(best, energy);
      candidates.push_back(state);
    }
  }

  std::vector<double> exact(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) exact[c] = evaluate(problem, bits_from_index(candidates[c], n));
  const double min_value = *std::min_element(exact.begin(), exact.end());
  std::uint64_t chosen = ~std::uint64_t{0};
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (exact[c] <= min_value + tol) chosen = std::min(chosen, candidates[c]);
  }

  BruteForceResult result;
  result.assignment = bits_from_index(chosen, n);
  result.objective = evaluate(problem, result.assignment);
  return result;
}

}  // namespace hadof
