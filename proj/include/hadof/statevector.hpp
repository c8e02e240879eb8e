#pragma once

// Exact statevector simulation of the annealing-schedule QAOA circuit.
//
// Basis index b: bit j of b is qubit j, qubit 0 least significant.
// Bit value 1 on qubit j corresponds to spin z_j = -1.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "hadof/errors.hpp"
#include "hadof/qubo.hpp"
#include "hadof/random.hpp"

namespace hadof {

using Amplitude = std::complex<double>;
using BasisIndex = std::uint32_t;

inline constexpr std::size_t kMaxQubits = 24;

class Statevector {
 public:
  Statevector(std::size_t k, std::vector<Amplitude> amps) : k_(k), amps_(std::move(amps)) {
    if (k == 0 || k > kMaxQubits) throw CapacityError("Statevector: k=" + std::to_string(k) + " outside [1, 24]");
    if (amps_.size() != (std::size_t{1} << k)) throw DimensionError("Statevector: amplitude count != 2^k");
  }

  static Statevector basis(std::size_t k, BasisIndex b) {
    if (k == 0 || k > kMaxQubits) throw CapacityError("Statevector: k=" + std::to_string(k) + " outside [1, 24]");
    std::vector<Amplitude> amps(std::size_t{1} << k);
    amps.at(b) = 1.0;
    return {k, std::move(amps)};
  }

  [[nodiscard]] std::size_t qubits() const noexcept { return k_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return amps_.size(); }
  [[nodiscard]] const std::vector<Amplitude>& amplitudes() const noexcept { return amps_; }
  [[nodiscard]] std::vector<Amplitude>& amplitudes() noexcept { return amps_; }

  [[nodiscard]] double norm_squared() const {
    return std::accumulate(amps_.begin(), amps_.end(), 0.0, [](double s, Amplitude a) { return s + std::norm(a); });
  }

 private:
  std::size_t k_;
  std::vector<Amplitude> amps_;
};

// Fixed (non-optimised) annealing parameters: beta_m = 1 - m/p, gamma_m = m/p, m = 1..p.
struct AnnealSchedule {
  std::vector<double> betas;
  std::vector<double> gammas;

  [[nodiscard]] std::size_t layers() const noexcept { return betas.size(); }

  static AnnealSchedule linear(std::size_t p) {
    if (p == 0) throw ConfigError("AnnealSchedule: p must be >= 1");
    AnnealSchedule s;
    for (std::size_t m = 1; m <= p; ++m) {
      const double t = static_cast<double>(m) / static_cast<double>(p);
      s.betas.push_back(1.0 - t);
      s.gammas.push_back(t);
    }
    return s;
  }

  // Multiplies every gamma, equivalent to rescaling the cost Hamiltonian.
  [[nodiscard]] AnnealSchedule with_gamma_scale(double scale) const {
    AnnealSchedule s = *this;
    for (auto& g : s.gammas) g *= scale;
    return s;
  }
};

inline Statevector plus_state(std::size_t k) {
  if (k == 0 || k > kMaxQubits) throw CapacityError("plus_state: k=" + std::to_string(k) + " outside [1, 24]");
  const std::size_t dim = std::size_t{1} << k;
  return {k, std::vector<Amplitude>(dim, Amplitude(std::pow(2.0, -0.5 * static_cast<double>(k)), 0.0))};
}

// Ising energy of every basis state, offset included. Built by adding the
// highest set bit to an already-known prefix state: O(k 2^k).
inline std::vector<double> cost_diagonal(const IsingModel& model) {
  const std::size_t k = model.k;
  if (k == 0 || k > kMaxQubits) throw CapacityError("cost_diagonal: k=" + std::to_string(k) + " outside [1, 24]");
  if (model.h.size() != k) throw DimensionError("cost_diagonal: h length != k");

  // coupling[j][i] for i < j
  std::vector<std::vector<double>> lower(k, std::vector<double>(k, 0.0));
  for (const auto& [ij, v] : model.J) {
    if (ij.first >= k || ij.second >= k || ij.first == ij.second) throw DimensionError("cost_diagonal: bad J index");
    const auto lo = std::min(ij.first, ij.second);
    const auto hi = std::max(ij.first, ij.second);
    lower[hi][lo] += v;
  }

  const std::size_t dim = std::size_t{1} << k;
  std::vector<double> energy(dim);
  double all_up = model.offset;
  for (double hi : model.h) all_up += hi;
  for (const auto& [ij, v] : model.J) all_up += v;
  energy[0] = all_up;

  for (std::size_t b = 1; b < dim; ++b) {
    const auto j = static_cast<std::size_t>(std::bit_width(b) - 1);
    const std::size_t prefix = b ^ (std::size_t{1} << j);
    // flip z_j from +1 to -1 with lower qubits fixed by `prefix` and higher qubits at +1
    double delta = -2.0 * model.h[j];
    for (std::size_t i = 0; i < j; ++i) {
      const double zi = ((prefix >> i) & 1U) ? -1.0 : 1.0;
      delta -= 2.0 * lower[j][i] * zi;
    }
    for (std::size_t i = j + 1; i < k; ++i) delta -= 2.0 * lower[i][j];
    energy[b] = energy[prefix] + delta;
  }
  return energy;
}

inline void apply_phase(Statevector& state, const std::vector<double>& diagonal, double gamma) {
  if (diagonal.size() != state.dimension()) throw DimensionError("apply_phase: diagonal size mismatch");
  auto& amps = state.amplitudes();
  for (std::size_t b = 0; b < amps.size(); ++b) amps[b] *= std::polar(1.0, -gamma * diagonal[b]);
}

inline Statevector apply_cost_layer(Statevector state, const IsingModel& model, double gamma) {
  if (model.k != state.qubits()) {
    throw DimensionError("apply_cost_layer: model has " + std::to_string(model.k) + " spins, state has " +
                         std::to_string(state.qubits()) + " qubits");
  }
  apply_phase(state, cost_diagonal(model), gamma);
  return state;
}

// exp(-i beta X) on every qubit.
inline Statevector apply_mixer_layer(Statevector state, double beta) {
  const double c = std::cos(beta);
  const Amplitude mis(0.0, -std::sin(beta));
  auto& amps = state.amplitudes();
  const std::size_t dim = amps.size();
  for (std::size_t q = 0; q < state.qubits(); ++q) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
      for (std::size_t b = base; b < base + stride; ++b) {
        const Amplitude a0 = amps[b];
        const Amplitude a1 = amps[b + stride];
        amps[b] = c * a0 + mis * a1;
        amps[b + stride] = mis * a0 + c * a1;
      }
    }
  }
  return state;
}

// Layers 1..depth of the schedule, each cost(gamma_m) then mixer(beta_m).
// The mixer Hamiltonian is -sum X, whose ground state is the |+>^k start
// state, so the mixer unitary is exp(+i beta_m sum X); with exp(-i beta X)
// the ramp would track the highest-energy state instead of the lowest.
inline Statevector run_circuit(const IsingModel& model, const AnnealSchedule& schedule, std::size_t depth) {
  if (schedule.betas.size() != schedule.gammas.size()) throw ConfigError("run_circuit: schedule length mismatch");
  if (depth < 1 || depth > schedule.layers()) {
    throw ConfigError("run_circuit: depth " + std::to_string(depth) + " outside [1, " +
                      std::to_string(schedule.layers()) + "]");
  }
  const auto diagonal = cost_diagonal(model);
  Statevector state = plus_state(model.k);
  for (std::size_t m = 0; m < depth; ++m) {
    apply_phase(state, diagonal, schedule.gammas[m]);
    state = apply_mixer_layer(std::move(state), -schedule.betas[m]);
  }
  return state;
}

inline std::vector<double> probabilities(const Statevector& state) {
  std::vector<double> p(state.dimension());
  std::transform(state.amplitudes().begin(), state.amplitudes().end(), p.begin(),
                 [](Amplitude a) { return std::norm(a); });
  return p;
}

inline std::vector<double> qubit_expectations(const Statevector& state) {
  std::vector<double> out(state.qubits(), 0.0);
  const auto& amps = state.amplitudes();
  for (std::size_t b = 0; b < amps.size(); ++b) {
    const double p = std::norm(amps[b]);
    for (std::size_t j = 0; j < out.size(); ++j) {
      if ((b >> j) & 1U) out[j] += p;
    }
  }
  for (auto& v : out) v = std::clamp(v, 0.0, 1.0);
  return out;
}

// Inverse-CDF sampler over |amps|^2.
class BasisSampler {
 public:
  explicit BasisSampler(const Statevector& state) : cdf_(state.dimension()) {
    double acc = 0.0;
    for (std::size_t b = 0; b < cdf_.size(); ++b) {
      acc += std::norm(state.amplitudes()[b]);
      cdf_[b] = acc;
    }
  }

  BasisIndex draw(Rng& rng) const {
    const double u = unit_uniform(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<BasisIndex>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

inline std::vector<double> sample_expectations(const Statevector& state, std::size_t shots, Rng& rng) {
  if (shots == 0) throw ConfigError("sample_expectations: shots must be >= 1");
  const BasisSampler sampler(state);
  std::vector<std::size_t> ones(state.qubits(), 0);
  for (std::size_t s = 0; s < shots; ++s) {
    const BasisIndex b = sampler.draw(rng);
    for (std::size_t j = 0; j < ones.size(); ++j) ones[j] += (b >> j) & 1U;
  }
  std::vector<double> out(ones.size());
  for (std::size_t j = 0; j < ones.size(); ++j) out[j] = static_cast<double>(ones[j]) / static_cast<double>(shots);
  return out;
}

// Ket-style label: qubit k-1 leftmost, qubit 0 rightmost.
inline std::string bitstring(BasisIndex b, std::size_t k) {
  std::string s(k, '0');
  for (std::size_t j = 0; j < k; ++j) {
    if ((b >> j) & 1U) s[k - 1 - j] = '1';
  }
  return s;
}

struct SampleSet {
  std::size_t k = 0;
  std::size_t shots = 0;
  std::vector<BasisIndex> draws;            // in draw order
  std::map<std::string, std::size_t> counts;  // keyed by bitstring()
};

inline SampleSet sample_bitstrings(const Statevector& state, std::size_t shots, Rng& rng, double readout_flip = 0.0) {
  if (shots == 0) throw ConfigError("sample_bitstrings: shots must be >= 1");
  if (!(readout_flip >= 0.0 && readout_flip < 1.0)) throw ConfigError("sample_bitstrings: readout_flip outside [0, 1)");
  const BasisSampler sampler(state);
  SampleSet out;
  out.k = state.qubits();
  out.shots = shots;
  out.draws.reserve(shots);
  for (std::size_t s = 0; s < shots; ++s) {
    BasisIndex b = sampler.draw(rng);
    if (readout_flip > 0.0) {
      for (std::size_t j = 0; j < out.k; ++j) {
        if (unit_uniform(rng) < readout_flip) b ^= BasisIndex{1} << j;
      }
    }
    out.draws.push_back(b);
    ++out.counts[bitstring(b, out.k)];
  }
  return out;
}

}  // namespace hadof
