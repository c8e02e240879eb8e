#pragma once

// Deliberately naive reference implementations, written independently of the
// library code paths they check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "hadof/genome.hpp"
#include "hadof/qubo.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

// Upper-triangular dense copy.
inline Dense dense(const hadof::QuboProblem& q) {
  Dense m(q.n(), std::vector<double>(q.n(), 0.0));
  for (std::size_t i = 0; i < q.n(); ++i) {
    for (std::size_t j = i; j < q.n(); ++j) m[i][j] = q.coefficient(i, j);
  }
  return m;
}

inline double qubo_value(const Dense& m, double offset, const std::vector<double>& x) {
  double f = offset;
  for (std::size_t i = 0; i < m.size(); ++i) {
    f += m[i][i] * x[i];
    for (std::size_t j = i + 1; j < m.size(); ++j) f += m[i][j] * x[i] * x[j];
  }
  return f;
}

inline double qubo_value(const hadof::QuboProblem& q, std::uint64_t bits) {
  std::vector<double> x(q.n());
  for (std::size_t i = 0; i < q.n(); ++i) x[i] = static_cast<double>((bits >> i) & 1U);
  return qubo_value(dense(q), q.offset(), x);
}

struct Optimum {
  std::uint64_t index = 0;
  double value = 0.0;
};

// Plain enumeration in index order; first strict improvement wins.
inline Optimum enumerate(const hadof::QuboProblem& q) {
  const Dense m = dense(q);
  Optimum best{0, qubo_value(m, q.offset(), std::vector<double>(q.n(), 0.0))};
  for (std::uint64_t b = 1; b < (std::uint64_t{1} << q.n()); ++b) {
    std::vector<double> x(q.n());
    for (std::size_t i = 0; i < q.n(); ++i) x[i] = static_cast<double>((b >> i) & 1U);
    const double v = qubo_value(m, q.offset(), x);
    if (v < best.value - 1e-9 * (1.0 + std::abs(best.value))) best = {b, v};
  }
  return best;
}

// Ising energy straight from the QUBO through x = (1 - z) / 2.
inline double energy_via_spins(const hadof::QuboProblem& q, const std::vector<int>& z) {
  std::vector<double> x(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = (1.0 - z[i]) / 2.0;
  return qubo_value(dense(q), q.offset(), x);
}

// Dense 2^k x 2^k matrices for tiny registers.
using C = std::complex<double>;
using Matrix = std::vector<std::vector<C>>;

inline Matrix identity(std::size_t dim) {
  Matrix m(dim, std::vector<C>(dim, 0.0));
  for (std::size_t i = 0; i < dim; ++i) m[i][i] = 1.0;
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.size() * b.size(), std::vector<C>(a.size() * b.size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      for (std::size_t k = 0; k < b.size(); ++k)
        for (std::size_t l = 0; l < b.size(); ++l) out[i * b.size() + k][j * b.size() + l] = a[i][j] * b[k][l];
  return out;
}

inline std::vector<C> apply(const Matrix& m, const std::vector<C>& v) {
  std::vector<C> out(v.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
  return out;
}

// exp(-i theta X) applied to every qubit, as a Kronecker product. Qubit 0 is
// the least significant index bit, i.e. the rightmost factor.
inline Matrix rx_all(std::size_t k, double theta) {
  const Matrix single{{std::cos(theta), C(0.0, -std::sin(theta))}, {C(0.0, -std::sin(theta)), std::cos(theta)}};
  Matrix m = single;
  for (std::size_t q = 1; q < k; ++q) m = kron(single, m);
  return m;
}

// A sum_u (1 - sum_out x)^2 + A sum_v (1 - sum_in x)^2, evaluated literally.
inline double edge_hamiltonian(const std::vector<hadof::OverlapEdge>& edges, std::size_t nodes, double a,
                               std::uint64_t bits) {
  double h = 0.0;
  for (std::size_t u = 0; u < nodes; ++u) {
    double out = 0.0;
    double in = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double x = static_cast<double>((bits >> e) & 1U);
      if (edges[e].tail == u) out += x;
      if (edges[e].head == u) in += x;
    }
    h += a * (1.0 - out) * (1.0 - out) + a * (1.0 - in) * (1.0 - in);
  }
  return h;
}

// Row/column one-hot terms plus the non-edge transition penalty, literally.
inline double permutation_hamiltonian(const std::vector<hadof::OverlapEdge>& edges, std::size_t n, double a,
                                      std::uint64_t bits) {
  auto x = [&](std::size_t v, std::size_t j) { return static_cast<double>((bits >> (v * n + j)) & 1U); };
  auto is_edge = [&](std::size_t u, std::size_t v) {
    for (const auto& e : edges)
      if (e.tail == u && e.head == v) return true;
    return false;
  };
  double h = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += x(v, j);
    h += a * (1.0 - s) * (1.0 - s);
  }
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t v = 0; v < n; ++v) s += x(v, j);
    h += a * (1.0 - s) * (1.0 - s);
  }
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v && !is_edge(u, v))
        for (std::size_t j = 0; j + 1 < n; ++j) h += a * x(u, j) * x(v, j + 1);
  return h;
}

// Largest w < min(|a|, |b|) by direct comparison.
inline std::size_t overlap(const std::string& a, const std::string& b) {
  const std::size_t cap = std::min(a.size(), b.size());
  for (std::size_t w = cap == 0 ? 0 : cap - 1; w > 0; --w) {
    if (a.compare(a.size() - w, w, b, 0, w) == 0) return w;
  }
  return 0;
}

}  // namespace oracle
