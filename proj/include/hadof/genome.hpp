#pragma once

// Overlap-graph genome assembly on top of QUBO solvers.
//
// reads -> suffix/prefix overlap DAG -> edge or permutation QUBO -> solver
// -> path decoding -> merged sequence.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hadof/errors.hpp"
#include "hadof/qubo.hpp"
#include "hadof/random.hpp"

namespace hadof {

struct Read {
  std::string id;
  std::string sequence;
};

struct ReadSet {
  std::vector<Read> reads;

  [[nodiscard]] std::size_t size() const noexcept { return reads.size(); }

  void validate() const {
    std::set<std::string> ids;
    for (const auto& r : reads) {
      if (!ids.insert(r.id).second) throw ParseError("duplicate read id '" + r.id + "'");
      if (r.sequence.empty()) throw ParseError("read '" + r.id + "' is empty");
      for (char c : r.sequence) {
        if (c != 'A' && c != 'C' && c != 'G' && c != 'T') {
          throw ParseError("read '" + r.id + "' has illegal character '" + std::string(1, c) + "'");
        }
      }
    }
  }
};

inline ReadSet parse_fasta(std::string_view text) {
  ReadSet out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    if (line.front() == '>') {
      std::string_view header = line.substr(1);
      const auto cut = header.find_first_of(" \t");
      const std::string id(header.substr(0, cut));
      if (id.empty()) throw ParseError("FASTA line " + std::to_string(line_no) + ": empty header");
      out.reads.push_back({id, {}});
      continue;
    }
    if (out.reads.empty()) throw ParseError("FASTA line " + std::to_string(line_no) + ": sequence before first header");
    for (char c : line) {
      const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (u != 'A' && u != 'C' && u != 'G' && u != 'T') {
        throw ParseError("FASTA line " + std::to_string(line_no) + ": illegal character '" + std::string(1, c) + "'");
      }
      out.reads.back().sequence.push_back(u);
    }
  }
  out.validate();
  return out;
}

inline ReadSet load_fasta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_fasta(buf.str());
}

inline void write_fasta(std::ostream& out, const ReadSet& reads, std::size_t width = 70) {
  for (const auto& r : reads.reads) {
    out << '>' << r.id << '\n';
    for (std::size_t i = 0; i < r.sequence.size(); i += width) out << r.sequence.substr(i, width) << '\n';
  }
}

struct OverlapEdge {
  std::size_t tail = 0;
  std::size_t head = 0;
  std::size_t weight = 0;

  friend bool operator==(const OverlapEdge&, const OverlapEdge&) = default;
};

struct OverlapGraph {
  std::size_t nodes = 0;
  std::size_t min_overlap = 0;
  std::vector<OverlapEdge> edges;  // sorted by (tail, head)
  bool acyclic = true;
  std::vector<std::size_t> cycle;  // a witness when !acyclic, first node repeated at the end

  [[nodiscard]] std::optional<std::size_t> weight(std::size_t tail, std::size_t head) const {
    auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{tail, head}, [](const OverlapEdge& e, auto key) {
      return std::pair{e.tail, e.head} < key;
    });
    if (it == edges.end() || it->tail != tail || it->head != head) return std::nullopt;
    return it->weight;
  }
};

// Longest w < min(|a|, |b|) with suffix_w(a) == prefix_w(b), via the prefix
// function of b + '#' + a.
inline std::size_t longest_overlap(std::string_view a, std::string_view b) {
  const std::size_t cap = std::min(a.size(), b.size());
  if (cap < 2) return 0;
  std::string s;
  s.reserve(a.size() + b.size() + 1);
  s.append(b).push_back('#');
  s.append(a);
  std::vector<std::size_t> pi(s.size(), 0);
  for (std::size_t i = 1; i < s.size(); ++i) {
    std::size_t k = pi[i - 1];
    while (k > 0 && s[i] != s[k]) k = pi[k - 1];
    if (s[i] == s[k]) ++k;
    pi[i] = k;
  }
  std::size_t k = pi.back();
  while (k >= cap) k = pi[k - 1];
  return k;
}

// Cycle witness from a DFS, or empty when the graph is acyclic.
inline std::vector<std::size_t> find_cycle(std::size_t nodes, const std::vector<OverlapEdge>& edges) {
  std::vector<std::vector<std::size_t>> out(nodes);
  for (const auto& e : edges) out[e.tail].push_back(e.head);
  enum : std::uint8_t { kWhite, kGrey, kBlack };
  std::vector<std::uint8_t> colour(nodes, kWhite);
  std::vector<std::size_t> parent(nodes, nodes);

  for (std::size_t root = 0; root < nodes; ++root) {
    if (colour[root] != kWhite) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    colour[root] = kGrey;
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      if (next == out[u].size()) {
        colour[u] = kBlack;
        stack.pop_back();
        continue;
      }
      const std::size_t v = out[u][next++];
      if (colour[v] == kGrey) {
        std::vector<std::size_t> cycle{v};
        for (std::size_t w = u; w != v; w = parent[w]) cycle.push_back(w);
        cycle.push_back(v);
        std::reverse(cycle.begin(), cycle.end());
        return cycle;
      }
      if (colour[v] == kWhite) {
        colour[v] = kGrey;
        parent[v] = u;
        stack.emplace_back(v, 0);
      }
    }
  }
  return {};
}

inline OverlapGraph compute_overlaps(const ReadSet& reads, std::size_t min_overlap = 3) {
  if (min_overlap < 1) throw ConfigError("compute_overlaps: min_overlap must be >= 1");
  OverlapGraph g;
  g.nodes = reads.size();
  g.min_overlap = min_overlap;
  for (std::size_t u = 0; u < g.nodes; ++u) {
    for (std::size_t v = 0; v < g.nodes; ++v) {
      if (u == v) continue;
      const std::size_t w = longest_overlap(reads.reads[u].sequence, reads.reads[v].sequence);
      if (w >= min_overlap) g.edges.push_back({u, v, w});
    }
  }
  g.cycle = find_cycle(g.nodes, g.edges);
  g.acyclic = g.cycle.empty();
  return g;
}

// Drops u->w whenever u->v->w exists.
inline OverlapGraph transitive_reduction(const OverlapGraph& graph) {
  std::set<std::pair<std::size_t, std::size_t>> present;
  std::vector<std::vector<std::size_t>> out(graph.nodes);
  for (const auto& e : graph.edges) {
    present.insert({e.tail, e.head});
    out[e.tail].push_back(e.head);
  }
  OverlapGraph reduced = graph;
  reduced.edges.clear();
  for (const auto& e : graph.edges) {
    const bool implied = std::any_of(out[e.tail].begin(), out[e.tail].end(), [&](std::size_t v) {
      return v != e.head && present.count({v, e.head}) > 0;
    });
    if (!implied) reduced.edges.push_back(e);
  }
  reduced.cycle = find_cycle(reduced.nodes, reduced.edges);
  reduced.acyclic = reduced.cycle.empty();
  return reduced;
}

inline void write_edge_csv(std::ostream& out, const OverlapGraph& graph) {
  out << "tail,head,weight\n";
  for (const auto& e : graph.edges) out << e.tail << ',' << e.head << ',' << e.weight << '\n';
}

// Variable e is edges[e] of the graph the encoding was built from.
struct EdgeEncoding {
  std::size_t nodes = 0;
  std::vector<OverlapEdge> edges;
  double penalty = 1.0;
};

// Variable v*N + j means node v sits at path position j.
struct PermutationEncoding {
  std::size_t nodes = 0;
  std::vector<OverlapEdge> edges;
  double penalty = 1.0;

  [[nodiscard]] std::size_t index(std::size_t v, std::size_t j) const noexcept { return v * nodes + j; }
};

template <typename Encoding>
struct EncodedQubo {
  QuboProblem qubo;
  Encoding context;
};

class CyclicGraphError : public ConfigError {
 public:
  explicit CyclicGraphError(std::vector<std::size_t> witness)
      : ConfigError("overlap graph has a cycle: " + describe(witness)), witness_(std::move(witness)) {}

  [[nodiscard]] const std::vector<std::size_t>& witness() const noexcept { return witness_; }

 private:
  static std::string describe(const std::vector<std::size_t>& w) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "->" : "") + std::to_string(w[i]);
    return s;
  }
  std::vector<std::size_t> witness_;
};

// A sum_u (1 - sum_{out(u)} x)^2 + A sum_v (1 - sum_{in(v)} x)^2.
inline EncodedQubo<EdgeEncoding> encode_edge_qubo(const OverlapGraph& graph, double penalty = 1.0) {
  if (!(penalty > 0.0)) throw ConfigError("encode_edge_qubo: penalty must be > 0");
  if (!graph.acyclic) throw CyclicGraphError(graph.cycle.empty() ? find_cycle(graph.nodes, graph.edges) : graph.cycle);
  if (graph.edges.empty()) throw ConfigError("encode_edge_qubo: graph has no edges");
  const std::size_t m = graph.edges.size();
  const double a = penalty;

  QuboProblem q(m, 2.0 * static_cast<double>(graph.nodes) * a);
  for (std::size_t e = 0; e < m; ++e) q.add(e, e, -2.0 * a);
  for (std::size_t e = 0; e < m; ++e) {
    for (std::size_t f = e + 1; f < m; ++f) {
      if (graph.edges[e].tail == graph.edges[f].tail) q.add(e, f, 2.0 * a);
      if (graph.edges[e].head == graph.edges[f].head) q.add(e, f, 2.0 * a);
    }
  }
  return {std::move(q), EdgeEncoding{graph.nodes, graph.edges, penalty}};
}

// Row and column one-hot penalties plus A x_{u,j} x_{v,j+1} for every ordered
// pair u != v that is not an edge.
inline EncodedQubo<PermutationEncoding> encode_permutation_qubo(const OverlapGraph& graph, double penalty = 1.0) {
  if (!(penalty > 0.0)) throw ConfigError("encode_permutation_qubo: penalty must be > 0");
  const std::size_t n = graph.nodes;
  if (n == 0) throw ConfigError("encode_permutation_qubo: graph has no nodes");
  const double a = penalty;
  PermutationEncoding ctx{n, graph.edges, penalty};

  QuboProblem q(n * n, 2.0 * static_cast<double>(n) * a);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t j = 0; j < n; ++j) {
      q.add(ctx.index(v, j), ctx.index(v, j), -2.0 * a);
      for (std::size_t j2 = j + 1; j2 < n; ++j2) q.add(ctx.index(v, j), ctx.index(v, j2), 2.0 * a);
      for (std::size_t v2 = v + 1; v2 < n; ++v2) q.add(ctx.index(v, j), ctx.index(v2, j), 2.0 * a);
    }
  }
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v || graph.weight(u, v)) continue;
      for (std::size_t j = 0; j + 1 < n; ++j) q.add(ctx.index(u, j), ctx.index(v, j + 1), a);
    }
  }
  return {std::move(q), std::move(ctx)};
}

struct PathSolution {
  std::vector<std::size_t> order;           // node sequence
  std::vector<OverlapEdge> selected_edges;  // consecutive edges along `order`
  bool valid = false;
  std::string diagnostic;
};

inline PathSolution decode_path(std::span<const Bit> solution, const EdgeEncoding& ctx) {
  if (solution.size() != ctx.edges.size()) throw DimensionError("decode_path: assignment length != edge count");
  PathSolution out;
  constexpr auto kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> next(ctx.nodes, kNone);
  std::vector<std::size_t> in_deg(ctx.nodes, 0);
  std::vector<std::size_t> out_deg(ctx.nodes, 0);
  std::vector<OverlapEdge> chosen;
  for (std::size_t e = 0; e < solution.size(); ++e) {
    if (!solution[e]) continue;
    const auto& edge = ctx.edges[e];
    chosen.push_back(edge);
    ++out_deg[edge.tail];
    ++in_deg[edge.head];
    next[edge.tail] = e;
  }
  if (chosen.empty()) {
    out.diagnostic = "no edges selected";
    return out;
  }
  for (std::size_t v = 0; v < ctx.nodes; ++v) {
    if (out_deg[v] > 1) {
      out.diagnostic = "node " + std::to_string(v) + " has out-degree " + std::to_string(out_deg[v]);
      return out;
    }
    if (in_deg[v] > 1) {
      out.diagnostic = "node " + std::to_string(v) + " has in-degree " + std::to_string(in_deg[v]);
      return out;
    }
  }
  std::vector<std::size_t> starts;
  for (const auto& e : chosen) {
    if (in_deg[e.tail] == 0) starts.push_back(e.tail);
  }
  if (starts.size() != 1) {
    out.diagnostic = starts.empty() ? "selected edges form a cycle"
                                    : "selected edges form " + std::to_string(starts.size()) + " disjoint chains";
    return out;
  }
  out.order.push_back(starts.front());
  while (next[out.order.back()] != kNone && out.selected_edges.size() <= chosen.size()) {
    const auto& e = ctx.edges[next[out.order.back()]];
    out.selected_edges.push_back(e);
    out.order.push_back(e.head);
  }
  if (out.selected_edges.size() != chosen.size()) {
    out.diagnostic = "selected edges are not a single chain";
    out.selected_edges.clear();
    out.order.clear();
    return out;
  }
  out.valid = true;
  return out;
}

inline PathSolution decode_path(std::span<const Bit> solution, const PermutationEncoding& ctx) {
  const std::size_t n = ctx.nodes;
  if (solution.size() != n * n) throw DimensionError("decode_path: assignment length != N^2");
  PathSolution out;
  std::vector<std::size_t> at(n, n);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (solution[ctx.index(v, j)]) {
        ++count;
        if (at[j] != n) {
          out.diagnostic = "position " + std::to_string(j) + " holds more than one node";
          return out;
        }
        at[j] = v;
      }
    }
    if (count != 1) {
      out.diagnostic = "node " + std::to_string(v) + " appears " + std::to_string(count) + " times";
      return out;
    }
  }
  out.order = at;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const auto u = at[j];
    const auto v = at[j + 1];
    auto it = std::find_if(ctx.edges.begin(), ctx.edges.end(),
                           [&](const OverlapEdge& e) { return e.tail == u && e.head == v; });
    if (it == ctx.edges.end()) {
      out.diagnostic = "no edge " + std::to_string(u) + "->" + std::to_string(v) + " at step " + std::to_string(j);
      out.order.clear();
      out.selected_edges.clear();
      return out;
    }
    out.selected_edges.push_back(*it);
  }
  out.valid = true;
  return out;
}

inline std::string merge_sequence(const PathSolution& path, const ReadSet& reads) {
  if (!path.valid) throw ConfigError("merge_sequence: invalid path (" + path.diagnostic + ")");
  if (path.order.empty()) throw ConfigError("merge_sequence: empty path");
  if (path.selected_edges.size() + 1 != path.order.size()) throw DimensionError("merge_sequence: edge/order mismatch");
  for (auto v : path.order) {
    if (v >= reads.size()) throw DimensionError("merge_sequence: node " + std::to_string(v) + " has no read");
  }
  std::string out = reads.reads[path.order.front()].sequence;
  for (std::size_t s = 0; s < path.selected_edges.size(); ++s) {
    const auto& seq = reads.reads[path.order[s + 1]].sequence;
    out += seq.substr(std::min(path.selected_edges[s].weight, seq.size()));
  }
  return out;
}

// The merge only needs the overlap weights carried by the path, but callers
// often have the graph at hand.
inline std::string merge_sequence(const PathSolution& path, const ReadSet& reads, const OverlapGraph&) {
  return merge_sequence(path, reads);
}

inline std::string random_genome(std::size_t length, std::uint64_t seed) {
  static constexpr char kBases[] = {'A', 'C', 'G', 'T'};
  Rng rng(seed);
  std::string g(length, 'A');
  for (auto& c : g) c = kBases[rng() >> 62];
  return g;
}

// Windows at 0, stride, 2*stride, ...; if that misses the tail, one extra
// window ending at the last base is appended so the reads cover the genome.
// Read ids record the window start.
inline ReadSet synthesize_reads(const std::string& genome, std::size_t read_length, std::size_t stride,
                                std::uint64_t seed = 0, bool shuffle = false) {
  if (read_length < 1 || read_length > genome.size()) throw ConfigError("synthesize_reads: bad read_length");
  if (stride < 1 || stride > read_length) throw ConfigError("synthesize_reads: stride must be in [1, read_length]");
  ReadSet out;
  std::size_t start = 0;
  for (; start + read_length <= genome.size(); start += stride) {
    out.reads.push_back({"read_" + std::to_string(start), genome.substr(start, read_length)});
  }
  const std::size_t last = genome.size() - read_length;
  if ((last % stride) != 0) out.reads.push_back({"read_" + std::to_string(last), genome.substr(last)});
  if (shuffle) {
    Rng rng(seed);
    std::shuffle(out.reads.begin(), out.reads.end(), rng);
  }
  return out;
}

}  // namespace hadof
