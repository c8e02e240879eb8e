#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "hadof/annealing.hpp"
#include "hadof/engine.hpp"
#include "hadof/genome.hpp"
#include "oracles.hpp"

using namespace hadof;

namespace {

OverlapGraph make_graph(std::size_t nodes, std::vector<std::pair<std::size_t, std::size_t>> arcs) {
  OverlapGraph g;
  g.nodes = nodes;
  g.min_overlap = 1;
  std::sort(arcs.begin(), arcs.end());
  for (auto [u, v] : arcs) g.edges.push_back({u, v, 1});
  g.cycle = find_cycle(nodes, g.edges);
  g.acyclic = g.cycle.empty();
  return g;
}

// Random DAG on a hidden topological order.
OverlapGraph random_dag(std::size_t nodes, std::size_t max_edges, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> order(nodes);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::pair<std::size_t, std::size_t>> arcs;
  for (std::size_t a = 0; a < nodes; ++a)
    for (std::size_t b = a + 1; b < nodes; ++b)
      if (unit_uniform(rng) < 0.5 && arcs.size() < max_edges) arcs.emplace_back(order[a], order[b]);
  return make_graph(nodes, arcs);
}

bool is_hamiltonian_path(const OverlapGraph& g, std::uint64_t bits) {
  std::vector<int> in(g.nodes, 0);
  std::vector<int> out(g.nodes, 0);
  std::size_t count = 0;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (!((bits >> e) & 1U)) continue;
    ++count;
    ++out[g.edges[e].tail];
    ++in[g.edges[e].head];
  }
  if (count + 1 != g.nodes) return false;
  for (std::size_t v = 0; v < g.nodes; ++v)
    if (in[v] > 1 || out[v] > 1) return false;
  return true;  // n-1 arcs, degrees <= 1, acyclic: a single path
}

}  // namespace

TEST(Fasta, Parse) {
  const auto one = parse_fasta(">r1\nACGT\n");
  ASSERT_EQ(one.size(), 1U);
  EXPECT_EQ(one.reads[0].id, "r1");
  EXPECT_EQ(one.reads[0].sequence, "ACGT");

  const auto multi = parse_fasta(">a desc\nAC\ngt\n\n>b\r\nTTT");
  ASSERT_EQ(multi.size(), 2U);
  EXPECT_EQ(multi.reads[0].id, "a");
  EXPECT_EQ(multi.reads[0].sequence, "ACGT");
  EXPECT_EQ(multi.reads[1].sequence, "TTT");
}

TEST(Fasta, Errors) {
  EXPECT_THROW(parse_fasta("ACGT\n"), ParseError);
  EXPECT_THROW(parse_fasta(">\nACGT\n"), ParseError);
  EXPECT_THROW(parse_fasta(">r\nACNT\n"), ParseError);
  EXPECT_THROW(parse_fasta(">r\nACGT\n>r\nAC\n"), ParseError);
  EXPECT_THROW(parse_fasta(">r\n>s\nAC\n"), ParseError);
}

TEST(Fasta, WriteRoundTrip) {
  ReadSet rs{{{"x", std::string(150, 'A')}, {"y", "CGT"}}};
  std::ostringstream out;
  write_fasta(out, rs);
  const auto back = parse_fasta(out.str());
  EXPECT_EQ(back.reads[0].sequence, rs.reads[0].sequence);
  EXPECT_EQ(back.reads[1].id, "y");
}

TEST(Overlaps, Examples) {
  EXPECT_EQ(longest_overlap("ACGT", "GTAA"), 2U);
  const auto g = compute_overlaps(ReadSet{{{"0", "ACGT"}, {"1", "GTAA"}}}, 2);
  ASSERT_EQ(g.edges.size(), 1U);
  EXPECT_EQ(g.edges[0], (OverlapEdge{0, 1, 2}));
  EXPECT_TRUE(g.acyclic);
  EXPECT_TRUE(compute_overlaps(ReadSet{{{"0", "ACGT"}, {"1", "GTAA"}}}, 3).edges.empty());
}

TEST(Overlaps, IdenticalReadsUseProperOverlap) {
  const auto g = compute_overlaps(ReadSet{{{"0", "AAAA"}, {"1", "AAAA"}}}, 1);
  ASSERT_EQ(g.edges.size(), 2U);
  EXPECT_EQ(g.edges[0].weight, 3U);
  EXPECT_EQ(g.edges[1].weight, 3U);
  EXPECT_FALSE(g.acyclic);
  ASSERT_GE(g.cycle.size(), 3U);
  EXPECT_EQ(g.cycle.front(), g.cycle.back());
}

TEST(Overlaps, MatchesNaiveOracle) {
  Rng rng(4);
  for (int t = 0; t < 300; ++t) {
    const std::string a = random_genome(1 + rng() % 12, rng());
    const std::string b = random_genome(1 + rng() % 12, rng());
    // two-letter alphabet variants make long self-similar overlaps likely
    std::string a2 = a;
    std::string b2 = b;
    for (auto& c : a2) c = c < 'G' ? 'A' : 'C';
    for (auto& c : b2) c = c < 'G' ? 'A' : 'C';
    EXPECT_EQ(longest_overlap(a, b), oracle::overlap(a, b));
    EXPECT_EQ(longest_overlap(a2, b2), oracle::overlap(a2, b2)) << a2 << " " << b2;
  }
}

TEST(Overlaps, EdgesSortedAndTransitiveReduction) {
  const auto reads = synthesize_reads(random_genome(200, 3), 60, 20);
  const auto g = compute_overlaps(reads, 15);
  EXPECT_TRUE(std::is_sorted(g.edges.begin(), g.edges.end(),
                             [](auto& a, auto& b) { return std::pair{a.tail, a.head} < std::pair{b.tail, b.head}; }));
  // stride 20 of length 60 links i -> i+1 (40) and i -> i+2 (20)
  EXPECT_EQ(g.weight(0, 1), 40U);
  EXPECT_EQ(g.weight(0, 2), 20U);
  const auto r = transitive_reduction(g);
  EXPECT_FALSE(r.weight(0, 2).has_value());
  EXPECT_EQ(r.edges.size(), reads.size() - 1);
  std::ostringstream csv;
  write_edge_csv(csv, r);
  EXPECT_EQ(csv.str().substr(0, 24), "tail,head,weight\n0,1,40\n");
}

TEST(EdgeEncoding, PathGraphMinimum) {
  const auto g = make_graph(3, {{0, 1}, {1, 2}});
  const double a = 1.5;
  const auto enc = encode_edge_qubo(g, a);
  ASSERT_EQ(enc.qubo.n(), 2U);
  const auto best = brute_force(enc.qubo);
  EXPECT_EQ(best.assignment, (BinaryAssignment{1, 1}));
  EXPECT_NEAR(best.objective, 2 * a, 1e-12);
}

TEST(EdgeEncoding, SingleEdge) {
  const auto enc = encode_edge_qubo(make_graph(2, {{0, 1}}), 1.0);
  EXPECT_DOUBLE_EQ(evaluate(enc.qubo, BinaryAssignment{1}), 2.0);
  EXPECT_DOUBLE_EQ(evaluate(enc.qubo, BinaryAssignment{0}), 4.0);
}

TEST(EdgeEncoding, RejectsCycleWithWitness) {
  const auto g = make_graph(3, {{0, 1}, {1, 2}, {2, 0}});
  try {
    encode_edge_qubo(g, 1.0);
    FAIL() << "expected CyclicGraphError";
  } catch (const CyclicGraphError& e) {
    EXPECT_EQ(e.witness().size(), 4U);
  }
  EXPECT_THROW(encode_edge_qubo(make_graph(2, {{0, 1}}), 0.0), ConfigError);
}

// Exhaustive over every assignment for DAGs with M <= 16 edges.
TEST(EdgeEncoding, AlgebraAndGroundStatesExhaustive) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto g = random_dag(3 + seed % 5, 16, seed);
    if (g.edges.empty()) continue;
    const double a = 0.5 + static_cast<double>(seed % 3);
    const auto enc = encode_edge_qubo(g, a);
    const QuboEvaluator eval(enc.qubo);
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << g.edges.size()); ++b) {
      const double value = eval(bits_from_index(b, g.edges.size()));
      ASSERT_NEAR(value, oracle::edge_hamiltonian(g.edges, g.nodes, a, b), 1e-9);
      if (is_hamiltonian_path(g, b)) {
        EXPECT_NEAR(value, 2 * a, 1e-9);
      } else {
        EXPECT_GE(value, 2 * a - 1e-9);
      }
    }
  }
}

TEST(EdgeEncoding, DegreeViolationsScoreAboveTwoA) {
  const auto g = make_graph(4, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}});
  const auto enc = encode_edge_qubo(g, 1.0);
  for (std::uint64_t b = 0; b < 32; ++b) {
    std::vector<int> in(4), out(4);
    for (std::size_t e = 0; e < 5; ++e)
      if ((b >> e) & 1U) {
        ++out[g.edges[e].tail];
        ++in[g.edges[e].head];
      }
    const bool violates = std::any_of(in.begin(), in.end(), [](int d) { return d > 1; }) ||
                          std::any_of(out.begin(), out.end(), [](int d) { return d > 1; });
    if (violates) {
      EXPECT_GT(evaluate(enc.qubo, bits_from_index(b, 5)), 2.0 + 1e-9);
    }
  }
}

TEST(PermutationEncoding, AlgebraExhaustive) {
  const std::vector<OverlapGraph> graphs{
      make_graph(1, {}),
      make_graph(2, {{0, 1}}),
      make_graph(3, {{0, 1}, {1, 2}}),
      make_graph(3, {{0, 1}, {0, 2}, {1, 2}}),
      make_graph(3, {{2, 0}, {1, 0}}),
  };
  for (const auto& g : graphs) {
    for (double a : {1.0, 2.5}) {
      const auto enc = encode_permutation_qubo(g, a);
      ASSERT_EQ(enc.qubo.n(), g.nodes * g.nodes);
      const QuboEvaluator eval(enc.qubo);
      for (std::uint64_t b = 0; b < (std::uint64_t{1} << enc.qubo.n()); ++b) {
        ASSERT_NEAR(eval(bits_from_index(b, enc.qubo.n())), oracle::permutation_hamiltonian(g.edges, g.nodes, a, b),
                    1e-9);
      }
    }
  }
}

TEST(PermutationEncoding, ValidPathsAreGroundStates) {
  // complete DAG on 3 nodes: only 0,1,2 follows edges
  const auto g = make_graph(3, {{0, 1}, {0, 2}, {1, 2}});
  const auto enc = encode_permutation_qubo(g, 1.0);
  const auto best = brute_force(enc.qubo);
  const auto path = decode_path(best.assignment, enc.context);
  ASSERT_TRUE(path.valid) << path.diagnostic;
  EXPECT_EQ(path.order, (std::vector<std::size_t>{0, 1, 2}));

  const auto single = encode_permutation_qubo(make_graph(1, {}), 1.0);
  EXPECT_EQ(brute_force(single.qubo).assignment, BinaryAssignment{1});

  // no penalty terms beyond one-hot when every ordered pair is an edge
  OverlapGraph both = make_graph(2, {{0, 1}, {1, 0}});
  const auto enc2 = encode_permutation_qubo(both, 1.0);
  EXPECT_DOUBLE_EQ(enc2.qubo.coefficient(0, 3), 0.0);
  EXPECT_DOUBLE_EQ(enc2.qubo.coefficient(1, 2), 0.0);
}

TEST(DecodePath, EdgeEncodingCases) {
  const auto g = make_graph(3, {{0, 1}, {0, 2}, {1, 2}});
  const auto enc = encode_edge_qubo(g, 1.0);
  const auto ok = decode_path(BinaryAssignment{1, 0, 1}, enc.context);
  EXPECT_TRUE(ok.valid);
  EXPECT_EQ(ok.order, (std::vector<std::size_t>{0, 1, 2}));

  const auto fork = decode_path(BinaryAssignment{1, 1, 0}, enc.context);
  EXPECT_FALSE(fork.valid);
  EXPECT_NE(fork.diagnostic.find("out-degree 2"), std::string::npos);

  const auto none = decode_path(BinaryAssignment{0, 0, 0}, enc.context);
  EXPECT_FALSE(none.valid);
  EXPECT_NE(none.diagnostic.find("no edges"), std::string::npos);

  EXPECT_THROW(decode_path(BinaryAssignment{1, 0}, enc.context), DimensionError);
}

TEST(DecodePath, PermutationCases) {
  const auto g = make_graph(2, {{0, 1}});
  const auto enc = encode_permutation_qubo(g, 1.0);
  // index v*2 + j
  EXPECT_TRUE(decode_path(BinaryAssignment{1, 0, 0, 1}, enc.context).valid);
  const auto wrong_way = decode_path(BinaryAssignment{0, 1, 1, 0}, enc.context);
  EXPECT_FALSE(wrong_way.valid);
  EXPECT_FALSE(decode_path(BinaryAssignment{1, 1, 0, 0}, enc.context).valid);
  EXPECT_FALSE(decode_path(BinaryAssignment{0, 0, 0, 0}, enc.context).valid);
  EXPECT_THROW(decode_path(BinaryAssignment{1}, enc.context), DimensionError);
}

TEST(Merge, Examples) {
  const ReadSet rs{{{"0", "ACGT"}, {"1", "GTAA"}}};
  const auto g = compute_overlaps(rs, 2);
  const auto enc = encode_edge_qubo(g, 1.0);
  const auto path = decode_path(BinaryAssignment{1}, enc.context);
  EXPECT_EQ(merge_sequence(path, rs, g), "ACGTAA");

  PathSolution single;
  single.valid = true;
  single.order = {1};
  EXPECT_EQ(merge_sequence(single, rs), "GTAA");

  PathSolution bad;
  EXPECT_THROW(merge_sequence(bad, rs), ConfigError);
}

TEST(SynthesizeReads, Counts) {
  const std::string genome = random_genome(600, 1);
  const auto reads = synthesize_reads(genome, 100, 50);
  ASSERT_EQ(reads.size(), 11U);
  for (std::size_t i = 0; i + 1 < reads.size(); ++i) {
    EXPECT_EQ(oracle::overlap(reads.reads[i].sequence, reads.reads[i + 1].sequence) >= 50, true);
    EXPECT_EQ(reads.reads[i].sequence.substr(50), reads.reads[i + 1].sequence.substr(0, 50));
  }
  const auto flush = synthesize_reads(genome, 100, 100);
  EXPECT_EQ(flush.size(), 6U);
  EXPECT_TRUE(compute_overlaps(flush, 20).edges.empty());

  auto shuffled = synthesize_reads(genome, 100, 50, 9, true);
  std::vector<std::string> a, b;
  for (auto& r : reads.reads) a.push_back(r.sequence);
  for (auto& r : shuffled.reads) b.push_back(r.sequence);
  EXPECT_NE(a, b);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);

  EXPECT_THROW(synthesize_reads(genome, 700, 50), ConfigError);
  EXPECT_THROW(synthesize_reads(genome, 100, 0), ConfigError);
  EXPECT_THROW(synthesize_reads(genome, 100, 101), ConfigError);
  // tail window appended when the stride does not tile the genome
  const auto tail = synthesize_reads(genome.substr(0, 130), 100, 20);
  EXPECT_EQ(tail.reads.back().sequence, genome.substr(30, 100));
}

// brute force -> decode -> merge, solver independent.
TEST(Pipeline, RoundTripReproducesGenome) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const std::string genome = random_genome(400, seed);
    const auto reads = synthesize_reads(genome, 80, 40, seed, true);
    const auto g = compute_overlaps(reads, 20);
    ASSERT_TRUE(g.acyclic);
    const auto enc = encode_edge_qubo(g, 1.0);
    const auto best = brute_force(enc.qubo);
    EXPECT_NEAR(best.objective, 2.0, 1e-12);
    const auto path = decode_path(best.assignment, enc.context);
    ASSERT_TRUE(path.valid) << path.diagnostic;
    EXPECT_EQ(path.order.size(), reads.size());
    EXPECT_EQ(merge_sequence(path, reads), genome);
  }
}
