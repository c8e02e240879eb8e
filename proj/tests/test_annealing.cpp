#include <gtest/gtest.h>

#include "hadof/annealing.hpp"
#include "oracles.hpp"

using namespace hadof;

TEST(SimulatedAnnealing, MatchesBruteForceOnSmallInstances) {
  std::size_t hits = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const QuboProblem q = random_qubo(12, -10, 10, seed);
    SaConfig c;
    c.seed = seed;
    if (std::abs(simulated_annealing(q, c).best_objective - oracle::enumerate(q).value) < 1e-9) ++hits;
  }
  EXPECT_GE(hits, 4U);
}

TEST(SimulatedAnnealing, SeparableDiagonal) {
  QuboProblem q(8);
  for (std::size_t i = 0; i < 8; ++i) q.add(i, i, -1.0);
  const auto r = simulated_annealing(q, SaConfig{100, 5, 0, 0, 1});
  EXPECT_EQ(r.best_assignment, BinaryAssignment(8, 1));
  EXPECT_DOUBLE_EQ(r.best_objective, -8.0);
}

TEST(SimulatedAnnealing, SeedReproducible) {
  const QuboProblem q = random_qubo(30, -10, 10, 3);
  SaConfig c{200, 10, 0, 0, 42};
  const auto a = simulated_annealing(q, c);
  const auto b = simulated_annealing(q, c);
  EXPECT_EQ(a.best_assignment, b.best_assignment);
  EXPECT_EQ(a.read_objectives, b.read_objectives);
}

TEST(SimulatedAnnealing, BestNonIncreasingInReads) {
  const QuboProblem q = random_qubo(40, -10, 10, 4);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t reads : {1U, 2U, 5U, 20U}) {
    const double best = simulated_annealing(q, SaConfig{50, reads, 0, 0, 9}).best_objective;
    EXPECT_LE(best, previous);
    previous = best;
  }
}

TEST(SimulatedAnnealing, GreedyLimitOnlyImproves) {
  const QuboProblem q = random_qubo(25, -10, 10, 5);
  SaConfig c{50, 5, 1e9, 1e9, 3};
  std::size_t flips = 0;
  simulated_annealing(q, c, [&](std::size_t, double delta) {
    ++flips;
    EXPECT_LE(delta, 0.0);
  });
  EXPECT_GT(flips, 0U);
}

TEST(SimulatedAnnealing, ObserverDeltasMatchObjectiveChanges) {
  const QuboProblem q = random_qubo(10, -10, 10, 6);
  const FlipModel model(q);
  const auto betas = geometric_betas(0.1, 3.0, 20);
  Rng probe(17);
  BinaryAssignment x(10);
  for (auto& b : x) b = static_cast<Bit>(probe() >> 63);
  Rng rng(17);
  const auto final = anneal_once(model, betas, rng, [&](std::size_t i, double delta) {
    const double before = evaluate(q, x);
    x[i] ^= 1U;
    EXPECT_NEAR(evaluate(q, x) - before, delta, 1e-9);
  });
  EXPECT_EQ(final, x);
}

TEST(SimulatedAnnealing, ConfigErrors) {
  const QuboProblem q = random_qubo(5, -1, 1, 0);
  EXPECT_THROW(simulated_annealing(q, SaConfig{0, 1}), ConfigError);
  EXPECT_THROW(simulated_annealing(q, SaConfig{1, 0}), ConfigError);
  EXPECT_THROW(simulated_annealing(q, SaConfig{10, 1, 2.0, 1.0}), ConfigError);
}

TEST(BetaSchedule, DefaultsAndGeometric) {
  QuboProblem q(2);
  q.add(0, 0, -2);
  q.add(0, 1, 4);
  const auto [b0, b1] = default_beta_range(FlipModel(q));
  EXPECT_NEAR(b0, std::log(2.0) / 6.0, 1e-12);
  EXPECT_NEAR(b1, std::log(1000.0) / 2.0, 1e-12);
  const auto betas = geometric_betas(0.1, 10.0, 3);
  EXPECT_NEAR(betas[0], 0.1, 1e-12);
  EXPECT_NEAR(betas[1], 1.0, 1e-12);
  EXPECT_NEAR(betas[2], 10.0, 1e-12);
}

TEST(ReferenceObjective, CachedAndExact) {
  const QuboProblem q = random_qubo(12, -10, 10, 1);
  SaConfig c;
  c.seed = 5;
  ReferenceCache cache;
  const double a = cache.get(q, c);
  const double b = cache.get(q, c);
  EXPECT_EQ(a, b);
  EXPECT_EQ(cache.size(), 1U);
  EXPECT_EQ(reference_objective(q, c), a);
  EXPECT_NEAR(a, oracle::enumerate(q).value, 1e-9);
}
