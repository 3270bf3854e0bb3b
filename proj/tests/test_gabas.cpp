#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "support.hpp"

using namespace wsnsched;
using namespace wsnsched::testing;

namespace {

GaParams small_params(int population = 40) {
  GaParams p;
  p.population_size = population;
  return p;
}

std::vector<AppId> ids_of(const Workload& w) {
  std::vector<AppId> ids;
  for (const auto& a : w) ids.push_back(a.id);
  return ids;
}

}  // namespace

TEST(InitPopulation, ShufflesUniformly) {
  const Topology t = build({100, 100}, units(100, 100, 1000), {{0, 0}}, {{{0, 5}, 20, 40}}, {{{10, 10}}});
  const Workload w{app(0, {{0, 1}}, 1), app(1, {{0, 1}}, 1), app(2, {{0, 1}}, 1)};
  GaParams p;
  p.population_size = 6000;
  Rng rng = make_rng(1, 3);
  const auto pop = init_population(t, w, p, rng);
  ASSERT_EQ(pop.size(), 6000u);
  std::map<std::vector<AppId>, int> counts;
  for (const auto& c : pop) ++counts[c.app_genes];
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [perm, n] : counts) {
    EXPECT_GT(n, 850);
    EXPECT_LT(n, 1150);
  }
}

TEST(InitPopulation, ForcedGenesForSingletonSupport) {
  const Topology t = build({100, 100}, units(100, 100, 1000), {{0, 0}, {60, 60}},
                           {{{0, 5}, 20, 20}, {{60, 65}, 20, 30}, {{55, 60}, 20, 30}}, {{{10, 10}}, {{60, 40}}});
  const Workload w{app(0, {{0, 1}}, 1), app(1, {{1, 1}}, 1)};
  Rng rng = make_rng(2, 3);
  const auto pop = init_population(t, w, small_params(200), rng);
  std::set<std::pair<SensorId, BaseId>> seen;
  for (const auto& c : pop) {
    EXPECT_EQ(c.sensor_genes[0], 0);
    EXPECT_EQ(c.bs_genes[0], 0);
    seen.insert({c.sensor_genes[1], c.bs_genes[1]});
    EXPECT_TRUE(is_valid(c, t, ids_of(w)));
  }
  EXPECT_EQ(seen.size(), 2u);
}

TEST(InitPopulation, DefaultSize) {
  const auto in = two_app_instance();
  Rng rng = make_rng(0, 3);
  EXPECT_EQ(init_population(in.topology, in.workload, GaParams{}, rng).size(), 200u);
}

TEST(InitPopulation, UnservablePointNamesIt) {
  const Topology t = build({100, 100}, Capacities{}, {{0, 0}, {90, 90}}, {{{0, 5}, 20, 40}, {{90, 80}, 20, 40}},
                           {{{10, 10}}});
  const Workload w{app(0, {{1, 1}}, 1)};
  Rng rng = make_rng(0, 3);
  try {
    init_population(t, w, GaParams{}, rng);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("point 1"), std::string::npos);
  }
}

TEST(Fitness, NegatedMakespan) {
  const auto in = two_app_instance();
  Chromosome c{{0, 1}, {0}, {0}};
  EXPECT_EQ(fitness(c, in.topology, in.workload, SharingMode::Unshared), -15.0);
  EXPECT_EQ(fitness(c, in.topology, in.workload, SharingMode::Shared), -10.0);
  const Workload none;
  EXPECT_EQ(fitness(Chromosome{{}, {0}, {0}}, in.topology, none, SharingMode::Shared), 0.0);
}

TEST(Fitness, MatchesSimulatorExactly) {
  const auto [t, w] = desk_instance(1);
  Rng rng = make_rng(1, 3);
  const auto pop = init_population(t, w, small_params(5), rng);
  for (const auto& c : pop) {
    Simulation sim(t, w, SharingMode::Unshared);
    EXPECT_EQ(fitness(c, t, w, SharingMode::Unshared), -static_cast<double>(sim.run(to_schedule(c)).makespan));
  }
}

TEST(Tournament, SizeIsCeilOfFraction) {
  EXPECT_EQ(tournament_size(200, 0.05), 10u);
  EXPECT_EQ(tournament_size(1, 0.05), 1u);
  EXPECT_EQ(tournament_size(30, 0.05), 2u);
}

TEST(Tournament, SingleIndividual) {
  const std::vector<double> fit{-5.0};
  Rng rng = make_rng(0, 3);
  EXPECT_EQ(tournament_select(fit, GaParams{}, rng), 0u);
}

TEST(Tournament, PicksFitter) {
  const std::vector<double> fit{-120.0, -90.0};
  GaParams p;
  p.tournament_fraction = 1.0;
  int fitter = 0;
  for (int i = 0; i < 200; ++i) {
    Rng rng = make_rng(static_cast<std::uint64_t>(i), 3);
    fitter += tournament_select(fit, p, rng) == 1 ? 1 : 0;
  }
  // Loses only when both draws hit the weaker one.
  EXPECT_GT(fitter, 120);
  const std::vector<double> same{-90.0, -90.0};
  Rng rng = make_rng(0, 3);
  EXPECT_LT(tournament_select(same, p, rng), 2u);
}

TEST(Repair, DuplicateTakesSmallestMissing) {
  const std::vector<AppId> universe{0, 1, 2, 3};
  std::vector<AppId> g{2, 1, 2, 3};
  repair_app_genes(g, universe);
  EXPECT_EQ(g, (std::vector<AppId>{2, 1, 0, 3}));
  std::vector<AppId> h{1, 1, 0, 0};
  repair_app_genes(h, universe);
  EXPECT_EQ(h, (std::vector<AppId>{1, 2, 0, 3}));
}

TEST(Repair, AlwaysYieldsPermutation) {
  Rng rng = make_rng(5, 3);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    std::vector<AppId> universe;
    for (int i = 0; i < n; ++i) universe.push_back(3 * i + 1);
    std::vector<AppId> g(universe.size());
    for (auto& x : g) x = universe[std::uniform_int_distribution<std::size_t>(0, universe.size() - 1)(rng)];
    repair_app_genes(g, universe);
    std::sort(g.begin(), g.end());
    ASSERT_EQ(g, universe);
  }
}

TEST(Crossover, IdenticalParents) {
  const auto [t, w] = desk_instance(0);
  Rng rng = make_rng(0, 3);
  const auto pop = init_population(t, w, small_params(1), rng);
  EXPECT_EQ(crossover(pop[0], pop[0], GaParams{}, rng), pop[0]);
}

TEST(Crossover, OffspringAreValid) {
  const auto [t, w] = desk_instance(0);
  const auto ids = ids_of(w);
  Rng rng = make_rng(1, 3);
  const auto pop = init_population(t, w, small_params(20), rng);
  for (std::size_t i = 0; i + 1 < pop.size(); ++i) {
    const Chromosome child = crossover(pop[i], pop[i + 1], GaParams{}, rng);
    ASSERT_TRUE(is_valid(child, t, ids));
    ASSERT_TRUE(is_valid(mutate(child, t, GaParams{}, rng), t, ids));
  }
}

TEST(Mutate, RateZeroIsNoOp) {
  const auto [t, w] = desk_instance(0);
  Rng rng = make_rng(2, 3);
  const auto pop = init_population(t, w, small_params(10), rng);
  GaParams p;
  p.mutation_rate = 0.0;
  for (const auto& c : pop) EXPECT_EQ(mutate(c, t, p, rng), c);
}

TEST(Mutate, RateOneKeepsSingletonSupport) {
  const Topology t = build({100, 100}, units(100, 100, 1000), {{0, 0}}, {{{0, 5}, 20, 20}}, {{{10, 10}}});
  GaParams p;
  p.mutation_rate = 1.0;
  Rng rng = make_rng(0, 3);
  const Chromosome c{{0}, {0}, {0}};
  for (int i = 0; i < 20; ++i) EXPECT_EQ(mutate(c, t, p, rng), c);
}

TEST(Mutate, SwapExchangesTwoPositions) {
  std::vector<AppId> genes{0, 1, 2};
  std::swap(genes[0], genes[2]);
  EXPECT_EQ(genes, (std::vector<AppId>{2, 1, 0}));
  // With mutation certain, the admission genes stay a permutation differing
  // in at most two positions.
  const Topology t = build({100, 100}, units(100, 100, 1000), {{0, 0}}, {{{0, 5}, 20, 20}}, {{{10, 10}}});
  GaParams p;
  p.mutation_rate = 1.0;
  Rng rng = make_rng(4, 3);
  const Chromosome c{{0, 1, 2, 3, 4}, {0}, {0}};
  for (int i = 0; i < 50; ++i) {
    const Chromosome m = mutate(c, t, p, rng);
    int moved = 0;
    for (std::size_t x = 0; x < 5; ++x) moved += m.app_genes[x] != c.app_genes[x] ? 1 : 0;
    EXPECT_TRUE(moved == 0 || moved == 2);
  }
}

TEST(Evolve, SingleFeasibleSolution) {
  const Topology t = build({100, 100}, units(100, 100, 1000), {{0, 0}}, {{{0, 5}, 20, 20}}, {{{10, 10}}});
  const Workload w{app(0, {{0, 10}}, 42)};
  const EvolutionResult r = evolve(t, w, SharingMode::Shared, small_params(), 1);
  EXPECT_EQ(r.best_fitness, -42.0);
  EXPECT_EQ(r.log.front().best_fitness, -42.0);
  EXPECT_EQ(r.generations, 7);
}

TEST(Evolve, StopsSevenGenerationsAfterLastImprovement) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto [t, w] = desk_instance(seed);
    const EvolutionResult r = evolve(t, w, SharingMode::Shared, small_params(), seed);
    int plateau = 0;
    for (std::size_t g = 1; g < r.log.size(); ++g) {
      if (r.log[g].best_fitness > r.log[plateau].best_fitness) plateau = static_cast<int>(g);
    }
    EXPECT_EQ(r.generations, plateau + 7);
    EXPECT_EQ(static_cast<int>(r.log.size()), r.generations + 1);
  }
}

TEST(Evolve, ElitismKeepsBestNondecreasing) {
  const auto [t, w] = desk_instance(2);
  const EvolutionResult r = evolve(t, w, SharingMode::Unshared, small_params(), 3);
  for (std::size_t g = 1; g < r.log.size(); ++g) EXPECT_GE(r.log[g].best_fitness, r.log[g - 1].best_fitness);
  EXPECT_EQ(r.best_fitness, r.log.back().best_fitness);
  EXPECT_EQ(fitness(r.best, t, w, SharingMode::Unshared), r.best_fitness);
}

TEST(Evolve, SeedDeterminismAcrossThreads) {
  const auto [t, w] = desk_instance(3);
  GaParams one = small_params();
  GaParams four = small_params();
  four.threads = 4;
  const EvolutionResult a = evolve(t, w, SharingMode::Shared, one, 9);
  const EvolutionResult b = evolve(t, w, SharingMode::Shared, four, 9);
  EXPECT_EQ(a.best, b.best);
  std::ostringstream la, lb;
  write_evolution_csv(la, a.log);
  write_evolution_csv(lb, b.log);
  EXPECT_EQ(la.str(), lb.str());
}

TEST(Evolve, MatchesBruteForceOnTinyInstances) {
  int matched = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto in = tiny_instance(seed, 5);
    const Time opt = brute_force_optimal(in.topology, in.workload, SharingMode::Shared);
    const EvolutionResult r = evolve(in.topology, in.workload, SharingMode::Shared, GaParams{}, seed);
    EXPECT_GE(-r.best_fitness, static_cast<double>(opt));
    matched += -r.best_fitness == static_cast<double>(opt) ? 1 : 0;
  }
  EXPECT_GE(matched, 7);
}

TEST(Evolve, InvalidParamsRejected) {
  const auto in = two_app_instance();
  GaParams p;
  p.mutation_rate = 1.5;
  EXPECT_THROW(evolve(in.topology, in.workload, SharingMode::Shared, p, 0), Error);
  p = GaParams{};
  p.population_size = 0;
  EXPECT_THROW(evolve(in.topology, in.workload, SharingMode::Shared, p, 0), Error);
}

TEST(GabasPlanner, RunsAreAudited) {
  const auto [t, w] = desk_instance(7);
  for (auto mode : {SharingMode::Shared, SharingMode::Unshared}) {
    Simulation sim(t, w, mode, SimOptions{true});
    auto history = std::make_shared<std::vector<EvolutionResult>>();
    const RunMetrics m = sim.run(gabas_planner(small_params(), 7, history));
    EXPECT_TRUE(audit(t, sim.trace()));
    EXPECT_GT(m.makespan, 0);
    EXPECT_FALSE(history->empty());
  }
}
