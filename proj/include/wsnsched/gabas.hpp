#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "wsnsched/parallel.hpp"
#include "wsnsched/simulator.hpp"
#include "wsnsched/topology.hpp"
#include "wsnsched/workload.hpp"

namespace wsnsched {

struct GaParams {
  int population_size = 200;
  double tournament_fraction = 0.05;
  double uniform_rate = 0.5;
  double mutation_rate = 0.05;
  int stagnation_limit = 7;
  bool elitism = true;
  int threads = 1;  // fitness evaluation only; results do not depend on it

  void validate() const {
    if (population_size < 1) throw Error("population size must be at least 1");
    if (stagnation_limit < 1) throw Error("stagnation limit must be at least 1");
    auto prob = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0)) throw Error(std::string(name) + " must lie in [0, 1]");
    };
    prob(tournament_fraction, "tournament fraction");
    prob(uniform_rate, "uniform rate");
    prob(mutation_rate, "mutation rate");
  }
};

/// Admission order plus a (sensor, base) pair for every monitoring point.
/// Points nobody can serve carry kNone genes.
struct Chromosome {
  std::vector<AppId> app_genes;
  std::vector<SensorId> sensor_genes;
  std::vector<BaseId> bs_genes;
  friend bool operator==(const Chromosome&, const Chromosome&) = default;
};

struct GenerationStats {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
};

struct EvolutionResult {
  Chromosome best;
  double best_fitness = 0.0;
  int generations = 0;  // index of the last generation produced
  std::vector<GenerationStats> log;
};

namespace detail {

template <typename T>
T pick(std::span<const T> options, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, options.size() - 1);
  return options[d(rng)];
}

inline double coin(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline void draw_placement(const Topology& t, PointId k, Rng& rng, SensorId& s, BaseId& b) {
  s = pick(t.candidates(k), rng);
  b = pick(t.reach(s), rng);
}

}  // namespace detail

/// Checks the chromosome invariants against the application subset it orders.
inline bool is_valid(const Chromosome& c, const Topology& t, std::span<const AppId> apps) {
  std::vector<AppId> a(c.app_genes), b(apps.begin(), apps.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b || std::adjacent_find(a.begin(), a.end()) != a.end()) return false;
  if (c.sensor_genes.size() != t.point_count() || c.bs_genes.size() != t.point_count()) return false;
  for (std::size_t k = 0; k < t.point_count(); ++k) {
    const auto pk = static_cast<PointId>(k);
    const SensorId s = c.sensor_genes[k];
    if (t.candidates(pk).empty()) {
      if (s != kNone || c.bs_genes[k] != kNone) return false;
      continue;
    }
    const auto cand = t.candidates(pk);
    if (!std::binary_search(cand.begin(), cand.end(), s)) return false;
    if (t.link_id(s, c.bs_genes[k]) == kNone) return false;
  }
  return true;
}

/// Random individuals: shuffled admission order; per point a uniformly drawn
/// covering sensor, then a uniformly drawn base that sensor reaches.
inline std::vector<Chromosome> init_population(const Topology& topology, const Workload& workload,
                                               std::span<const AppId> apps, const GaParams& params,
                                               Rng& rng) {
  for (AppId j : apps) {
    for (const auto& r : workload[static_cast<std::size_t>(j)].requests) {
      if (topology.candidates(r.point).empty()) {
        throw Error("monitoring point " + std::to_string(r.point) + " requested by application " +
                    std::to_string(j) + " has no covering sensor that reaches a base");
      }
    }
  }
  std::vector<AppId> ids(apps.begin(), apps.end());
  std::sort(ids.begin(), ids.end());
  const std::size_t m = topology.point_count();
  std::vector<Chromosome> pop;
  pop.reserve(static_cast<std::size_t>(params.population_size));
  for (int i = 0; i < params.population_size; ++i) {
    Chromosome c;
    c.app_genes = ids;
    std::shuffle(c.app_genes.begin(), c.app_genes.end(), rng);
    c.sensor_genes.assign(m, kNone);
    c.bs_genes.assign(m, kNone);
    for (std::size_t k = 0; k < m; ++k) {
      if (topology.candidates(static_cast<PointId>(k)).empty()) continue;
      detail::draw_placement(topology, static_cast<PointId>(k), rng, c.sensor_genes[k], c.bs_genes[k]);
    }
    pop.push_back(std::move(c));
  }
  return pop;
}

inline std::vector<Chromosome> init_population(const Topology& topology, const Workload& workload,
                                               const GaParams& params, Rng& rng) {
  std::vector<AppId> ids;
  for (const auto& a : workload) ids.push_back(a.id);
  return init_population(topology, workload, ids, params, rng);
}

inline Schedule to_schedule(const Chromosome& c) {
  return {c.app_genes, FixedGenes{c.sensor_genes, c.bs_genes}};
}

/// -makespan of the chromosome's schedule, simulated from `base`.
inline double fitness(const Chromosome& c, const Simulation& base) {
  Simulation sim = base;
  return -static_cast<double>(sim.run(to_schedule(c)).makespan);
}

inline double fitness(const Chromosome& c, const Topology& topology, const Workload& workload,
                      SharingMode mode) {
  return fitness(c, Simulation(topology, workload, mode));
}

inline std::size_t tournament_size(std::size_t population, double fraction) {
  const double raw = std::ceil(fraction * static_cast<double>(population) - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(raw));
}

/// Index of the fittest of a with-replacement sample; an equal later entry
/// replaces the incumbent.
inline std::size_t tournament_select(std::span<const double> fitnesses, const GaParams& params,
                                     Rng& rng) {
  const std::size_t size = tournament_size(fitnesses.size(), params.tournament_fraction);
  std::uniform_int_distribution<std::size_t> d(0, fitnesses.size() - 1);
  std::size_t best = d(rng);
  for (std::size_t i = 1; i < size; ++i) {
    const std::size_t x = d(rng);
    if (fitnesses[best] <= fitnesses[x]) best = x;
  }
  return best;
}

/// Restores a permutation of `universe`: the second occurrence of every
/// duplicated id, scanning left to right, takes the smallest missing id.
inline void repair_app_genes(std::vector<AppId>& genes, std::span<const AppId> universe) {
  std::vector<AppId> sorted(universe.begin(), universe.end());
  std::sort(sorted.begin(), sorted.end());
  auto index = [&](AppId j) {
    return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), j) - sorted.begin());
  };
  std::vector<char> present(sorted.size(), 0);
  for (AppId j : genes) present[index(j)] = 1;
  std::vector<AppId> missing;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!present[i]) missing.push_back(sorted[i]);
  }
  std::vector<char> seen(sorted.size(), 0);
  std::size_t next = 0;
  for (AppId& j : genes) {
    const std::size_t i = index(j);
    if (seen[i]) {
      j = missing[next++];
      seen[index(j)] = 1;
    } else {
      seen[i] = 1;
    }
  }
}

/// Uniform crossover. Sensor and base genes of a point come from the same
/// parent, so the child inherits a valid pair.
inline Chromosome crossover(const Chromosome& p1, const Chromosome& p2, const GaParams& params, Rng& rng) {
  Chromosome child;
  child.app_genes.resize(p1.app_genes.size());
  for (std::size_t x = 0; x < p1.app_genes.size(); ++x) {
    child.app_genes[x] = detail::coin(rng) < params.uniform_rate ? p1.app_genes[x] : p2.app_genes[x];
  }
  repair_app_genes(child.app_genes, p1.app_genes);
  const std::size_t m = p1.sensor_genes.size();
  child.sensor_genes.resize(m);
  child.bs_genes.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const Chromosome& from = detail::coin(rng) < params.uniform_rate ? p1 : p2;
    child.sensor_genes[k] = from.sensor_genes[k];
    child.bs_genes[k] = from.bs_genes[k];
  }
  return child;
}

/// Swaps two admission positions with probability mutation_rate; redraws each
/// point's (sensor, base) pair with probability mutation_rate.
inline Chromosome mutate(Chromosome c, const Topology& topology, const GaParams& params, Rng& rng) {
  if (!c.app_genes.empty() && detail::coin(rng) < params.mutation_rate) {
    std::uniform_int_distribution<std::size_t> pos(0, c.app_genes.size() - 1);
    const std::size_t x = pos(rng);
    const std::size_t y = pos(rng);
    std::swap(c.app_genes[x], c.app_genes[y]);
  }
  for (std::size_t k = 0; k < c.sensor_genes.size(); ++k) {
    const auto pk = static_cast<PointId>(k);
    if (topology.candidates(pk).empty()) continue;
    if (detail::coin(rng) < params.mutation_rate) {
      detail::draw_placement(topology, pk, rng, c.sensor_genes[k], c.bs_genes[k]);
    }
  }
  return c;
}

namespace detail {

inline std::vector<double> evaluate(const std::vector<Chromosome>& pop, const Simulation& base, int threads) {
  std::vector<double> fit(pop.size());
  parallel_for(pop.size(), threads, [&](std::size_t i) { fit[i] = fitness(pop[i], base); });
  return fit;
}

inline std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

inline GenerationStats stats(int generation, const std::vector<double>& fit) {
  const double mean = fit.empty() ? 0.0 : std::accumulate(fit.begin(), fit.end(), 0.0) / static_cast<double>(fit.size());
  return {generation, fit.empty() ? 0.0 : fit[argmax(fit)], mean};
}

}  // namespace detail

/// Evolves an admission order and per-point genes for `apps`, with fitness
/// simulated from `base`. Stops once the best fitness has not strictly
/// improved for stagnation_limit generations.
inline EvolutionResult evolve_from(const Simulation& base, std::span<const AppId> apps, const GaParams& params,
                                   std::uint64_t seed) {
  params.validate();
  const Topology& topology = base.topology();
  Rng rng = make_rng(seed, 3);

  std::vector<Chromosome> pop = init_population(topology, base.workload(), apps, params, rng);
  std::vector<double> fit = detail::evaluate(pop, base, params.threads);

  EvolutionResult result;
  std::size_t best = detail::argmax(fit);
  result.best = pop[best];
  result.best_fitness = fit[best];
  result.log.push_back(detail::stats(0, fit));

  int generation = 0;
  int last_improved = 0;
  const std::size_t n = pop.size();
  while (generation - last_improved < params.stagnation_limit) {
    std::vector<std::size_t> mates(n);
    for (std::size_t i = 0; i < n; ++i) mates[i] = tournament_select(fit, params, rng);
    std::vector<std::uint64_t> seeds(n);
    for (auto& s : seeds) s = rng();

    std::vector<Chromosome> next(n);
    std::vector<double> next_fit(n);
    parallel_for(n, params.threads, [&](std::size_t i) {
      Rng local(seeds[i]);
      next[i] = mutate(crossover(pop[i], pop[mates[i]], params, local), topology, params, local);
      next_fit[i] = fitness(next[i], base);
    });

    if (params.elitism) {
      const std::size_t worst =
          static_cast<std::size_t>(std::min_element(next_fit.begin(), next_fit.end()) - next_fit.begin());
      const std::size_t elite = detail::argmax(fit);
      next[worst] = pop[elite];
      next_fit[worst] = fit[elite];
    }

    pop = std::move(next);
    fit = std::move(next_fit);
    ++generation;
    result.log.push_back(detail::stats(generation, fit));

    best = detail::argmax(fit);
    if (fit[best] > result.best_fitness) {
      result.best = pop[best];
      result.best_fitness = fit[best];
      last_improved = generation;
    }
  }
  result.generations = generation;
  return result;
}

/// GABAS over the whole workload from time 0. Permanently infeasible
/// applications are left out of the chromosome.
inline EvolutionResult evolve(const Topology& topology, const Workload& workload, SharingMode mode,
                              const GaParams& params, std::uint64_t seed) {
  Simulation base(topology, workload, mode);
  std::vector<AppId> apps;
  for (const auto& a : workload) {
    if (base.admissible(a.id)) apps.push_back(a.id);
  }
  return evolve_from(base, apps, params, seed);
}

/// Re-runs GABAS over the waiting applications at every arrival instant,
/// starting each fitness simulation from the current network state.
inline Planner gabas_planner(const GaParams& params, std::uint64_t seed,
                             std::shared_ptr<std::vector<EvolutionResult>> history = nullptr) {
  auto invocation = std::make_shared<std::uint64_t>(0);
  return [params, seed, history, invocation](const Simulation& sim, std::span<const AppId> waiting) {
    const Simulation base = sim.fork(waiting);
    EvolutionResult r = evolve_from(base, waiting, params, seed + (*invocation)++);
    Plan plan{r.best.app_genes, FixedGenes{r.best.sensor_genes, r.best.bs_genes}};
    if (history) history->push_back(std::move(r));
    return plan;
  };
}

inline void write_evolution_csv(std::ostream& os, const std::vector<GenerationStats>& log) {
  os << "generation,best_fitness,mean_fitness\n";
  char buf[128];
  for (const auto& g : log) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f\n", g.generation, g.best_fitness, g.mean_fitness);
    os << buf;
  }
}

}  // namespace wsnsched
