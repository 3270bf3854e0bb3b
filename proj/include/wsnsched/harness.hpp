#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wsnsched/gabas.hpp"
#include "wsnsched/greedy.hpp"
#include "wsnsched/parallel.hpp"
#include "wsnsched/simulator.hpp"
#include "wsnsched/topology.hpp"
#include "wsnsched/workload.hpp"

namespace wsnsched {

enum class Algorithm { GABAS, LMPF, LMSF, LTSF, FCFS, SJF };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::GABAS: return "gabas";
    case Algorithm::LMPF: return "lmpf";
    case Algorithm::LMSF: return "lmsf";
    case Algorithm::LTSF: return "ltsf";
    case Algorithm::FCFS: return "fcfs";
    case Algorithm::SJF: return "sjf";
  }
  return "?";
}

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::GABAS, Algorithm::LMPF, Algorithm::LMSF,
                                               Algorithm::LTSF,  Algorithm::FCFS, Algorithm::SJF};

inline Algorithm parse_algorithm(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto a : kAllAlgorithms) {
    if (lower == to_string(a)) return a;
  }
  throw ParseError("unknown algorithm '" + std::string(name) + "'");
}

inline SharingMode parse_mode(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return sharing_mode_from_string(lower);
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(s)};
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::optional<OrderingPolicy> ordering_of(Algorithm a) {
  switch (a) {
    case Algorithm::GABAS: return std::nullopt;
    case Algorithm::LMPF: return OrderingPolicy::LMPF;
    case Algorithm::LMSF: return OrderingPolicy::LMSF;
    case Algorithm::LTSF: return OrderingPolicy::LTSF;
    case Algorithm::FCFS: return OrderingPolicy::FCFS;
    case Algorithm::SJF: return OrderingPolicy::SJF;
  }
  return std::nullopt;
}

struct ExperimentConfig {
  int scenario = 0;               // 1..6, or 0 for an explicit grid
  std::string parameter = "none";  // swept parameter of an explicit grid
  std::vector<double> values{0.0};
  TopologyParams topology;
  WorkloadParams workload;
  std::vector<Algorithm> algorithms{std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
  std::vector<SharingMode> modes{SharingMode::Shared, SharingMode::Unshared};
  int runs = 100;
  std::uint64_t base_seed = 0;
  GaParams ga;
  int jobs = 1;  // runs executed concurrently; output order is unaffected

  void validate() const {
    if (runs < 1) throw Error("runs must be at least 1");
    if (algorithms.empty()) throw Error("at least one algorithm is required");
    if (modes.empty()) throw Error("at least one mode is required");
    if (values.empty()) throw Error("at least one swept value is required");
    if (jobs < 1) throw Error("jobs must be at least 1");
    if (scenario < 0 || scenario > 6) throw Error("unknown scenario " + std::to_string(scenario));
    ga.validate();
  }
};

/// Scenario id whose sweep varies `parameter`, or 0 for "none".
inline int scenario_for_parameter(std::string_view parameter) {
  if (parameter == "none") return 0;
  for (int id = 1; id <= 6; ++id) {
    if (scenario_sweep(id).swept_parameter == parameter) return id;
  }
  throw ParseError("unknown swept parameter '" + std::string(parameter) + "'");
}

/// Full-size defaults: 1000 applications, 300 points, 250 sensors, 30 bases,
/// 100 runs.
inline ExperimentConfig full_preset() { return {}; }

/// 200 applications, 100 sensors, 15 bases, 100 points, 20 runs.
inline ExperimentConfig desk_preset() {
  ExperimentConfig c;
  c.topology.points = 100;
  c.topology.sensors = 100;
  c.topology.bases = 15;
  c.workload.applications = 200;
  c.runs = 20;
  return c;
}

inline ExperimentConfig preset(std::string_view name) {
  if (name == "full") return full_preset();
  if (name == "desk") return desk_preset();
  throw ParseError("unknown preset '" + std::string(name) + "'");
}

/// Uses the sweep of a scenario, keeping the other settings.
inline void use_scenario(ExperimentConfig& c, int scenario) {
  const ScenarioConfig sc = scenario_sweep(scenario);
  c.scenario = scenario;
  c.parameter = sc.swept_parameter;
  c.values = sc.values;
}

struct ResultRow {
  bool aggregate = false;
  int scenario = 0;
  std::string parameter;
  double value = 0.0;
  Algorithm algorithm = Algorithm::GABAS;
  SharingMode mode = SharingMode::Shared;
  int run = 0;  // aggregate rows: number of runs averaged
  std::uint64_t seed = 0;
  double makespan = 0.0;
  double avg_waiting = 0.0;
  double avg_turnaround = 0.0;
  double success_rate = 0.0;
  double rejected = 0.0;
  double wall_ms = 0.0;
};

struct AlgorithmRun {
  RunMetrics metrics;
  double wall_ms = 0.0;
};

/// One algorithm on one instance. GABAS draws its randomness from `seed`.
inline AlgorithmRun run_algorithm(const Topology& topology, const Workload& workload, Algorithm algorithm,
                                  SharingMode mode, const GaParams& ga, std::uint64_t seed,
                                  Trace* trace = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  Simulation sim(topology, workload, mode, SimOptions{trace != nullptr});
  AlgorithmRun out;
  if (const auto policy = ordering_of(algorithm)) {
    out.metrics = sim.run(greedy_planner(*policy));
  } else {
    out.metrics = sim.run(gabas_planner(ga, seed));
  }
  out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (trace) *trace = sim.trace();
  return out;
}

inline std::pair<TopologyParams, WorkloadParams> parameters_at(const ExperimentConfig& c, double value) {
  TopologyParams topo = c.topology;
  WorkloadParams work = c.workload;
  const int id = c.scenario ? c.scenario : scenario_for_parameter(c.parameter);
  if (id) apply_sweep_value(scenario_sweep(id), value, topo, work);
  return {topo, work};
}

/// Per-run rows ordered by (value, run, algorithm, mode), each value followed
/// by its mean rows in (algorithm, mode) order.
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& c) {
  c.validate();
  const int scenario = c.scenario;
  std::vector<ResultRow> rows;
  for (double value : c.values) {
    const auto [topo_params, work_params] = parameters_at(c, value);
    const std::size_t per_run = c.algorithms.size() * c.modes.size();
    std::vector<ResultRow> block(static_cast<std::size_t>(c.runs) * per_run);
    parallel_for(static_cast<std::size_t>(c.runs), c.jobs, [&](std::size_t r) {
      const std::uint64_t seed = c.base_seed + r;
      const Topology topology = generate_topology(topo_params, seed);
      const Workload workload = generate_workload(topology, work_params, seed);
      std::size_t slot = r * per_run;
      for (Algorithm a : c.algorithms) {
        for (SharingMode m : c.modes) {
          const AlgorithmRun res = run_algorithm(topology, workload, a, m, c.ga, seed);
          ResultRow& row = block[slot++];
          row.scenario = scenario;
          row.parameter = c.parameter;
          row.value = value;
          row.algorithm = a;
          row.mode = m;
          row.run = static_cast<int>(r);
          row.seed = seed;
          row.makespan = static_cast<double>(res.metrics.makespan);
          row.avg_waiting = res.metrics.avg_waiting;
          row.avg_turnaround = res.metrics.avg_turnaround;
          row.success_rate = res.metrics.success_rate;
          row.rejected = static_cast<double>(res.metrics.rejected.size());
          row.wall_ms = res.wall_ms;
        }
      }
    });
    rows.insert(rows.end(), block.begin(), block.end());
    for (std::size_t i = 0; i < per_run; ++i) {
      ResultRow mean = block[i];
      mean.aggregate = true;
      mean.run = c.runs;
      mean.seed = c.base_seed;
      mean.makespan = mean.avg_waiting = mean.avg_turnaround = mean.success_rate = mean.rejected = 0.0;
      mean.wall_ms = 0.0;
      for (int r = 0; r < c.runs; ++r) {
        const ResultRow& x = block[static_cast<std::size_t>(r) * per_run + i];
        mean.makespan += x.makespan;
        mean.avg_waiting += x.avg_waiting;
        mean.avg_turnaround += x.avg_turnaround;
        mean.success_rate += x.success_rate;
        mean.rejected += x.rejected;
        mean.wall_ms += x.wall_ms;
      }
      const double n = static_cast<double>(c.runs);
      mean.makespan /= n;
      mean.avg_waiting /= n;
      mean.avg_turnaround /= n;
      mean.success_rate /= n;
      mean.rejected /= n;
      mean.wall_ms /= n;
      rows.push_back(mean);
    }
  }
  return rows;
}

inline constexpr const char* kResultHeader =
    "kind,scenario,parameter,value,algorithm,mode,run,seed,makespan,avg_waiting,avg_turnaround,"
    "success_rate,rejected";

namespace detail {

inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

inline std::string row_prefix(const ResultRow& r) {
  std::string s = r.aggregate ? "mean" : "run";
  s += ',' + std::to_string(r.scenario) + ',' + r.parameter + ',' + format_number(r.value) + ',' +
       to_string(r.algorithm) + ',' + to_string(r.mode) + ',' + std::to_string(r.run) + ',' +
       std::to_string(r.seed);
  return s;
}

}  // namespace detail

/// Results without timings, so identical configurations give identical bytes.
/// Aggregate rows carry the run count in the run column and the base seed.
inline void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kResultHeader << '\n';
  for (const auto& r : rows) {
    os << detail::row_prefix(r) << ',' << detail::format_number(r.makespan) << ','
       << detail::format_number(r.avg_waiting) << ',' << detail::format_number(r.avg_turnaround) << ','
       << detail::format_number(r.success_rate) << ',' << detail::format_number(r.rejected) << '\n';
  }
}

inline void write_timing_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "kind,scenario,parameter,value,algorithm,mode,run,seed,wall_ms\n";
  for (const auto& r : rows) os << detail::row_prefix(r) << ',' << detail::format_number(r.wall_ms) << '\n';
}

/// Directory named by WSNSCHED_OUT_DIR, if set and non-empty.
inline std::optional<std::string> default_output_dir() {
  const char* dir = std::getenv("WSNSCHED_OUT_DIR");
  if (!dir || !*dir) return std::nullopt;
  return std::string(dir);
}

}  // namespace wsnsched
