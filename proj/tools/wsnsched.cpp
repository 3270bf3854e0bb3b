// wsnsched command line: instance generation, single runs, sweeps, exact
// solves and trace audits.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wsnsched/wsnsched.hpp"

namespace {

using namespace wsnsched;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// Empty path: stdout. Relative paths land in WSNSCHED_OUT_DIR when it is set.
std::string resolve_out(const std::string& path) {
  if (path.empty() || path == "-") return {};
  std::filesystem::path p(path);
  if (p.is_relative()) {
    if (const auto dir = default_output_dir()) p = std::filesystem::path(*dir) / p;
  }
  return p.string();
}

void emit(const std::string& path, const std::string& text) {
  const std::string out = resolve_out(path);
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error("cannot write " + out);
  f << text;
  if (!f) throw Error("write failed: " + out);
}

std::vector<std::int64_t> parse_numbers(const std::string& s) {
  std::vector<std::int64_t> out;
  for (const auto& item : split_list(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not an integer: '" + item + "'");
    }
  }
  return out;
}

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not a number: '" + item + "'");
    }
  }
  return out;
}

json metrics_json(const RunMetrics& m) {
  json j{{"makespan", m.makespan},
         {"avg_waiting", m.avg_waiting},
         {"avg_turnaround", m.avg_turnaround},
         {"success_rate", m.success_rate},
         {"rejected", m.rejected}};
  auto& apps = j["applications"] = json::array();
  for (const auto& r : m.per_app) {
    apps.push_back({{"id", r.id},
                    {"arrival", r.arrival},
                    {"admitted", r.admitted},
                    {"finish", r.finish},
                    {"met_deadline", r.met_deadline},
                    {"rejected", r.rejected}});
  }
  return j;
}

struct InstanceFlags {
  std::string preset = "full";
  std::optional<int> points, sensors, bases, apps, batches;
  std::optional<int> points_min, points_max;
  std::optional<std::int64_t> batch_interval;

  void add_topology(CLI::App* cmd) {
    cmd->add_option("--points", points, "Monitoring points")->check(CLI::PositiveNumber);
    cmd->add_option("--sensors", sensors, "Sensor nodes")->check(CLI::PositiveNumber);
    cmd->add_option("--bases", bases, "Base stations")->check(CLI::PositiveNumber);
  }
  void add_workload(CLI::App* cmd) {
    cmd->add_option("--apps", apps, "Applications")->check(CLI::NonNegativeNumber);
    cmd->add_option("--batches", batches, "Arrival batches")->check(CLI::PositiveNumber);
    cmd->add_option("--points-min", points_min, "Fewest points per application")->check(CLI::PositiveNumber);
    cmd->add_option("--points-max", points_max, "Most points per application")->check(CLI::PositiveNumber);
    cmd->add_option("--batch-interval", batch_interval, "Seconds between batch arrivals")
        ->check(CLI::NonNegativeNumber);
  }
  void apply(ExperimentConfig& c) const {
    if (points) c.topology.points = *points;
    if (sensors) c.topology.sensors = *sensors;
    if (bases) c.topology.bases = *bases;
    if (apps) c.workload.applications = *apps;
    if (batches) c.workload.batches = *batches;
    if (points_min) c.workload.points_min = *points_min;
    if (points_max) c.workload.points_max = *points_max;
    if (batch_interval) c.workload.batch_interval = *batch_interval;
  }
  ExperimentConfig config() const {
    ExperimentConfig c = wsnsched::preset(preset);
    apply(c);
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Application scheduling for multi-purpose wireless sensor networks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value configuration file; flags override it");

  InstanceFlags inst;
  std::uint64_t seed = 0;
  std::string out;

  // gen-topology
  auto* gen_topo = app.add_subcommand("gen-topology", "Generate a random topology as JSON");
  gen_topo->add_option("--seed", seed, "Random seed")->required();
  gen_topo->add_option("--preset", inst.preset, "full or desk")->check(CLI::IsMember({"full", "desk"}));
  inst.add_topology(gen_topo);
  gen_topo->add_option("--out", out, "Output file (default stdout)");

  // gen-workload
  std::string topology_path;
  auto* gen_work = app.add_subcommand("gen-workload", "Generate a random workload for a topology");
  gen_work->add_option("--seed", seed, "Random seed")->required();
  gen_work->add_option("--topology", topology_path, "Topology JSON")->required()->check(CLI::ExistingFile);
  gen_work->add_option("--preset", inst.preset, "full or desk")->check(CLI::IsMember({"full", "desk"}));
  inst.add_workload(gen_work);
  gen_work->add_option("--out", out, "Output file (default stdout)");

  // simulate
  std::string workload_path, algorithm_name = "gabas", mode_name = "shared", trace_path;
  auto* simulate = app.add_subcommand("simulate", "Run one algorithm on one instance");
  simulate->add_option("--seed", seed, "Random seed")->required();
  auto* sim_topo = simulate->add_option("--topology", topology_path, "Topology JSON")->check(CLI::ExistingFile);
  auto* sim_work = simulate->add_option("--workload", workload_path, "Workload JSON")->check(CLI::ExistingFile);
  auto* sim_preset = simulate->add_option("--preset", inst.preset, "Generate the instance from a preset")
                         ->check(CLI::IsMember({"full", "desk"}));
  sim_topo->needs(sim_work);
  sim_work->needs(sim_topo);
  sim_preset->excludes(sim_topo);
  sim_preset->excludes(sim_work);
  simulate->add_option("--algorithm", algorithm_name, "gabas, lmpf, lmsf, ltsf, fcfs or sjf");
  simulate->add_option("--mode", mode_name, "shared or unshared");
  simulate->add_option("--trace", trace_path, "Write the event trace (JSON lines)");
  simulate->add_option("--out", out, "Metrics JSON output (default stdout)");

  // experiment
  std::optional<int> scenario;
  std::string parameter, values, algorithms = "gabas,lmpf,lmsf,ltsf,fcfs,sjf", modes = "shared,unshared";
  std::optional<int> runs;
  int jobs = 1;
  std::string timing_path;
  auto* experiment = app.add_subcommand("experiment", "Run a parameter sweep and write CSV");
  experiment->add_option("--seed", seed, "Base seed; run r uses seed + r")->required();
  auto* exp_scenario = experiment->add_option("--scenario", scenario, "Scenario 1-6")->check(CLI::Range(1, 6));
  auto* exp_param = experiment->add_option("--parameter", parameter,
                                           "Swept parameter for an explicit grid")
                        ->check(CLI::IsMember({"applications", "points", "points_per_app", "comm_range",
                                               "sensing_range", "batches"}));
  auto* exp_values = experiment->add_option("--values", values, "Comma-separated grid values");
  exp_param->needs(exp_values);
  exp_values->needs(exp_param);
  exp_scenario->excludes(exp_param);
  exp_scenario->excludes(exp_values);
  experiment->add_option("--preset", inst.preset, "full or desk")->check(CLI::IsMember({"full", "desk"}));
  inst.add_topology(experiment);
  inst.add_workload(experiment);
  experiment->add_option("--algorithms", algorithms, "Comma-separated algorithms");
  experiment->add_option("--modes", modes, "Comma-separated sharing modes");
  experiment->add_option("--runs", runs, "Runs per swept value")->check(CLI::PositiveNumber);
  experiment->add_option("--jobs", jobs, "Runs executed concurrently")->check(CLI::PositiveNumber);
  experiment->add_option("--out", out, "Results CSV (default stdout)");
  experiment->add_option("--timing-out", timing_path, "Wall-clock CSV");

  // oracle
  std::string mnp;
  int k = 0;
  bool no_prune = false;
  auto* oracle = app.add_subcommand("oracle", "Exact minimum makespan of a small instance");
  auto* or_mnp = oracle->add_option("--mnp", mnp, "Comma-separated positive integers");
  auto* or_k = oracle->add_option("--k", k, "Number of partitions")->check(CLI::PositiveNumber);
  auto* or_topo = oracle->add_option("--topology", topology_path, "Topology JSON")->check(CLI::ExistingFile);
  auto* or_work = oracle->add_option("--workload", workload_path, "Workload JSON")->check(CLI::ExistingFile);
  oracle->add_option("--mode", mode_name, "shared or unshared");
  oracle->add_flag("--no-prune", no_prune, "Enumerate every schedule without pruning");
  or_mnp->needs(or_k);
  or_k->needs(or_mnp);
  or_topo->needs(or_work);
  or_work->needs(or_topo);
  or_mnp->excludes(or_topo);
  or_mnp->excludes(or_work);

  // audit
  auto* audit_cmd = app.add_subcommand("audit", "Check a trace against the capacity constraints");
  audit_cmd->add_option("--topology", topology_path, "Topology JSON")->required()->check(CLI::ExistingFile);
  audit_cmd->add_option("--trace", trace_path, "Trace (JSON lines)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*gen_topo) {
      const ExperimentConfig c = inst.config();
      emit(out, to_json(generate_topology(c.topology, seed)).dump(2) + "\n");
    } else if (*gen_work) {
      const Topology topology = topology_from_json(read_json(topology_path));
      const ExperimentConfig c = inst.config();
      emit(out, to_json(generate_workload(topology, c.workload, seed)).dump(2) + "\n");
    } else if (*simulate) {
      const Algorithm algorithm = parse_algorithm(algorithm_name);
      const SharingMode mode = parse_mode(mode_name);
      const ExperimentConfig c = inst.config();
      Topology topology;
      Workload workload;
      if (!topology_path.empty()) {
        topology = topology_from_json(read_json(topology_path));
        workload = workload_from_json(read_json(workload_path), topology);
      } else {
        topology = generate_topology(c.topology, seed);
        workload = generate_workload(topology, c.workload, seed);
      }
      Trace trace;
      const AlgorithmRun r =
          run_algorithm(topology, workload, algorithm, mode, c.ga, seed, trace_path.empty() ? nullptr : &trace);
      if (!trace_path.empty()) {
        std::ostringstream os;
        write_trace(os, trace);
        emit(trace_path, os.str());
      }
      json j = metrics_json(r.metrics);
      j["algorithm"] = to_string(algorithm);
      j["mode"] = to_string(mode);
      j["seed"] = seed;
      emit(out, j.dump(2) + "\n");
    } else if (*experiment) {
      ExperimentConfig c = inst.config();
      if (scenario) {
        use_scenario(c, *scenario);
      } else if (!parameter.empty()) {
        c.scenario = 0;
        c.parameter = parameter;
        c.values = parse_values(values);
      }
      c.algorithms.clear();
      for (const auto& a : split_list(algorithms)) c.algorithms.push_back(parse_algorithm(a));
      c.modes.clear();
      for (const auto& m : split_list(modes)) c.modes.push_back(parse_mode(m));
      if (runs) c.runs = *runs;
      c.base_seed = seed;
      c.jobs = jobs;
      const auto rows = run_experiment(c);
      std::ostringstream os;
      write_results_csv(os, rows);
      emit(out, os.str());
      if (!timing_path.empty()) {
        std::ostringstream ts;
        write_timing_csv(ts, rows);
        emit(timing_path, ts.str());
      }
    } else if (*oracle) {
      if (!mnp.empty()) {
        const MnpInstance m{parse_numbers(mnp), k};
        const auto instance = mnp_to_instance(m);
        BruteForceOptions opt;
        opt.prune = !no_prune;
        std::cout << brute_force_optimal(instance.topology, instance.workload, SharingMode::Shared, opt) << '\n';
      } else if (!topology_path.empty()) {
        const Topology topology = topology_from_json(read_json(topology_path));
        const Workload workload = workload_from_json(read_json(workload_path), topology);
        BruteForceOptions opt;
        opt.prune = !no_prune;
        std::cout << brute_force_optimal(topology, workload, parse_mode(mode_name), opt) << '\n';
      } else {
        throw UsageError("oracle needs --mnp with --k, or --topology with --workload");
      }
    } else if (*audit_cmd) {
      const Topology topology = topology_from_json(read_json(topology_path));
      std::ifstream in(trace_path);
      if (!in) throw Error("cannot open " + trace_path);
      const Trace trace = read_trace(in);
      if (!audit(topology, trace)) {
        std::cout << "violation\n";
        return 1;
      }
      std::cout << "ok\n";
    }
  } catch (const UsageError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
