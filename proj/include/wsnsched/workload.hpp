#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wsnsched/topology.hpp"
#include "wsnsched/types.hpp"

namespace wsnsched {

struct Request {
  PointId point = 0;
  Rate rate;
};

struct Application {
  AppId id = 0;
  std::vector<Request> requests;  // ascending point id, distinct points
  Time duration = 0;              // t_j
  int batch = 0;
  Time arrival = 0;
  Time deadline = 0;
};

/// Applications indexed by id.
using Workload = std::vector<Application>;

struct WorkloadParams {
  int applications = 1000;
  int batches = 25;
  int points_min = 1;
  int points_max = 3;
  Time duration_min = 50;
  Time duration_max = 150;
  Time slack_min = 100;
  Time slack_max = 200;
  Time batch_interval = 0;
  // Spread applications over batches so batch sizes differ by at most one.
  bool balanced_batches = false;
};

/// Inclusive sensing-rate interval for a data type.
inline std::pair<double, double> rate_interval(int data_type) {
  switch (data_type) {
    case 0: return {5.0, 20.0};
    case 1: return {15.0, 40.0};
    case 2: return {25.0, 60.0};
    default: throw Error("unknown data type " + std::to_string(data_type));
  }
}

inline Time deadline_for(Time arrival, Time duration, Time slack) {
  return arrival + duration + slack;
}

inline Workload generate_workload(const Topology& topology, const WorkloadParams& params,
                                  std::uint64_t seed) {
  if (params.applications < 0) throw GenerationError("negative application count");
  if (params.applications == 0) return {};
  const int m = static_cast<int>(topology.point_count());
  if (m == 0) throw GenerationError("topology has no monitoring points");
  if (params.points_min < 1 || params.points_max < params.points_min) {
    throw GenerationError("invalid points-per-application range");
  }
  if (params.points_max > m) {
    throw GenerationError("points per application (" + std::to_string(params.points_max) +
                          ") exceeds the number of monitoring points (" + std::to_string(m) + ")");
  }
  if (params.batches < 1) throw GenerationError("batch count must be at least 1");
  if (params.duration_min < 1 || params.duration_max < params.duration_min) {
    throw GenerationError("invalid duration range");
  }
  if (params.slack_max < params.slack_min) throw GenerationError("invalid slack range");

  Rng rng = make_rng(seed, 2);
  std::uniform_int_distribution<int> count(params.points_min, params.points_max);
  std::uniform_int_distribution<Time> duration(params.duration_min, params.duration_max);
  std::uniform_int_distribution<Time> slack(params.slack_min, params.slack_max);
  std::uniform_int_distribution<int> batch(0, params.batches - 1);

  std::vector<int> balanced;
  if (params.balanced_batches) {
    balanced.resize(static_cast<std::size_t>(params.applications));
    for (std::size_t i = 0; i < balanced.size(); ++i) {
      balanced[i] = static_cast<int>(i % static_cast<std::size_t>(params.batches));
    }
    std::shuffle(balanced.begin(), balanced.end(), rng);
  }

  std::vector<PointId> all(static_cast<std::size_t>(m));
  std::iota(all.begin(), all.end(), 0);

  Workload apps;
  apps.reserve(static_cast<std::size_t>(params.applications));
  for (int j = 0; j < params.applications; ++j) {
    Application app;
    app.id = j;
    std::vector<PointId> chosen;
    std::sample(all.begin(), all.end(), std::back_inserter(chosen), count(rng), rng);
    for (PointId k : chosen) {
      const auto [lo, hi] = rate_interval(topology.points()[static_cast<std::size_t>(k)].data_type);
      std::uniform_real_distribution<double> rate(lo, hi);
      Rate r = Rate::from_units(rate(rng));
      r = std::clamp(r, Rate::from_units(lo), Rate::from_units(hi));
      app.requests.push_back({k, r});
    }
    app.duration = duration(rng);
    app.batch = params.balanced_batches ? balanced[static_cast<std::size_t>(j)] : batch(rng);
    app.arrival = static_cast<Time>(app.batch) * params.batch_interval;
    app.deadline = deadline_for(app.arrival, app.duration, slack(rng));
    apps.push_back(std::move(app));
  }
  return apps;
}

/// One of the six parameter sweeps.
struct ScenarioConfig {
  int scenario_id = 1;
  std::string swept_parameter;
  std::vector<double> values;
  bool balanced_batches = false;
};

inline ScenarioConfig scenario_sweep(int scenario_id) {
  auto range = [](double from, double to, double step) {
    std::vector<double> v;
    for (double x = from; x <= to; x += step) v.push_back(x);
    return v;
  };
  switch (scenario_id) {
    case 1: return {1, "applications", range(500, 1500, 100), false};
    case 2: return {2, "points", range(50, 250, 25), false};
    case 3: return {3, "points_per_app", range(1, 7, 1), false};
    case 4: return {4, "comm_range", range(50, 250, 50), false};
    case 5: return {5, "sensing_range", range(30, 50, 5), false};
    case 6: return {6, "batches", {1, 2, 5, 10, 20, 25}, true};
    default: throw Error("unknown scenario " + std::to_string(scenario_id));
  }
}

/// Applies one swept value to the base parameters.
inline void apply_sweep_value(const ScenarioConfig& sc, double value, TopologyParams& topo,
                              WorkloadParams& work) {
  const int n = static_cast<int>(value);
  switch (sc.scenario_id) {
    case 1: work.applications = n; break;
    case 2: topo.points = n; break;
    case 3: work.points_min = work.points_max = n; break;
    case 4: topo.comm_range = {value, value}; break;
    case 5: topo.sensing_range = {value, value}; break;
    case 6:
      work.batches = n;
      work.balanced_batches = true;
      break;
    default: throw Error("unknown scenario " + std::to_string(sc.scenario_id));
  }
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const Workload& apps) {
  nlohmann::json j;
  j["schema"] = "wsnsched.workload.v1";
  auto& arr = j["applications"] = nlohmann::json::array();
  for (const auto& a : apps) {
    nlohmann::json reqs = nlohmann::json::array();
    for (const auto& r : a.requests) reqs.push_back({{"point", r.point}, {"rate", r.rate.units()}});
    arr.push_back({{"id", a.id},
                   {"requests", std::move(reqs)},
                   {"duration", a.duration},
                   {"batch", a.batch},
                   {"arrival", a.arrival},
                   {"deadline", a.deadline}});
  }
  return j;
}

/// Parses and validates a workload against the topology it refers to.
inline Workload workload_from_json(const nlohmann::json& j, const Topology& topology) {
  Workload apps;
  try {
    if (j.at("schema").get<std::string>() != "wsnsched.workload.v1") {
      throw ParseError("unsupported workload schema");
    }
    for (const auto& a : j.at("applications")) {
      Application app;
      app.id = a.at("id").get<AppId>();
      for (const auto& r : a.at("requests")) {
        app.requests.push_back({r.at("point").get<PointId>(),
                                Rate::from_units(r.at("rate").get<double>())});
      }
      app.duration = a.at("duration").get<Time>();
      app.batch = a.at("batch").get<int>();
      app.arrival = a.at("arrival").get<Time>();
      app.deadline = a.at("deadline").get<Time>();
      apps.push_back(std::move(app));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed workload document: ") + e.what());
  }
  for (std::size_t i = 0; i < apps.size(); ++i) {
    auto& a = apps[i];
    if (a.id != static_cast<AppId>(i)) throw ParseError("application ids must be dense");
    if (a.requests.empty()) throw ParseError("application without requests");
    if (a.duration < 0 || a.arrival < 0) throw ParseError("negative time");
    std::sort(a.requests.begin(), a.requests.end(),
              [](const Request& x, const Request& y) { return x.point < y.point; });
    for (std::size_t r = 0; r < a.requests.size(); ++r) {
      if (!topology.has_point(a.requests[r].point)) throw ParseError("unknown point in workload");
      if (r > 0 && a.requests[r].point == a.requests[r - 1].point) {
        throw ParseError("duplicate point within one application");
      }
      if (a.requests[r].rate <= Rate{}) throw ParseError("non-positive rate");
    }
  }
  return apps;
}

}  // namespace wsnsched
