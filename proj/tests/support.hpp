#pragma once

#include <cstdint>
#include <initializer_list>
#include <utility>
#include <vector>

#include "wsnsched/wsnsched.hpp"

namespace wsnsched::testing {

struct SensorDef {
  Coord at;
  double sensing_range = 50.0;
  double comm_range = 50.0;
  double capacity = 100.0;
};

struct BaseDef {
  Coord at;
  double capacity = 1000.0;
};

inline Capacities units(double sensing, double bandwidth, double processing) {
  Capacities c;
  c.sensing = Rate::from_units(sensing);
  c.bandwidth = Rate::from_units(bandwidth);
  c.processing = Rate::from_units(processing);
  return c;
}

inline Topology build(Region region, const Capacities& caps, std::vector<Coord> points,
                      std::vector<SensorDef> sensors, std::vector<BaseDef> bases) {
  std::vector<MonitoringPoint> p;
  for (std::size_t i = 0; i < points.size(); ++i) p.push_back({static_cast<PointId>(i), points[i], 0});
  std::vector<SensorNode> s;
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    s.push_back({static_cast<SensorId>(i), sensors[i].at, sensors[i].sensing_range, sensors[i].comm_range,
                 Rate::from_units(sensors[i].capacity)});
  }
  std::vector<BaseStation> b;
  for (std::size_t i = 0; i < bases.size(); ++i) {
    b.push_back({static_cast<BaseId>(i), bases[i].at, Rate::from_units(bases[i].capacity)});
  }
  return Topology(region, caps, std::move(p), std::move(s), std::move(b));
}

inline Application app(AppId id, std::initializer_list<std::pair<PointId, double>> requests, Time duration,
                       Time arrival = 0) {
  Application a;
  a.id = id;
  for (const auto& [k, r] : requests) a.requests.push_back({k, Rate::from_units(r)});
  a.duration = duration;
  a.arrival = arrival;
  a.deadline = deadline_for(arrival, duration, 150);
  return a;
}

/// One sensor of capacity 1 covering one point, one base, two unit-rate
/// applications of durations 10 and 5.
inline SchedulingInstance two_app_instance() {
  SchedulingInstance out{build({20, 20}, units(1, 100, 100), {{0, 0}}, {{{0, 3}, 10, 10, 1}}, {{{0, 6}, 100}}),
                         {}};
  out.workload = {app(0, {{0, 1}}, 10), app(1, {{0, 1}}, 5)};
  return out;
}

/// Small random instance: up to `apps` single-point applications arriving
/// together, up to 3 sensors and 2 bases, at most 4 placements per point.
inline SchedulingInstance tiny_instance(std::uint64_t seed, int apps = 6) {
  Rng rng = make_rng(seed, 7);
  for (std::uint64_t attempt = 0;; ++attempt) {
    TopologyParams tp;
    tp.region = {40, 40};
    tp.points = std::uniform_int_distribution<int>(2, 5)(rng);
    tp.sensors = std::uniform_int_distribution<int>(2, 3)(rng);
    tp.bases = std::uniform_int_distribution<int>(1, 2)(rng);
    tp.sensing_range = {15.0, 30.0};
    tp.comm_range = {15.0, 30.0};
    tp.capacities = units(60, 60, 120);
    const std::uint64_t s = seed * 1000 + attempt;
    Topology topology;
    try {
      topology = generate_topology(tp, s);
    } catch (const GenerationError&) {
      continue;
    }
    bool small = true;
    for (std::size_t k = 0; k < topology.point_count(); ++k) {
      small = small && topology.placement_choices(static_cast<PointId>(k)) <= 4;
    }
    if (!small) continue;
    WorkloadParams wp;
    wp.applications = std::uniform_int_distribution<int>(2, apps)(rng);
    wp.batches = 1;
    wp.points_min = wp.points_max = 1;
    wp.duration_min = 5;
    wp.duration_max = 30;
    Workload workload = generate_workload(topology, wp, s);
    return {std::move(topology), std::move(workload)};
  }
}

/// Placement for every point of `a`: the live one if the point is being
/// sensed, otherwise a uniformly drawn covering sensor and reachable base.
inline AssignmentFragment random_fragment(const NetworkState& state, const Application& a, Rng& rng) {
  const Topology& t = state.topology();
  AssignmentFragment out;
  for (const auto& r : a.requests) {
    if (const auto pl = state.placement(r.point)) {
      out.push_back({r.point, *pl});
      continue;
    }
    const auto cand = t.candidates(r.point);
    const SensorId s = cand[std::uniform_int_distribution<std::size_t>(0, cand.size() - 1)(rng)];
    const auto reach = t.reach(s);
    const BaseId b = reach[std::uniform_int_distribution<std::size_t>(0, reach.size() - 1)(rng)];
    out.push_back({r.point, {s, b}});
  }
  return out;
}

struct DominanceResult {
  int states = 0;
  int unshared_feasible = 0;
  int counterexamples = 0;
};

/// Builds random ledgers (identical subscriptions and placements in both
/// modes) and checks that every probe feasible when unshared is feasible
/// when shared.
inline DominanceResult shared_dominance(std::uint64_t seed, int states) {
  DominanceResult res;
  Rng rng = make_rng(seed, 11);
  TopologyParams tp;
  tp.region = {200, 200};
  tp.points = 25;
  tp.sensors = 12;
  tp.bases = 4;
  tp.sensing_range = {40, 80};
  tp.comm_range = {60, 120};
  tp.capacities = units(100, 90, 160);
  const Topology t = generate_topology(tp, seed);
  WorkloadParams wp;
  wp.applications = 400;
  wp.points_max = 4;
  const Workload pool = generate_workload(t, wp, seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  while (res.states < states) {
    NetworkState shared(t, SharingMode::Shared);
    NetworkState unshared(t, SharingMode::Unshared);
    const int fill = std::uniform_int_distribution<int>(0, 12)(rng);
    for (int i = 0; i < fill; ++i) {
      const Application& a = pool[pick(rng)];
      if (unshared.is_active(a.id)) continue;
      const auto frag = random_fragment(unshared, a, rng);
      if (!unshared.check_feasible(a, frag)) continue;
      unshared.admit(a, frag, 0);
      if (!shared.check_feasible(a, frag)) {
        ++res.counterexamples;
        continue;
      }
      shared.admit(a, frag, 0);
    }
    for (int probe = 0; probe < 4; ++probe) {
      const Application& a = pool[pick(rng)];
      if (unshared.is_active(a.id)) continue;
      const auto frag = random_fragment(unshared, a, rng);
      const bool u = unshared.check_feasible(a, frag);
      const bool s = shared.check_feasible(a, frag);
      res.unshared_feasible += u ? 1 : 0;
      if (u && !s) ++res.counterexamples;
    }
    ++res.states;
  }
  return res;
}

inline ExperimentConfig desk() { return desk_preset(); }

inline std::pair<Topology, Workload> desk_instance(std::uint64_t seed) {
  const ExperimentConfig c = desk_preset();
  Topology t = generate_topology(c.topology, seed);
  Workload w = generate_workload(t, c.workload, seed);
  return {std::move(t), std::move(w)};
}

}  // namespace wsnsched::testing
