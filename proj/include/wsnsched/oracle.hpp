#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "wsnsched/simulator.hpp"
#include "wsnsched/topology.hpp"
#include "wsnsched/workload.hpp"

namespace wsnsched {

/// Multiway number partitioning: split `numbers` into k subsets minimizing
/// the largest subset sum.
struct MnpInstance {
  std::vector<std::int64_t> numbers;
  int k = 1;
};

inline void validate(const MnpInstance& mnp) {
  if (mnp.numbers.empty()) throw Error("MNP instance needs at least one number");
  if (mnp.k < 1) throw Error("MNP instance needs k >= 1");
  for (auto a : mnp.numbers) {
    if (a < 1) throw Error("MNP numbers must be positive");
  }
}

/// Exact optimum by exhaustive assignment of numbers to subsets. Subsets are
/// unlabeled, so a number only ever opens the first empty subset.
inline std::int64_t mnp_optimal(const MnpInstance& mnp) {
  validate(mnp);
  if (mnp.numbers.size() > 14) throw GuardError("mnp_optimal handles at most 14 numbers");
  std::vector<std::int64_t> sums(static_cast<std::size_t>(mnp.k), 0);
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  auto rec = [&](auto&& self, std::size_t i, int used) -> void {
    if (i == mnp.numbers.size()) {
      best = std::min(best, *std::max_element(sums.begin(), sums.end()));
      return;
    }
    const int limit = std::min(used + 1, mnp.k);
    for (int s = 0; s < limit; ++s) {
      sums[static_cast<std::size_t>(s)] += mnp.numbers[i];
      self(self, i + 1, std::max(used, s + 1));
      sums[static_cast<std::size_t>(s)] -= mnp.numbers[i];
    }
  };
  rec(rec, 0, 0);
  return best;
}

struct SchedulingInstance {
  Topology topology;
  Workload workload;
};

/// Scheduling instance equivalent to the partitioning problem: one
/// unit-rate application per number (duration = the number) on its own
/// monitoring point; k sensor/base pairs with unit sensing, bandwidth and
/// processing capacity; every sensor covers every point but reaches only
/// its own base; all arrivals at time 0.
inline SchedulingInstance mnp_to_instance(const MnpInstance& mnp) {
  validate(mnp);
  const auto n = static_cast<std::int64_t>(mnp.numbers.size());
  const std::int64_t k = mnp.k;
  const std::int64_t spacing = 3;
  Capacities caps;
  caps.sensing = Rate::from_units(1);
  caps.bandwidth = Rate::from_units(1);
  caps.processing = Rate::from_units(1);
  caps.alpha = 1.0;
  caps.beta = 1.0;

  std::vector<MonitoringPoint> points;
  for (std::int64_t j = 0; j < n; ++j) {
    points.push_back({static_cast<PointId>(j), {j, 5}, 0});
  }
  const double sense = static_cast<double>(spacing * k + n + 10);
  std::vector<SensorNode> sensors;
  std::vector<BaseStation> bases;
  for (std::int64_t i = 0; i < k; ++i) {
    sensors.push_back({static_cast<SensorId>(i), {spacing * i, 0}, sense, 1.0, caps.sensing});
    bases.push_back({static_cast<BaseId>(i), {spacing * i, 1}, caps.processing});
  }
  const Region region{std::max(spacing * k, n) + 10, 10};

  SchedulingInstance out{Topology(region, caps, std::move(points), std::move(sensors), std::move(bases)), {}};
  for (std::int64_t j = 0; j < n; ++j) {
    Application a;
    a.id = static_cast<AppId>(j);
    a.requests = {{static_cast<PointId>(j), Rate::from_units(1)}};
    a.duration = mnp.numbers[static_cast<std::size_t>(j)];
    a.deadline = deadline_for(0, a.duration, 100);
    out.workload.push_back(std::move(a));
  }
  return out;
}

struct BruteForceOptions {
  bool prune = true;
  std::size_t max_apps = 10;
  std::size_t max_choices = 4;
};

namespace detail {

struct ExactSearch {
  ExactSearch(const Topology& t, const Workload& w) : topology(t), workload(w) {}

  const Topology& topology;
  const Workload& workload;
  std::vector<AppId> apps;
  std::vector<PointId> points;  // requested by some admissible app, ascending
  std::vector<std::size_t> by_duration;  // indices into apps, longest first
  Time best = std::numeric_limits<Time>::max();

  std::vector<std::pair<SensorId, BaseId>> choices(PointId k) const {
    std::vector<std::pair<SensorId, BaseId>> out;
    for (SensorId s : topology.candidates(k)) {
      for (BaseId b : topology.reach(s)) out.emplace_back(s, b);
    }
    return out;
  }

  // Every gene assignment times every admission order, each simulated in full.
  void exhaustive(const Simulation& base) {
    FixedGenes genes{std::vector<SensorId>(topology.point_count(), kNone),
                     std::vector<BaseId>(topology.point_count(), kNone)};
    auto assign = [&](auto&& self, std::size_t i) -> void {
      if (i == points.size()) {
        std::vector<AppId> order = apps;
        std::sort(order.begin(), order.end());
        do {
          Simulation sim = base;
          best = std::min(best, sim.run(Schedule{order, genes}).makespan);
        } while (std::next_permutation(order.begin(), order.end()));
        return;
      }
      const auto k = static_cast<std::size_t>(points[i]);
      for (const auto& [s, b] : choices(points[i])) {
        genes.sensor[k] = s;
        genes.base[k] = b;
        self(self, i + 1);
      }
    };
    assign(assign, 0);
  }

  // Depth-first over "which application is admitted next", fixing a point's
  // gene the first time an application needing it is chosen. Prefixes are
  // simulated once; identical states are expanded once; branches that cannot
  // beat the incumbent are cut.
  struct Node {
    Simulation sim;
    FixedGenes genes;
    std::uint64_t remaining = 0;
  };

  std::unordered_set<std::string> visited;
  // Sensor/base pairs that only talk to each other and look alike (same
  // candidate points, capacities and bandwidth) share a class; -1 otherwise.
  std::map<std::pair<SensorId, BaseId>, int> unit_class;

  void classify_units() {
    std::vector<int> base_fanin(topology.base_count(), 0);
    for (const auto& l : topology.links()) ++base_fanin[static_cast<std::size_t>(l.base)];
    std::vector<std::vector<PointId>> serves(topology.sensor_count());
    for (std::size_t k = 0; k < topology.point_count(); ++k) {
      for (SensorId sid : topology.candidates(static_cast<PointId>(k))) {
        serves[static_cast<std::size_t>(sid)].push_back(static_cast<PointId>(k));
      }
    }
    std::map<std::tuple<std::vector<PointId>, std::int64_t, std::int64_t, std::int64_t>, int> classes;
    for (const auto& l : topology.links()) {
      const auto sid = static_cast<std::size_t>(l.sensor);
      const auto bid = static_cast<std::size_t>(l.base);
      int cls = -1;
      if (topology.reach(l.sensor).size() == 1 && base_fanin[bid] == 1) {
        const auto sig = std::make_tuple(serves[sid], topology.sensors()[sid].sensing_capacity.milli(),
                                         topology.bases()[bid].processing_capacity.milli(), l.bandwidth.milli());
        cls = classes.emplace(sig, static_cast<int>(classes.size())).first->second;
      }
      unit_class[{l.sensor, l.base}] = cls;
    }
  }

  // Idle and not promised to any point a remaining application will need.
  bool untouched(const Node& node, const FixedGenes& genes, SensorId sid, BaseId bid) const {
    if (node.sim.state().sensor_load(sid) != Rate{} || node.sim.state().base_load(bid) != Rate{}) return false;
    for (std::size_t i = 0; i < apps.size(); ++i) {
      if (!(node.remaining >> i & 1)) continue;
      for (const auto& r : workload[static_cast<std::size_t>(apps[i])].requests) {
        const auto k = static_cast<std::size_t>(r.point);
        if (genes.sensor[k] == sid || genes.base[k] == bid) return false;
      }
    }
    return true;
  }

  // Choosing an untouched unit is equivalent to choosing any earlier
  // untouched unit of the same class: swapping the two maps states onto
  // states with the same future.
  bool symmetric_to_earlier(const Node& node, const FixedGenes& genes,
                            const std::vector<std::pair<SensorId, BaseId>>& opts, std::size_t c) const {
    const int cls = unit_class.at(opts[c]);
    if (cls < 0 || !untouched(node, genes, opts[c].first, opts[c].second)) return false;
    for (std::size_t e = 0; e < c; ++e) {
      if (unit_class.at(opts[e]) == cls && untouched(node, genes, opts[e].first, opts[e].second)) return true;
    }
    return false;
  }
  SharingMode mode = SharingMode::Shared;
  std::int64_t sensing_total = 0;  // milli, over sensors that can serve any requested point

  // Sensing work still to be done after `now`, in milli-rate seconds. Shared
  // streams count once per point at their largest rate-duration product.
  std::int64_t remaining_work(const Node& node) const {
    std::map<PointId, std::int64_t> per_point;
    auto add = [&](PointId k, std::int64_t w) {
      auto& v = per_point[k];
      v = mode == SharingMode::Shared ? std::max(v, w) : v + w;
    };
    for (std::size_t i = 0; i < apps.size(); ++i) {
      if (!(node.remaining >> i & 1)) continue;
      const Application& a = workload[static_cast<std::size_t>(apps[i])];
      for (const auto& r : a.requests) add(r.point, r.rate.milli() * a.duration);
    }
    for (const auto& [id, a] : node.sim.state().active()) {
      for (const auto& r : a.requests) add(r.point, r.rate.milli() * (a.finish - node.sim.now()));
    }
    std::int64_t w = 0;
    for (const auto& [k, v] : per_point) w += v;
    return w;
  }

  // Whether some choice of genes for the open points admits `app` right now.
  bool fits_now(const Node& node, const Application& app) const {
    FixedGenes genes = node.genes;
    std::vector<PointId> open;
    for (const auto& r : app.requests) {
      if (genes.sensor[static_cast<std::size_t>(r.point)] == kNone && !node.sim.state().placement(r.point)) {
        open.push_back(r.point);
      }
    }
    auto rec = [&](auto&& self, std::size_t p) -> bool {
      if (p == open.size()) {
        const auto fragment = node.sim.state().propose_from_genes(app, genes.sensor, genes.base);
        return node.sim.state().check_feasible(app, fragment);
      }
      const auto k = static_cast<std::size_t>(open[p]);
      for (const auto& [sid, bid] : choices(open[p])) {
        genes.sensor[k] = sid;
        genes.base[k] = bid;
        if (self(self, p + 1)) return true;
      }
      return false;
    };
    return rec(rec, 0);
  }

  Time lower_bound(const Node& node) const {
    const Time now = node.sim.now();
    const std::int64_t w = remaining_work(node);
    Time bound = std::max(node.sim.makespan(), now + (w + sensing_total - 1) / sensing_total);
    Time next_release = std::numeric_limits<Time>::max();
    for (const auto& [id, a] : node.sim.state().active()) next_release = std::min(next_release, a.finish);
    for (std::size_t i = 0; i < apps.size(); ++i) {
      if (!(node.remaining >> i & 1)) continue;
      const Application& a = workload[static_cast<std::size_t>(apps[i])];
      Time start = now;
      if (next_release != std::numeric_limits<Time>::max() && a.duration + next_release > bound &&
          !fits_now(node, a)) {
        start = next_release;
      }
      bound = std::max(bound, start + a.duration);
    }
    return bound;
  }

  Time max_remaining_duration(std::uint64_t remaining) const {
    Time m = 0;
    for (std::size_t i = 0; i < apps.size(); ++i) {
      if (remaining >> i & 1) m = std::max(m, workload[static_cast<std::size_t>(apps[i])].duration);
    }
    return m;
  }

  bool needed(const Node& node, PointId k) const {
    for (std::size_t i = 0; i < apps.size(); ++i) {
      if (!(node.remaining >> i & 1)) continue;
      for (const auto& r : workload[static_cast<std::size_t>(apps[i])].requests) {
        if (r.point == k) return true;
      }
    }
    return false;
  }

  // State key up to relabeling of interchangeable units: everything placed
  // on or promised to a classed unit is folded into that unit's descriptor,
  // and descriptors are compared as a sorted multiset per class.
  std::string key(const Node& node) const {
    std::vector<std::int64_t> v;
    std::map<std::pair<SensorId, BaseId>, std::vector<std::vector<std::int64_t>>> units;
    for (const auto& [unit, cls] : unit_class) {
      if (cls >= 0) units[unit];
    }
    v.push_back(node.sim.now());
    v.push_back(static_cast<std::int64_t>(node.remaining));
    for (std::size_t i = 0; i < apps.size(); ++i) {
      if (!(node.remaining >> i & 1)) continue;
      for (const auto& r : workload[static_cast<std::size_t>(apps[i])].requests) {
        const auto k = static_cast<std::size_t>(r.point);
        const std::pair<SensorId, BaseId> unit{node.genes.sensor[k], node.genes.base[k]};
        if (const auto it = units.find(unit); it != units.end()) {
          it->second.push_back({-3, r.point});
        } else {
          v.insert(v.end(), {r.point, unit.first, unit.second});
        }
      }
    }
    v.push_back(-1);
    // Running applications matter only through their finish time and load.
    std::vector<std::vector<std::int64_t>> running;
    for (const auto& [id, a] : node.sim.state().active()) {
      std::set<std::pair<SensorId, BaseId>> used;
      for (const auto& r : a.requests) {
        const auto pl = *node.sim.state().placement(r.point);
        used.emplace(pl.sensor, pl.base);
      }
      const bool spans = used.size() > 1;
      std::vector<std::int64_t> loose{a.finish};
      std::map<std::pair<SensorId, BaseId>, std::vector<std::int64_t>> pieces;
      for (const auto& r : a.requests) {
        const auto pl = *node.sim.state().placement(r.point);
        const std::pair<SensorId, BaseId> unit{pl.sensor, pl.base};
        const std::int64_t point = needed(node, r.point) ? r.point : -1;
        if (units.contains(unit)) {
          auto& piece = pieces[unit];
          if (piece.empty()) piece = {-4, a.finish, spans ? id : -1};
          piece.insert(piece.end(), {point, r.rate.milli()});
        } else {
          loose.insert(loose.end(), {point, r.rate.milli(), pl.sensor, pl.base});
        }
      }
      for (auto& [unit, piece] : pieces) units[unit].push_back(std::move(piece));
      if (loose.size() > 1 || pieces.empty()) {
        if (spans && !pieces.empty()) loose.push_back(id);
        running.push_back(std::move(loose));
      }
    }
    std::sort(running.begin(), running.end());
    for (const auto& d : running) {
      v.push_back(-2);
      v.insert(v.end(), d.begin(), d.end());
    }
    std::vector<std::pair<int, std::vector<std::int64_t>>> canon;
    for (auto& [unit, items] : units) {
      std::sort(items.begin(), items.end());
      std::vector<std::int64_t> flat;
      for (const auto& item : items) {
        flat.push_back(static_cast<std::int64_t>(item.size()));
        flat.insert(flat.end(), item.begin(), item.end());
      }
      canon.emplace_back(unit_class.at(unit), std::move(flat));
    }
    std::sort(canon.begin(), canon.end());
    for (const auto& [cls, flat] : canon) {
      v.insert(v.end(), {-5, cls, static_cast<std::int64_t>(flat.size())});
      v.insert(v.end(), flat.begin(), flat.end());
    }
    return {reinterpret_cast<const char*>(v.data()), v.size() * sizeof(std::int64_t)};
  }

  void dfs(const Node& node) {
    if (node.remaining == 0) {
      best = std::min(best, node.sim.makespan());
      return;
    }
    if (lower_bound(node) >= best) return;
    if (!visited.insert(key(node)).second) return;

    for (std::size_t i : by_duration) {
      if (!(node.remaining >> i & 1)) continue;
      const Application& app = workload[static_cast<std::size_t>(apps[i])];
      std::vector<PointId> open;
      for (const auto& r : app.requests) {
        if (node.genes.sensor[static_cast<std::size_t>(r.point)] == kNone) open.push_back(r.point);
      }
      FixedGenes genes = node.genes;
      auto branch = [&](auto&& self, std::size_t p) -> void {
        if (p == open.size()) {
          Node child{node.sim, genes, node.remaining & ~(std::uint64_t{1} << i)};
          child.sim.admit_next(app.id, child.genes);
          dfs(child);
          return;
        }
        const auto k = static_cast<std::size_t>(open[p]);
        const auto opts = choices(open[p]);
        for (std::size_t c = 0; c < opts.size(); ++c) {
          if (symmetric_to_earlier(node, genes, opts, c)) continue;
          genes.sensor[k] = opts[c].first;
          genes.base[k] = opts[c].second;
          self(self, p + 1);
        }
        genes.sensor[k] = kNone;
        genes.base[k] = kNone;
      };
      branch(branch, 0);
    }
  }
};

// Makespan of a feasible point in the search space: worst-fit runs in a few
// orders, replayed with each point fixed to its first worst-fit placement.
inline Time incumbent(const Topology& topology, const Workload& workload, SharingMode mode,
                      const std::vector<AppId>& apps) {
  std::vector<std::vector<AppId>> orders;
  orders.push_back(apps);
  orders.push_back(apps);
  std::stable_sort(orders.back().begin(), orders.back().end(), [&](AppId a, AppId b) {
    return workload[static_cast<std::size_t>(a)].duration > workload[static_cast<std::size_t>(b)].duration;
  });
  Time best = std::numeric_limits<Time>::max();
  for (const auto& order : orders) {
    Trace trace;
    run(topology, workload, Schedule{order, WorstFit{}}, mode, &trace);
    FixedGenes genes{std::vector<SensorId>(topology.point_count(), kNone),
                     std::vector<BaseId>(topology.point_count(), kNone)};
    for (const auto& e : trace.events) {
      for (const auto& d : e.deltas) {
        const auto k = static_cast<std::size_t>(d.point);
        if (genes.sensor[k] != kNone) continue;
        genes.sensor[k] = d.sensor;
        genes.base[k] = d.base;
      }
    }
    best = std::min(best, run(topology, workload, Schedule{order, genes}, mode).makespan);
  }
  return best;
}

}  // namespace detail

/// Minimum makespan over every admission order and every per-point
/// (sensor, base) gene assignment, each simulated by the engine.
/// Permanently infeasible applications are excluded, as in any run.
inline Time brute_force_optimal(const Topology& topology, const Workload& workload, SharingMode mode,
                                const BruteForceOptions& options = {}) {
  const Simulation base(topology, workload, mode);
  detail::ExactSearch search(topology, workload);
  for (const auto& a : workload) {
    if (base.admissible(a.id)) search.apps.push_back(a.id);
  }
  if (search.apps.size() > options.max_apps || search.apps.size() > 63) {
    throw GuardError("brute force handles at most " + std::to_string(options.max_apps) + " applications");
  }
  for (AppId j : search.apps) {
    for (const auto& r : workload[static_cast<std::size_t>(j)].requests) search.points.push_back(r.point);
  }
  std::sort(search.points.begin(), search.points.end());
  search.points.erase(std::unique(search.points.begin(), search.points.end()), search.points.end());
  for (PointId k : search.points) {
    if (topology.placement_choices(k) > options.max_choices) {
      throw GuardError("point " + std::to_string(k) + " has more than " + std::to_string(options.max_choices) +
                       " placement choices");
    }
  }
  if (search.apps.empty()) return 0;

  bool same_arrival = true;
  for (AppId j : search.apps) {
    same_arrival = same_arrival && workload[static_cast<std::size_t>(j)].arrival ==
                                       workload[static_cast<std::size_t>(search.apps.front())].arrival;
  }
  if (!options.prune || !same_arrival) {
    search.exhaustive(base);
    return search.best;
  }

  search.mode = mode;
  search.classify_units();
  std::vector<char> useful(topology.sensor_count(), 0);
  for (PointId k : search.points) {
    for (SensorId sid : topology.candidates(k)) useful[static_cast<std::size_t>(sid)] = 1;
  }
  for (std::size_t sid = 0; sid < useful.size(); ++sid) {
    if (useful[sid]) search.sensing_total += topology.sensors()[sid].sensing_capacity.milli();
  }
  for (std::size_t i = 0; i < search.apps.size(); ++i) search.by_duration.push_back(i);
  std::stable_sort(search.by_duration.begin(), search.by_duration.end(), [&](std::size_t a, std::size_t b) {
    return workload[static_cast<std::size_t>(search.apps[a])].duration >
           workload[static_cast<std::size_t>(search.apps[b])].duration;
  });
  search.best = detail::incumbent(topology, workload, mode, search.apps) + 1;

  detail::ExactSearch::Node root{base,
                                 FixedGenes{std::vector<SensorId>(topology.point_count(), kNone),
                                            std::vector<BaseId>(topology.point_count(), kNone)},
                                 (std::uint64_t{1} << search.apps.size()) - 1};
  root.sim.advance_to(workload[static_cast<std::size_t>(search.apps.front())].arrival);
  root.sim.receive_arrivals();
  search.dfs(root);
  return search.best;
}

}  // namespace wsnsched
