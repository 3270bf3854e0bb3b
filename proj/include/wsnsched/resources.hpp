#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wsnsched/topology.hpp"
#include "wsnsched/types.hpp"
#include "wsnsched/workload.hpp"

namespace wsnsched {

/// r_kt: one sensing stream at the highest subscribed rate.
inline Rate shared_demand(std::span<const Rate> rates) {
  Rate best;
  for (Rate r : rates) best = std::max(best, r);
  return best;
}

/// u_kt: every subscription counted on its own.
inline Rate unshared_demand(std::span<const Rate> rates) {
  Rate sum;
  for (Rate r : rates) sum += r;
  return sum;
}

struct Placement {
  SensorId sensor = kNone;
  BaseId base = kNone;
  friend constexpr bool operator==(Placement, Placement) = default;
};

struct PointPlacement {
  PointId point = 0;
  Placement placement;
  friend constexpr bool operator==(const PointPlacement&, const PointPlacement&) = default;
};

/// Placements for the points of one application, ascending point id.
using AssignmentFragment = std::vector<PointPlacement>;

struct Subscription {
  AppId app = 0;
  Rate rate;
};

struct ActiveApp {
  AppId id = 0;
  Time admitted = 0;  // t0_j
  Time finish = 0;    // tf_j
  std::vector<Request> requests;
};

/// Loads recomputed from subscriptions and placements alone.
struct LedgerLoads {
  std::vector<Rate> sensor;
  std::vector<Rate> link;
  std::vector<Rate> base;  // sum of u_kt routed to the base, before beta
  friend bool operator==(const LedgerLoads&, const LedgerLoads&) = default;
};

/// Resource ledger for one simulation. Sensing and link loads aggregate
/// per-point demand with the mode's function (max when shared, sum when
/// unshared); base load always sums every subscription.
class NetworkState {
 public:
  NetworkState(const Topology& topology, SharingMode mode)
      : topology_(&topology),
        mode_(mode),
        points_(topology.point_count()),
        sensor_load_(topology.sensor_count()),
        link_load_(topology.links().size()),
        base_load_(topology.base_count()) {}

  [[nodiscard]] const Topology& topology() const { return *topology_; }
  [[nodiscard]] SharingMode mode() const { return mode_; }

  [[nodiscard]] std::optional<Placement> placement(PointId k) const {
    const auto& p = points_[static_cast<std::size_t>(k)];
    if (p.subscribers.empty()) return std::nullopt;
    return p.placement;
  }
  [[nodiscard]] std::span<const Subscription> subscribers(PointId k) const {
    return points_[static_cast<std::size_t>(k)].subscribers;
  }
  [[nodiscard]] Rate max_rate(PointId k) const { return points_[static_cast<std::size_t>(k)].max; }
  [[nodiscard]] Rate sum_rate(PointId k) const { return points_[static_cast<std::size_t>(k)].sum; }
  [[nodiscard]] Rate demand(PointId k) const {
    return mode_ == SharingMode::Shared ? max_rate(k) : sum_rate(k);
  }

  [[nodiscard]] Rate sensor_load(SensorId s) const { return sensor_load_[static_cast<std::size_t>(s)]; }
  [[nodiscard]] Rate link_load(LinkId l) const { return link_load_[static_cast<std::size_t>(l)]; }
  [[nodiscard]] Rate base_load(BaseId b) const { return base_load_[static_cast<std::size_t>(b)]; }

  [[nodiscard]] Rate residual_sensing(SensorId s) const {
    return topology_->sensors()[static_cast<std::size_t>(s)].sensing_capacity - sensor_load(s);
  }

  [[nodiscard]] bool empty() const { return active_.empty(); }
  [[nodiscard]] std::size_t active_count() const { return active_.size(); }
  [[nodiscard]] bool is_active(AppId j) const { return active_.contains(j); }
  [[nodiscard]] const std::map<AppId, ActiveApp>& active() const { return active_; }

  /// Whether the application fits with the proposed placements. Pure.
  /// Throws StructuralError when a placement breaks coverage or reach, or
  /// moves a point that is already being sensed.
  [[nodiscard]] bool check_feasible(const Application& app,
                                    std::span<const PointPlacement> proposed) const {
    Deltas d;
    for (const auto& req : app.requests) {
      const Placement pl = lookup(proposed, req.point);
      validate(req.point, pl);
      accumulate(d, req, pl);
    }
    return within_capacity(d);
  }

  /// Worst-fit placement: each new point goes to the covering sensor with the
  /// most residual sensing capacity, then to the reachable base with the most
  /// residual processing capacity whose link still fits. Ties go to the lower
  /// id. Points already being sensed keep their placement. All or nothing.
  [[nodiscard]] std::optional<AssignmentFragment> worst_fit_assign(const Application& app) const {
    Deltas d;
    AssignmentFragment out;
    out.reserve(app.requests.size());
    const auto& caps = topology_->capacities();
    std::vector<std::pair<std::int64_t, SensorId>> order;
    for (const auto& req : app.requests) {
      if (const auto existing = placement(req.point)) {
        accumulate(d, req, *existing);
        out.push_back({req.point, *existing});
        continue;
      }
      order.clear();
      for (SensorId s : topology_->candidates(req.point)) {
        const Rate residual = residual_sensing(s) - d.get(d.sensor, s);
        order.emplace_back(residual.milli(), s);
      }
      std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
      });
      Placement chosen;
      for (const auto& [residual, s] : order) {
        if (residual < req.rate.milli()) break;
        double best_headroom = 0.0;
        for (BaseId b : topology_->reach(s)) {
          const LinkId l = topology_->link_id(s, b);
          const Rate link_after = link_load(l) + d.get(d.link, l) + req.rate;
          if (!fits(caps.alpha, link_after, topology_->links()[static_cast<std::size_t>(l)].bandwidth)) {
            continue;
          }
          const Rate base_now = base_load(b) + d.get(d.base, b);
          const Rate cap = topology_->bases()[static_cast<std::size_t>(b)].processing_capacity;
          if (!fits(caps.beta, base_now + req.rate, cap)) continue;
          const double room = headroom(caps.beta, base_now, cap);
          if (chosen.base == kNone || room > best_headroom) {
            chosen = {s, b};
            best_headroom = room;
          }
        }
        if (chosen.base != kNone) break;
      }
      if (chosen.sensor == kNone) return std::nullopt;
      accumulate(d, req, chosen);
      out.push_back({req.point, chosen});
    }
    if (!within_capacity(d)) return std::nullopt;
    return out;
  }

  /// Placements taken from per-point genes, except that points already being
  /// sensed stay where they are.
  [[nodiscard]] AssignmentFragment propose_from_genes(const Application& app,
                                                      std::span<const SensorId> sensor_genes,
                                                      std::span<const BaseId> base_genes) const {
    AssignmentFragment out;
    out.reserve(app.requests.size());
    for (const auto& req : app.requests) {
      if (const auto existing = placement(req.point)) {
        out.push_back({req.point, *existing});
      } else {
        const auto k = static_cast<std::size_t>(req.point);
        out.push_back({req.point, {sensor_genes[k], base_genes[k]}});
      }
    }
    return out;
  }

  /// Deploys the application at `now`; returns its finish time now + t_j.
  Time admit(const Application& app, std::span<const PointPlacement> assignment, Time now) {
    if (is_active(app.id)) {
      throw AdmissionError("application " + std::to_string(app.id) + " is already active");
    }
    if (!check_feasible(app, assignment)) {
      throw AdmissionError("application " + std::to_string(app.id) + " does not fit");
    }
    for (const auto& req : app.requests) {
      auto& p = points_[static_cast<std::size_t>(req.point)];
      const Placement pl = lookup(assignment, req.point);
      const Rate before = demand(req.point);
      p.placement = pl;
      p.subscribers.push_back({app.id, req.rate});
      p.max = std::max(p.max, req.rate);
      p.sum += req.rate;
      apply(pl, demand(req.point) - before, req.rate, true);
    }
    ActiveApp a{app.id, now, now + app.duration, app.requests};
    const Time finish = a.finish;
    active_.emplace(app.id, std::move(a));
    return finish;
  }

  void release(AppId j) {
    const auto it = active_.find(j);
    if (it == active_.end()) {
      throw AdmissionError("application " + std::to_string(j) + " is not active");
    }
    for (const auto& req : it->second.requests) {
      auto& p = points_[static_cast<std::size_t>(req.point)];
      const Rate before = demand(req.point);
      const auto sub = std::find_if(p.subscribers.begin(), p.subscribers.end(),
                                    [&](const Subscription& s) { return s.app == j; });
      p.subscribers.erase(sub);
      p.max = Rate{};
      p.sum = Rate{};
      for (const auto& s : p.subscribers) {
        p.max = std::max(p.max, s.rate);
        p.sum += s.rate;
      }
      const Placement pl = p.placement;
      apply(pl, before - demand(req.point), req.rate, false);
      if (p.subscribers.empty()) p.placement = {};
    }
    active_.erase(it);
  }

  [[nodiscard]] LedgerLoads loads() const { return {sensor_load_, link_load_, base_load_}; }

  /// Loads rebuilt from subscriptions and placements.
  [[nodiscard]] LedgerLoads recompute_loads() const {
    LedgerLoads out{std::vector<Rate>(sensor_load_.size()), std::vector<Rate>(link_load_.size()),
                    std::vector<Rate>(base_load_.size())};
    for (std::size_t k = 0; k < points_.size(); ++k) {
      const auto& p = points_[k];
      if (p.subscribers.empty()) continue;
      std::vector<Rate> rates;
      for (const auto& s : p.subscribers) rates.push_back(s.rate);
      const Rate d = mode_ == SharingMode::Shared ? shared_demand(rates) : unshared_demand(rates);
      out.sensor[static_cast<std::size_t>(p.placement.sensor)] += d;
      out.link[static_cast<std::size_t>(topology_->link_id(p.placement.sensor, p.placement.base))] += d;
      out.base[static_cast<std::size_t>(p.placement.base)] += unshared_demand(rates);
    }
    return out;
  }

  /// Every sensing, link and processing constraint holds for the given loads.
  [[nodiscard]] bool constraints_hold(const LedgerLoads& l) const {
    const auto& caps = topology_->capacities();
    for (std::size_t s = 0; s < l.sensor.size(); ++s) {
      if (l.sensor[s] > topology_->sensors()[s].sensing_capacity) return false;
    }
    for (std::size_t i = 0; i < l.link.size(); ++i) {
      if (!fits(caps.alpha, l.link[i], topology_->links()[i].bandwidth)) return false;
    }
    for (std::size_t b = 0; b < l.base.size(); ++b) {
      if (!fits(caps.beta, l.base[b], topology_->bases()[b].processing_capacity)) return false;
    }
    return true;
  }

  /// Incremental loads equal a from-scratch recomputation and satisfy every
  /// capacity constraint.
  [[nodiscard]] bool audit() const {
    const LedgerLoads fresh = recompute_loads();
    return fresh == loads() && constraints_hold(fresh);
  }

  [[nodiscard]] nlohmann::json snapshot() const {
    nlohmann::json j;
    j["mode"] = to_string(mode_);
    auto& pts = j["points"] = nlohmann::json::array();
    for (std::size_t k = 0; k < points_.size(); ++k) {
      const auto& p = points_[k];
      if (p.subscribers.empty()) continue;
      nlohmann::json subs = nlohmann::json::array();
      for (const auto& s : p.subscribers) subs.push_back({{"app", s.app}, {"rate", s.rate.units()}});
      pts.push_back({{"id", k},
                     {"sensor", p.placement.sensor},
                     {"base", p.placement.base},
                     {"subscribers", std::move(subs)}});
    }
    auto loads_json = [](const std::vector<Rate>& v) {
      nlohmann::json a = nlohmann::json::array();
      for (Rate r : v) a.push_back(r.units());
      return a;
    };
    j["sensor_load"] = loads_json(sensor_load_);
    j["link_load"] = loads_json(link_load_);
    j["base_load"] = loads_json(base_load_);
    auto& act = j["active"] = nlohmann::json::array();
    for (const auto& [id, a] : active_) {
      act.push_back({{"app", id}, {"admitted", a.admitted}, {"finish", a.finish}});
    }
    return j;
  }

 private:
  struct PointLedger {
    Placement placement;
    std::vector<Subscription> subscribers;
    Rate max;
    Rate sum;
  };

  // Pending increments for a handful of resources touched by one app.
  struct Deltas {
    std::vector<std::pair<std::int32_t, Rate>> sensor, link, base;

    static void add(std::vector<std::pair<std::int32_t, Rate>>& v, std::int32_t id, Rate r) {
      for (auto& [k, x] : v) {
        if (k == id) {
          x += r;
          return;
        }
      }
      v.emplace_back(id, r);
    }
    static Rate get(const std::vector<std::pair<std::int32_t, Rate>>& v, std::int32_t id) {
      for (const auto& [k, x] : v) {
        if (k == id) return x;
      }
      return {};
    }
  };

  static Placement lookup(std::span<const PointPlacement> fragment, PointId k) {
    for (const auto& pp : fragment) {
      if (pp.point == k) return pp.placement;
    }
    throw StructuralError("assignment does not cover point " + std::to_string(k));
  }

  void validate(PointId k, Placement pl) const {
    if (!topology_->has_point(k)) throw StructuralError("unknown point " + std::to_string(k));
    if (pl.sensor < 0 || static_cast<std::size_t>(pl.sensor) >= topology_->sensor_count() ||
        !topology_->covers(pl.sensor, k)) {
      throw StructuralError("sensor " + std::to_string(pl.sensor) + " does not cover point " +
                            std::to_string(k));
    }
    if (topology_->link_id(pl.sensor, pl.base) == kNone) {
      throw StructuralError("sensor " + std::to_string(pl.sensor) + " cannot reach base " +
                            std::to_string(pl.base));
    }
    if (const auto existing = placement(k); existing && *existing != pl) {
      throw StructuralError("point " + std::to_string(k) + " is already sensed by sensor " +
                            std::to_string(existing->sensor));
    }
  }

  [[nodiscard]] Rate increment(const Request& req) const {
    if (mode_ == SharingMode::Shared) {
      const Rate m = max_rate(req.point);
      return std::max(m, req.rate) - m;
    }
    return req.rate;
  }

  void accumulate(Deltas& d, const Request& req, Placement pl) const {
    const Rate inc = increment(req);
    Deltas::add(d.sensor, pl.sensor, inc);
    Deltas::add(d.link, topology_->link_id(pl.sensor, pl.base), inc);
    Deltas::add(d.base, pl.base, req.rate);
  }

  [[nodiscard]] bool within_capacity(const Deltas& d) const {
    const auto& caps = topology_->capacities();
    for (const auto& [s, inc] : d.sensor) {
      if (sensor_load(s) + inc > topology_->sensors()[static_cast<std::size_t>(s)].sensing_capacity) {
        return false;
      }
    }
    for (const auto& [l, inc] : d.link) {
      if (!fits(caps.alpha, link_load(l) + inc, topology_->links()[static_cast<std::size_t>(l)].bandwidth)) {
        return false;
      }
    }
    for (const auto& [b, inc] : d.base) {
      if (!fits(caps.beta, base_load(b) + inc, topology_->bases()[static_cast<std::size_t>(b)].processing_capacity)) {
        return false;
      }
    }
    return true;
  }

  void apply(Placement pl, Rate sensing_delta, Rate processing, bool add) {
    const LinkId l = topology_->link_id(pl.sensor, pl.base);
    auto& s = sensor_load_[static_cast<std::size_t>(pl.sensor)];
    auto& c = link_load_[static_cast<std::size_t>(l)];
    auto& b = base_load_[static_cast<std::size_t>(pl.base)];
    if (add) {
      s += sensing_delta;
      c += sensing_delta;
      b += processing;
    } else {
      s -= sensing_delta;
      c -= sensing_delta;
      b -= processing;
    }
  }

  const Topology* topology_;
  SharingMode mode_;
  std::vector<PointLedger> points_;
  std::vector<Rate> sensor_load_;
  std::vector<Rate> link_load_;
  std::vector<Rate> base_load_;
  std::map<AppId, ActiveApp> active_;
};

}  // namespace wsnsched
