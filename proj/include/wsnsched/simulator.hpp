#pragma once

#include <algorithm>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <queue>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wsnsched/resources.hpp"
#include "wsnsched/topology.hpp"
#include "wsnsched/types.hpp"
#include "wsnsched/workload.hpp"

namespace wsnsched {

/// Placement decided at admission time by worst fit.
struct WorstFit {};

/// Per-point (sensor, base) genes, indexed by point id. A gene only applies
/// when its point is activated from idle.
struct FixedGenes {
  std::vector<SensorId> sensor;
  std::vector<BaseId> base;
};

using AssignmentPolicy = std::variant<WorstFit, FixedGenes>;

struct Schedule {
  std::vector<AppId> admission_order;
  AssignmentPolicy policy;
};

struct AppRecord {
  AppId id = 0;
  Time arrival = 0;
  Time admitted = -1;  // t0_j
  Time finish = -1;    // tf_j
  Time waited = 0;
  Time turnaround = 0;
  bool met_deadline = false;
  bool rejected = false;
};

struct RunMetrics {
  Time makespan = 0;
  double avg_waiting = 0.0;
  double avg_turnaround = 0.0;
  double success_rate = 1.0;
  std::vector<AppRecord> per_app;
  std::vector<AppId> rejected;
};

// ---------------------------------------------------------------------------
// Trace

enum class EventKind { Arrive, Admit, Release, Block, Reject };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Arrive: return "arrive";
    case EventKind::Admit: return "admit";
    case EventKind::Release: return "release";
    case EventKind::Block: return "block";
    case EventKind::Reject: return "reject";
  }
  return "?";
}

inline EventKind event_kind_from_string(const std::string& s) {
  if (s == "arrive") return EventKind::Arrive;
  if (s == "admit") return EventKind::Admit;
  if (s == "release") return EventKind::Release;
  if (s == "block") return EventKind::Block;
  if (s == "reject") return EventKind::Reject;
  throw ParseError("unknown trace event '" + s + "'");
}

struct TraceDelta {
  PointId point = 0;
  Rate rate;
  SensorId sensor = kNone;
  BaseId base = kNone;
};

struct TraceEvent {
  Time time = 0;
  EventKind kind = EventKind::Arrive;
  AppId app = 0;
  std::vector<TraceDelta> deltas;  // admit: every request with its placement
};

struct Trace {
  SharingMode mode = SharingMode::Shared;
  std::vector<TraceEvent> events;
};

/// Line-delimited JSON: a header line, then one event per line.
inline void write_trace(std::ostream& os, const Trace& trace) {
  os << nlohmann::json{{"trace", "wsnsched.trace.v1"}, {"mode", to_string(trace.mode)}}.dump()
     << '\n';
  for (const auto& e : trace.events) {
    nlohmann::json j{{"t", e.time}, {"event", to_string(e.kind)}, {"app", e.app}};
    if (!e.deltas.empty()) {
      auto& d = j["deltas"] = nlohmann::json::array();
      for (const auto& x : e.deltas) {
        d.push_back({{"point", x.point}, {"rate", x.rate.units()}, {"sensor", x.sensor}, {"base", x.base}});
      }
    }
    os << j.dump() << '\n';
  }
}

inline SharingMode sharing_mode_from_string(const std::string& s) {
  if (s == "shared" || s == "s") return SharingMode::Shared;
  if (s == "unshared" || s == "u") return SharingMode::Unshared;
  throw ParseError("unknown sharing mode '" + s + "'");
}

inline Trace read_trace(std::istream& is) {
  Trace trace;
  std::string line;
  bool header = false;
  try {
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      if (!header) {
        if (j.value("trace", "") != "wsnsched.trace.v1") throw ParseError("missing trace header");
        trace.mode = sharing_mode_from_string(j.at("mode").get<std::string>());
        header = true;
        continue;
      }
      TraceEvent e;
      e.time = j.at("t").get<Time>();
      e.kind = event_kind_from_string(j.at("event").get<std::string>());
      e.app = j.at("app").get<AppId>();
      if (j.contains("deltas")) {
        for (const auto& d : j["deltas"]) {
          e.deltas.push_back({d.at("point").get<PointId>(), Rate::from_units(d.at("rate").get<double>()),
                              d.at("sensor").get<SensorId>(), d.at("base").get<BaseId>()});
        }
      }
      trace.events.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed trace: ") + e.what());
  }
  if (!header) throw ParseError("empty trace document");
  return trace;
}

/// Replays a trace and re-checks the sensing, link and processing
/// constraints from scratch after every event. Also rejects structurally
/// impossible traces: placements outside coverage or reach, a point moved
/// while sensed, releases of inactive apps, time running backwards.
inline bool audit(const Topology& topology, const Trace& trace) {
  struct PointState {
    Placement placement;
    std::vector<std::pair<AppId, Rate>> subs;
  };
  std::map<PointId, PointState> points;
  std::map<AppId, std::vector<PointId>> active;
  const auto& caps = topology.capacities();
  Time last = std::numeric_limits<Time>::min();

  auto constraints_hold = [&]() {
    std::vector<Rate> sensor(topology.sensor_count());
    std::vector<Rate> link(topology.links().size());
    std::vector<Rate> base(topology.base_count());
    for (const auto& [k, p] : points) {
      Rate mx, sum;
      for (const auto& [app, r] : p.subs) {
        mx = std::max(mx, r);
        sum += r;
      }
      const Rate d = trace.mode == SharingMode::Shared ? mx : sum;
      sensor[static_cast<std::size_t>(p.placement.sensor)] += d;
      link[static_cast<std::size_t>(topology.link_id(p.placement.sensor, p.placement.base))] += d;
      base[static_cast<std::size_t>(p.placement.base)] += sum;
    }
    for (std::size_t s = 0; s < sensor.size(); ++s) {
      if (sensor[s] > topology.sensors()[s].sensing_capacity) return false;
    }
    for (std::size_t l = 0; l < link.size(); ++l) {
      if (!fits(caps.alpha, link[l], topology.links()[l].bandwidth)) return false;
    }
    for (std::size_t b = 0; b < base.size(); ++b) {
      if (!fits(caps.beta, base[b], topology.bases()[b].processing_capacity)) return false;
    }
    return true;
  };

  for (const auto& e : trace.events) {
    if (e.time < last) return false;
    last = e.time;
    if (e.kind == EventKind::Admit) {
      if (active.contains(e.app)) return false;
      auto& pts = active[e.app];
      for (const auto& d : e.deltas) {
        if (!topology.has_point(d.point)) return false;
        if (d.sensor < 0 || static_cast<std::size_t>(d.sensor) >= topology.sensor_count()) return false;
        if (!topology.covers(d.sensor, d.point)) return false;
        if (topology.link_id(d.sensor, d.base) == kNone) return false;
        auto& p = points[d.point];
        if (!p.subs.empty() && p.placement != Placement{d.sensor, d.base}) return false;
        p.placement = {d.sensor, d.base};
        p.subs.emplace_back(e.app, d.rate);
        pts.push_back(d.point);
      }
    } else if (e.kind == EventKind::Release) {
      const auto it = active.find(e.app);
      if (it == active.end()) return false;
      for (PointId k : it->second) {
        auto& p = points[k];
        std::erase_if(p.subs, [&](const auto& s) { return s.first == e.app; });
        if (p.subs.empty()) points.erase(k);
      }
      active.erase(it);
    } else {
      continue;
    }
    if (!constraints_hold()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Engine

/// Applications that fit on an otherwise empty network under worst fit.
/// Everything else is permanently infeasible and rejected on arrival.
inline std::vector<char> admissible_alone(const Topology& topology, const Workload& workload,
                                          SharingMode mode) {
  NetworkState empty(topology, mode);
  std::vector<char> ok(workload.size(), 0);
  for (const auto& app : workload) {
    ok[static_cast<std::size_t>(app.id)] = empty.worst_fit_assign(app).has_value() ? 1 : 0;
  }
  return ok;
}

struct SimOptions {
  bool record_trace = false;
};

struct Plan {
  std::vector<AppId> order;
  AssignmentPolicy policy;
};

class Simulation;

/// Called whenever new applications arrive, with every waiting application
/// (blocked ones included). Returns their admission order.
using Planner = std::function<Plan(const Simulation&, std::span<const AppId> waiting)>;

/// Event-driven admission engine. Applications are offered strictly in plan
/// order; a blocked head waits for the next release or arrival. Releases at
/// an instant happen before admissions at that instant.
class Simulation {
 public:
  Simulation(const Topology& topology, const Workload& workload, SharingMode mode,
             SimOptions options = {})
      : Simulation(topology, workload, mode,
                   std::make_shared<const std::vector<char>>(admissible_alone(topology, workload, mode)),
                   options) {}

  Simulation(const Topology& topology, const Workload& workload, SharingMode mode,
             std::shared_ptr<const std::vector<char>> admissible, SimOptions options = {})
      : topology_(&topology),
        workload_(&workload),
        state_(topology, mode),
        admissible_(std::move(admissible)),
        options_(options),
        records_(workload.size()) {
    trace_.mode = mode;
    for (std::size_t i = 0; i < workload.size(); ++i) {
      if (workload[i].id != static_cast<AppId>(i)) {
        throw Error("application ids must equal their index");
      }
      records_[i] = {workload[i].id, workload[i].arrival};
      arrivals_.push_back(workload[i].id);
    }
    std::stable_sort(arrivals_.begin(), arrivals_.end(), [&](AppId a, AppId b) {
      return workload[static_cast<std::size_t>(a)].arrival < workload[static_cast<std::size_t>(b)].arrival;
    });
  }

  [[nodiscard]] const Topology& topology() const { return *topology_; }
  [[nodiscard]] const Workload& workload() const { return *workload_; }
  [[nodiscard]] SharingMode mode() const { return state_.mode(); }
  [[nodiscard]] Time now() const { return now_; }
  [[nodiscard]] const NetworkState& state() const { return state_; }
  [[nodiscard]] const Trace& trace() const { return trace_; }
  [[nodiscard]] Time makespan() const { return max_finish_; }
  [[nodiscard]] std::span<const AppId> waiting() const { return waiting_; }
  [[nodiscard]] const std::shared_ptr<const std::vector<char>>& admissible() const { return admissible_; }
  [[nodiscard]] bool admissible(AppId j) const { return (*admissible_)[static_cast<std::size_t>(j)] != 0; }
  [[nodiscard]] bool finished() const {
    return waiting_.empty() && releases_.empty() && next_arrival_ == arrivals_.size();
  }
  [[nodiscard]] std::size_t pending_releases() const { return releases_.size(); }

  RunMetrics run(const Schedule& schedule) {
    std::vector<int> rank(workload_->size(), -1);
    for (std::size_t i = 0; i < schedule.admission_order.size(); ++i) {
      const AppId j = schedule.admission_order[i];
      if (j < 0 || static_cast<std::size_t>(j) >= rank.size()) {
        throw Error("schedule references unknown application " + std::to_string(j));
      }
      if (rank[static_cast<std::size_t>(j)] != -1) {
        throw Error("application " + std::to_string(j) + " appears twice in the schedule");
      }
      rank[static_cast<std::size_t>(j)] = static_cast<int>(i);
    }
    const Planner planner = [&](const Simulation&, std::span<const AppId> waiting) {
      Plan plan{{waiting.begin(), waiting.end()}, schedule.policy};
      for (AppId j : waiting) {
        if (rank[static_cast<std::size_t>(j)] < 0) {
          throw Error("schedule does not cover application " + std::to_string(j));
        }
      }
      std::sort(plan.order.begin(), plan.order.end(), [&](AppId a, AppId b) {
        return rank[static_cast<std::size_t>(a)] < rank[static_cast<std::size_t>(b)];
      });
      return plan;
    };
    return run(planner);
  }

  RunMetrics run(const Planner& planner) {
    bool replan = !waiting_.empty();
    for (;;) {
      release_due();
      while (next_arrival_ < arrivals_.size() &&
             app(arrivals_[next_arrival_]).arrival <= now_) {
        const AppId j = arrivals_[next_arrival_++];
        record(EventKind::Arrive, j);
        if (!admissible(j)) {
          records_[static_cast<std::size_t>(j)].rejected = true;
          record(EventKind::Reject, j);
          continue;
        }
        waiting_.push_back(j);
        replan = true;
      }
      if (replan && !waiting_.empty()) {
        Plan plan = planner(*this, waiting());
        if (plan.order.size() != waiting_.size()) {
          throw Error("planner must order every waiting application exactly once");
        }
        waiting_.assign(plan.order.begin(), plan.order.end());
        policy_ = std::move(plan.policy);
      }
      replan = false;
      admit_ready();

      Time next = std::numeric_limits<Time>::max();
      if (!releases_.empty()) next = releases_.top().first;
      if (next_arrival_ < arrivals_.size()) {
        next = std::min(next, app(arrivals_[next_arrival_]).arrival);
      }
      if (next == std::numeric_limits<Time>::max()) break;
      now_ = std::max(now_, next);
    }
    if (!waiting_.empty()) throw Error("simulation ended with waiting applications");
    return metrics();
  }

  /// Moves the clock forward to `t`, releasing applications due by then.
  void advance_to(Time t) {
    now_ = std::max(now_, t);
    release_due();
  }

  /// Processes every arrival at or before `now` without admitting anything;
  /// the arrived applications wait in arrival order.
  void receive_arrivals() {
    while (next_arrival_ < arrivals_.size() && app(arrivals_[next_arrival_]).arrival <= now_) {
      const AppId j = arrivals_[next_arrival_++];
      record(EventKind::Arrive, j);
      if (!admissible(j)) {
        records_[static_cast<std::size_t>(j)].rejected = true;
        record(EventKind::Reject, j);
        continue;
      }
      waiting_.push_back(j);
    }
  }

  /// Makes `j` the next admission: waits for releases until it fits, as the
  /// head of an ordered queue would. `j` must be waiting.
  void admit_next(AppId j, const AssignmentPolicy& policy) {
    const auto it = std::find(waiting_.begin(), waiting_.end(), j);
    if (it == waiting_.end()) throw Error("application " + std::to_string(j) + " is not waiting");
    waiting_.erase(it);
    for (;;) {
      release_due();
      if (try_admit(j, policy)) return;
      if (state_.empty()) {
        if (!try_admit(j, WorstFit{})) throw Error("admissible application does not fit alone");
        return;
      }
      record(EventKind::Block, j);
      now_ = std::max(now_, releases_.top().first);
    }
  }

  /// Copy that has no future arrivals and the given applications waiting.
  [[nodiscard]] Simulation fork(std::span<const AppId> waiting) const {
    Simulation copy = *this;
    copy.next_arrival_ = copy.arrivals_.size();
    copy.waiting_.assign(waiting.begin(), waiting.end());
    copy.options_.record_trace = false;
    copy.trace_.events.clear();
    return copy;
  }

  [[nodiscard]] RunMetrics metrics() const {
    RunMetrics m;
    m.makespan = max_finish_;
    m.per_app = records_;
    std::int64_t admitted = 0;
    std::int64_t met = 0;
    double waited = 0.0;
    double turnaround = 0.0;
    for (auto& r : m.per_app) {
      if (r.rejected) {
        m.rejected.push_back(r.id);
        continue;
      }
      if (r.admitted < 0) continue;
      ++admitted;
      waited += static_cast<double>(r.waited);
      turnaround += static_cast<double>(r.turnaround);
      if (r.met_deadline) ++met;
    }
    m.avg_waiting = admitted ? waited / static_cast<double>(admitted) : 0.0;
    m.avg_turnaround = admitted ? turnaround / static_cast<double>(admitted) : 0.0;
    m.success_rate = m.per_app.empty()
                         ? 1.0
                         : static_cast<double>(met) / static_cast<double>(m.per_app.size());
    return m;
  }

 private:
  const Application& app(AppId j) const { return (*workload_)[static_cast<std::size_t>(j)]; }

  void record(EventKind kind, AppId j, std::vector<TraceDelta> deltas = {}) {
    if (options_.record_trace) trace_.events.push_back({now_, kind, j, std::move(deltas)});
  }

  void release_due() {
    while (!releases_.empty() && releases_.top().first <= now_) {
      const AppId j = releases_.top().second;
      releases_.pop();
      state_.release(j);
      record(EventKind::Release, j);
    }
  }

  bool try_admit(AppId j, const AssignmentPolicy& policy) {
    const Application& a = app(j);
    AssignmentFragment fragment;
    if (std::holds_alternative<WorstFit>(policy)) {
      auto wf = state_.worst_fit_assign(a);
      if (!wf) return false;
      fragment = std::move(*wf);
    } else {
      const auto& genes = std::get<FixedGenes>(policy);
      fragment = state_.propose_from_genes(a, genes.sensor, genes.base);
      if (!state_.check_feasible(a, fragment)) return false;
    }
    const Time finish = state_.admit(a, fragment, now_);
    releases_.emplace(finish, j);
    max_finish_ = std::max(max_finish_, finish);
    auto& r = records_[static_cast<std::size_t>(j)];
    r.admitted = now_;
    r.finish = finish;
    r.waited = now_ - a.arrival;
    r.turnaround = finish - a.arrival;
    r.met_deadline = finish <= a.deadline;
    if (options_.record_trace) {
      std::vector<TraceDelta> deltas;
      for (std::size_t i = 0; i < a.requests.size(); ++i) {
        deltas.push_back({a.requests[i].point, a.requests[i].rate, fragment[i].placement.sensor,
                          fragment[i].placement.base});
      }
      record(EventKind::Admit, j, std::move(deltas));
    }
    return true;
  }

  void admit_ready() {
    while (!waiting_.empty()) {
      const AppId head = waiting_.front();
      if (try_admit(head, policy_)) {
        waiting_.erase(waiting_.begin());
        continue;
      }
      if (state_.empty()) {
        // The head's genes do not fit even on an idle network.
        if (!try_admit(head, WorstFit{})) throw Error("admissible application does not fit alone");
        waiting_.erase(waiting_.begin());
        continue;
      }
      record(EventKind::Block, head);
      break;
    }
  }

  using ReleaseQueue = std::priority_queue<std::pair<Time, AppId>, std::vector<std::pair<Time, AppId>>,
                                           std::greater<>>;

  const Topology* topology_;
  const Workload* workload_;
  NetworkState state_;
  std::shared_ptr<const std::vector<char>> admissible_;
  SimOptions options_;
  std::vector<AppRecord> records_;
  std::vector<AppId> arrivals_;  // by (arrival, id)
  std::size_t next_arrival_ = 0;
  std::vector<AppId> waiting_;
  ReleaseQueue releases_;
  AssignmentPolicy policy_ = WorstFit{};
  Time now_ = 0;
  Time max_finish_ = 0;
  Trace trace_;
};

/// Runs a fixed schedule from time 0.
inline RunMetrics run(const Topology& topology, const Workload& workload, const Schedule& schedule,
                      SharingMode mode, Trace* trace = nullptr) {
  Simulation sim(topology, workload, mode, SimOptions{trace != nullptr});
  RunMetrics m = sim.run(schedule);
  if (trace) *trace = sim.trace();
  return m;
}

}  // namespace wsnsched
