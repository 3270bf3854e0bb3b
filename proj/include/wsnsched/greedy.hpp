#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "wsnsched/simulator.hpp"
#include "wsnsched/workload.hpp"

namespace wsnsched {

enum class OrderingPolicy { LMPF, LMSF, LTSF, FCFS, SJF };

inline const char* to_string(OrderingPolicy p) {
  switch (p) {
    case OrderingPolicy::LMPF: return "lmpf";
    case OrderingPolicy::LMSF: return "lmsf";
    case OrderingPolicy::LTSF: return "ltsf";
    case OrderingPolicy::FCFS: return "fcfs";
    case OrderingPolicy::SJF: return "sjf";
  }
  return "?";
}

inline std::optional<OrderingPolicy> parse_ordering_policy(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto p : {OrderingPolicy::LMPF, OrderingPolicy::LMSF, OrderingPolicy::LTSF,
                 OrderingPolicy::FCFS, OrderingPolicy::SJF}) {
    if (lower == to_string(p)) return p;
  }
  return std::nullopt;
}

namespace detail {

inline Rate max_request(const Application& a) {
  Rate m;
  for (const auto& r : a.requests) m = std::max(m, r.rate);
  return m;
}

inline Rate total_request(const Application& a) {
  Rate s;
  for (const auto& r : a.requests) s += r.rate;
  return s;
}

// Sort key; the id breaks ties.
inline std::int64_t policy_key(OrderingPolicy p, const Application& a) {
  switch (p) {
    case OrderingPolicy::LMPF: return static_cast<std::int64_t>(a.requests.size());
    case OrderingPolicy::LMSF: return max_request(a).milli();
    case OrderingPolicy::LTSF: return total_request(a).milli();
    case OrderingPolicy::FCFS: return a.arrival;
    case OrderingPolicy::SJF: return a.duration;
  }
  return 0;
}

}  // namespace detail

/// Admission order for a subset of the workload: ascending policy key, ties
/// to the lower id.
inline std::vector<AppId> order(OrderingPolicy policy, const Workload& workload,
                                std::span<const AppId> ids) {
  std::vector<std::pair<std::int64_t, AppId>> keyed;
  keyed.reserve(ids.size());
  for (AppId j : ids) {
    keyed.emplace_back(detail::policy_key(policy, workload[static_cast<std::size_t>(j)]), j);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<AppId> out;
  out.reserve(keyed.size());
  for (const auto& [key, j] : keyed) out.push_back(j);
  return out;
}

inline std::vector<AppId> order(OrderingPolicy policy, const Workload& workload) {
  std::vector<AppId> ids;
  ids.reserve(workload.size());
  for (const auto& a : workload) ids.push_back(a.id);
  return order(policy, workload, ids);
}

/// Re-sorts the waiting queue whenever applications arrive; worst-fit
/// placement. Running applications are never touched. The queue is kept in
/// arrival order already, so FCFS leaves it as is.
inline Planner greedy_planner(OrderingPolicy policy) {
  return [policy](const Simulation& sim, std::span<const AppId> waiting) {
    if (policy == OrderingPolicy::FCFS) {
      const auto& w = sim.workload();
      const bool in_order = std::is_sorted(waiting.begin(), waiting.end(), [&](AppId a, AppId b) {
        const auto& x = w[static_cast<std::size_t>(a)];
        const auto& y = w[static_cast<std::size_t>(b)];
        return std::tie(x.arrival, x.id) < std::tie(y.arrival, y.id);
      });
      if (in_order) return Plan{{waiting.begin(), waiting.end()}, WorstFit{}};
    }
    return Plan{order(policy, sim.workload(), waiting), WorstFit{}};
  };
}

inline RunMetrics run_greedy(const Topology& topology, const Workload& workload, OrderingPolicy policy,
                             SharingMode mode, Trace* trace = nullptr) {
  Simulation sim(topology, workload, mode, SimOptions{trace != nullptr});
  RunMetrics m = sim.run(greedy_planner(policy));
  if (trace) *trace = sim.trace();
  return m;
}

}  // namespace wsnsched
