#include <gtest/gtest.h>

#include <map>
#include <set>

#include "support.hpp"

using namespace wsnsched;
using namespace wsnsched::testing;

namespace {

Topology standard_topology() {
  TopologyParams p;
  p.points = 120;
  p.sensors = 100;
  p.bases = 15;
  return generate_topology(p, 4);
}

}  // namespace

TEST(GenerateWorkload, DefaultsAreValid) {
  const Topology t = generate_topology(TopologyParams{}, 1);
  const Workload w = generate_workload(t, WorkloadParams{}, 1);
  ASSERT_EQ(w.size(), 1000u);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto& a = w[i];
    EXPECT_EQ(a.id, static_cast<AppId>(i));
    EXPECT_GE(a.requests.size(), 1u);
    EXPECT_LE(a.requests.size(), 3u);
    std::set<PointId> distinct;
    for (const auto& r : a.requests) {
      distinct.insert(r.point);
      const auto [lo, hi] = rate_interval(t.points()[static_cast<std::size_t>(r.point)].data_type);
      EXPECT_GE(r.rate, Rate::from_units(lo));
      EXPECT_LE(r.rate, Rate::from_units(hi));
    }
    EXPECT_EQ(distinct.size(), a.requests.size());
    EXPECT_GE(a.batch, 0);
    EXPECT_LT(a.batch, 25);
    EXPECT_EQ(a.arrival, 0);
    EXPECT_GE(a.duration, 50);
    EXPECT_LE(a.duration, 150);
    EXPECT_GE(a.deadline - a.arrival - a.duration, 100);
    EXPECT_LE(a.deadline - a.arrival - a.duration, 200);
  }
}

TEST(GenerateWorkload, SingleTypeZeroPoint) {
  const Topology t = build({100, 100}, Capacities{}, {{0, 0}}, {{{0, 10}, 50, 50}}, {{{0, 30}}});
  WorkloadParams p;
  p.applications = 1;
  p.batches = 1;
  p.points_min = p.points_max = 1;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Workload w = generate_workload(t, p, seed);
    ASSERT_EQ(w.size(), 1u);
    ASSERT_EQ(w[0].requests.size(), 1u);
    EXPECT_GE(w[0].requests[0].rate, Rate::from_units(5));
    EXPECT_LE(w[0].requests[0].rate, Rate::from_units(20));
  }
}

TEST(RateInterval, Table) {
  EXPECT_EQ(rate_interval(0), (std::pair<double, double>{5, 20}));
  EXPECT_EQ(rate_interval(1), (std::pair<double, double>{15, 40}));
  EXPECT_EQ(rate_interval(2), (std::pair<double, double>{25, 60}));
}

TEST(Deadline, IsArrivalPlusDurationPlusSlack) { EXPECT_EQ(deadline_for(10, 50, 137), 197); }

TEST(GenerateWorkload, TooManyPointsPerApp) {
  const Topology t = build({100, 100}, Capacities{}, {{0, 0}, {1, 1}}, {{{0, 10}, 50, 50}}, {{{0, 30}}});
  WorkloadParams p;
  p.applications = 3;
  p.points_min = 1;
  p.points_max = 3;
  EXPECT_THROW(generate_workload(t, p, 0), GenerationError);
}

TEST(GenerateWorkload, Deterministic) {
  const Topology t = standard_topology();
  WorkloadParams p;
  p.applications = 200;
  EXPECT_EQ(to_json(generate_workload(t, p, 9)).dump(), to_json(generate_workload(t, p, 9)).dump());
  EXPECT_NE(to_json(generate_workload(t, p, 9)).dump(), to_json(generate_workload(t, p, 10)).dump());
}

TEST(GenerateWorkload, BatchIntervalSetsArrival) {
  const Topology t = standard_topology();
  WorkloadParams p;
  p.applications = 100;
  p.batches = 5;
  p.batch_interval = 30;
  for (const auto& a : generate_workload(t, p, 2)) EXPECT_EQ(a.arrival, a.batch * 30);
}

TEST(GenerateWorkload, BalancedBatchesDifferByAtMostOne) {
  const Topology t = standard_topology();
  for (int batches : {1, 2, 5, 10, 20, 25}) {
    WorkloadParams p;
    p.applications = 203;
    p.batches = batches;
    p.balanced_batches = true;
    std::map<int, int> sizes;
    for (const auto& a : generate_workload(t, p, 7)) ++sizes[a.batch];
    ASSERT_EQ(sizes.size(), static_cast<std::size_t>(batches));
    int lo = 1 << 30, hi = 0;
    for (const auto& [b, n] : sizes) {
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
    EXPECT_LE(hi - lo, 1) << batches;
  }
}

TEST(ScenarioSweep, ExactValues) {
  EXPECT_EQ(scenario_sweep(1).values,
            (std::vector<double>{500, 600, 700, 800, 900, 1000, 1100, 1200, 1300, 1400, 1500}));
  EXPECT_EQ(scenario_sweep(2).values, (std::vector<double>{50, 75, 100, 125, 150, 175, 200, 225, 250}));
  EXPECT_EQ(scenario_sweep(3).values, (std::vector<double>{1, 2, 3, 4, 5, 6, 7}));
  EXPECT_EQ(scenario_sweep(4).values, (std::vector<double>{50, 100, 150, 200, 250}));
  EXPECT_EQ(scenario_sweep(5).values, (std::vector<double>{30, 35, 40, 45, 50}));
  EXPECT_EQ(scenario_sweep(6).values, (std::vector<double>{1, 2, 5, 10, 20, 25}));
  EXPECT_TRUE(scenario_sweep(6).balanced_batches);
  EXPECT_THROW(scenario_sweep(7), Error);
  EXPECT_THROW(scenario_sweep(0), Error);
}

TEST(ScenarioSweep, AppliesValue) {
  TopologyParams tp;
  WorkloadParams wp;
  apply_sweep_value(scenario_sweep(3), 4, tp, wp);
  EXPECT_EQ(wp.points_min, 4);
  EXPECT_EQ(wp.points_max, 4);
  apply_sweep_value(scenario_sweep(4), 150, tp, wp);
  EXPECT_EQ(tp.comm_range.lo, 150);
  EXPECT_EQ(tp.comm_range.hi, 150);
  apply_sweep_value(scenario_sweep(6), 5, tp, wp);
  EXPECT_EQ(wp.batches, 5);
  EXPECT_TRUE(wp.balanced_batches);
}

TEST(WorkloadJson, RoundTrip) {
  const Topology t = standard_topology();
  WorkloadParams p;
  p.applications = 50;
  const Workload w = generate_workload(t, p, 3);
  const auto j = to_json(w);
  EXPECT_EQ(to_json(workload_from_json(j, t)).dump(), j.dump());
}

TEST(WorkloadJson, UnknownPointRejected) {
  const Topology t = build({100, 100}, Capacities{}, {{0, 0}}, {{{0, 10}, 50, 50}}, {{{0, 30}}});
  Workload w{app(0, {{3, 10}}, 10)};
  EXPECT_THROW(workload_from_json(to_json(w), t), ParseError);
}
