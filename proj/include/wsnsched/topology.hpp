#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "wsnsched/types.hpp"

namespace wsnsched {

struct Coord {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend constexpr bool operator==(Coord, Coord) = default;
};

inline double distance(Coord a, Coord b) {
  const std::int64_t dx = a.x - b.x;
  const std::int64_t dy = a.y - b.y;
  return std::sqrt(static_cast<double>(dx * dx + dy * dy));
}

/// Grid cells [0, width) x [0, height), 1 m spacing.
struct Region {
  std::int64_t width = 1000;
  std::int64_t height = 1000;

  [[nodiscard]] bool contains(Coord c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height;
  }
  [[nodiscard]] std::int64_t cells() const { return width * height; }
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct Capacities {
  Rate sensing = Rate::from_units(100);      // R_i
  Rate bandwidth = Rate::from_units(100);    // C_m
  Rate processing = Rate::from_units(1000);  // P_l
  double alpha = 1.0;  // transmission coefficient
  double beta = 1.0;   // processing coefficient

  /// Default capacities scaled so the coefficients do not change tightness:
  /// R = 100, C = 100 * alpha, P = 1000 * beta.
  static Capacities with_coefficients(double alpha, double beta) {
    Capacities c;
    c.alpha = alpha;
    c.beta = beta;
    c.bandwidth = Rate::from_units(100.0 * alpha);
    c.processing = Rate::from_units(1000.0 * beta);
    return c;
  }
};

struct MonitoringPoint {
  PointId id = 0;
  Coord position;
  int data_type = 0;  // 0, 1 or 2
};

struct SensorNode {
  SensorId id = 0;
  Coord position;
  double sensing_range = 0.0;
  double comm_range = 0.0;
  Rate sensing_capacity;
};

struct BaseStation {
  BaseId id = 0;
  Coord position;
  Rate processing_capacity;
};

struct CandidateLink {
  SensorId sensor = 0;
  BaseId base = 0;
  Rate bandwidth;
};

struct TopologyParams {
  Region region;
  int points = 300;
  int sensors = 250;
  int bases = 30;
  Range sensing_range{30.0, 50.0};
  Range comm_range{200.0, 250.0};
  Capacities capacities;
  // Place monitoring points only where at least one sensor with a base in
  // reach can sense them.
  bool covered_points = true;
};

/// Immutable network graph. Coverage, reach and links are derived from the
/// geometry at construction.
class Topology {
 public:
  Topology() = default;

  Topology(Region region, Capacities capacities,
           std::vector<MonitoringPoint> points, std::vector<SensorNode> sensors,
           std::vector<BaseStation> bases)
      : region_(region),
        capacities_(capacities),
        points_(std::move(points)),
        sensors_(std::move(sensors)),
        bases_(std::move(bases)) {
    validate();
    derive();
  }

  [[nodiscard]] const Region& region() const { return region_; }
  [[nodiscard]] const Capacities& capacities() const { return capacities_; }
  [[nodiscard]] double alpha() const { return capacities_.alpha; }
  [[nodiscard]] double beta() const { return capacities_.beta; }

  [[nodiscard]] std::span<const MonitoringPoint> points() const { return points_; }
  [[nodiscard]] std::span<const SensorNode> sensors() const { return sensors_; }
  [[nodiscard]] std::span<const BaseStation> bases() const { return bases_; }
  [[nodiscard]] std::span<const CandidateLink> links() const { return links_; }

  [[nodiscard]] std::size_t point_count() const { return points_.size(); }
  [[nodiscard]] std::size_t sensor_count() const { return sensors_.size(); }
  [[nodiscard]] std::size_t base_count() const { return bases_.size(); }

  [[nodiscard]] bool has_point(PointId k) const {
    return k >= 0 && static_cast<std::size_t>(k) < points_.size();
  }

  /// Sensors within sensing range of the point (S_k), ascending id.
  [[nodiscard]] std::span<const SensorId> coverage(PointId k) const {
    return coverage_[static_cast<std::size_t>(k)];
  }
  /// Covering sensors that can reach at least one base; the only sensors
  /// eligible for assignment.
  [[nodiscard]] std::span<const SensorId> candidates(PointId k) const {
    return candidates_[static_cast<std::size_t>(k)];
  }
  /// Bases within communication range of the sensor, ascending id.
  [[nodiscard]] std::span<const BaseId> reach(SensorId s) const {
    return reach_[static_cast<std::size_t>(s)];
  }

  [[nodiscard]] LinkId link_id(SensorId s, BaseId b) const {
    if (s < 0 || static_cast<std::size_t>(s) >= sensors_.size()) return kNone;
    const auto r = reach(s);
    const auto it = std::lower_bound(r.begin(), r.end(), b);
    if (it == r.end() || *it != b) return kNone;
    return link_offset_[static_cast<std::size_t>(s)] +
           static_cast<LinkId>(it - r.begin());
  }

  [[nodiscard]] bool covers(SensorId s, PointId k) const {
    const auto c = coverage(k);
    return std::binary_search(c.begin(), c.end(), s);
  }

  /// Number of (sensor, base) pairs a point can be assigned to.
  [[nodiscard]] std::size_t placement_choices(PointId k) const {
    std::size_t n = 0;
    for (SensorId s : candidates(k)) n += reach(s).size();
    return n;
  }

  // Provenance, kept so a serialized topology can be regenerated.
  std::optional<std::uint64_t> seed;
  std::optional<TopologyParams> params;

 private:
  void validate() const {
    std::unordered_set<std::int64_t> used;
    auto claim = [&](Coord c, const char* what, std::int32_t id) {
      if (!region_.contains(c)) {
        throw GenerationError(std::string(what) + " " + std::to_string(id) +
                              " lies outside the region");
      }
      if (!used.insert(c.x * region_.height + c.y).second) {
        throw GenerationError(std::string(what) + " " + std::to_string(id) +
                              " overlaps another element");
      }
    };
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto& p = points_[i];
      if (p.id != static_cast<PointId>(i)) throw GenerationError("point ids must be dense");
      if (p.data_type < 0 || p.data_type > 2) throw GenerationError("data_type must be 0, 1 or 2");
      claim(p.position, "point", p.id);
    }
    for (std::size_t i = 0; i < sensors_.size(); ++i) {
      const auto& s = sensors_[i];
      if (s.id != static_cast<SensorId>(i)) throw GenerationError("sensor ids must be dense");
      if (s.sensing_range < 0 || s.comm_range < 0) throw GenerationError("negative range");
      if (s.sensing_capacity <= Rate{}) throw GenerationError("sensing capacity must be positive");
      claim(s.position, "sensor", s.id);
    }
    for (std::size_t i = 0; i < bases_.size(); ++i) {
      const auto& b = bases_[i];
      if (b.id != static_cast<BaseId>(i)) throw GenerationError("base ids must be dense");
      if (b.processing_capacity <= Rate{}) throw GenerationError("processing capacity must be positive");
      claim(b.position, "base", b.id);
    }
    if (capacities_.bandwidth <= Rate{}) throw GenerationError("bandwidth must be positive");
    if (capacities_.alpha < 0 || capacities_.beta < 0) throw GenerationError("negative coefficient");
  }

  void derive() {
    reach_.assign(sensors_.size(), {});
    link_offset_.assign(sensors_.size(), 0);
    links_.clear();
    for (const auto& s : sensors_) {
      auto& r = reach_[static_cast<std::size_t>(s.id)];
      for (const auto& b : bases_) {
        if (distance(s.position, b.position) <= s.comm_range) r.push_back(b.id);
      }
      link_offset_[static_cast<std::size_t>(s.id)] = static_cast<LinkId>(links_.size());
      for (BaseId b : r) links_.push_back({s.id, b, capacities_.bandwidth});
    }
    coverage_.assign(points_.size(), {});
    candidates_.assign(points_.size(), {});
    for (const auto& p : points_) {
      for (const auto& s : sensors_) {
        if (distance(p.position, s.position) <= s.sensing_range) {
          coverage_[static_cast<std::size_t>(p.id)].push_back(s.id);
          if (!reach_[static_cast<std::size_t>(s.id)].empty()) {
            candidates_[static_cast<std::size_t>(p.id)].push_back(s.id);
          }
        }
      }
    }
  }

  Region region_{0, 0};
  Capacities capacities_;
  std::vector<MonitoringPoint> points_;
  std::vector<SensorNode> sensors_;
  std::vector<BaseStation> bases_;
  std::vector<CandidateLink> links_;
  std::vector<LinkId> link_offset_;
  std::vector<std::vector<SensorId>> coverage_;
  std::vector<std::vector<SensorId>> candidates_;
  std::vector<std::vector<BaseId>> reach_;
};

inline std::vector<SensorId> coverage_of(const Topology& topology, PointId k) {
  if (!topology.has_point(k)) {
    throw Error("unknown monitoring point " + std::to_string(k));
  }
  const auto c = topology.coverage(k);
  return {c.begin(), c.end()};
}

/// Random topology: bases, then sensors, then monitoring points, each on a
/// distinct integer grid cell drawn uniformly with rejection of duplicates.
inline Topology generate_topology(const TopologyParams& params, std::uint64_t seed) {
  const auto& region = params.region;
  if (params.points < 0 || params.sensors < 0 || params.bases < 0) {
    throw GenerationError("element counts must be non-negative");
  }
  if (region.width <= 0 || region.height <= 0) {
    if (params.points + params.sensors + params.bases == 0) {
      Topology empty(Region{std::max<std::int64_t>(region.width, 0),
                            std::max<std::int64_t>(region.height, 0)},
                     params.capacities, {}, {}, {});
      empty.seed = seed;
      empty.params = params;
      return empty;
    }
    throw GenerationError("region has no grid cells");
  }
  const std::int64_t total =
      std::int64_t{params.points} + params.sensors + params.bases;
  if (total > region.cells()) {
    throw GenerationError("region " + std::to_string(region.width) + "x" +
                          std::to_string(region.height) + " cannot host " +
                          std::to_string(total) + " distinct coordinates");
  }

  Rng rng = make_rng(seed, 1);
  std::uniform_int_distribution<std::int64_t> xs(0, region.width - 1);
  std::uniform_int_distribution<std::int64_t> ys(0, region.height - 1);
  std::unordered_set<std::int64_t> used;
  auto draw_free = [&]() {
    for (;;) {
      Coord c{xs(rng), ys(rng)};
      if (!used.contains(c.x * region.height + c.y)) return c;
    }
  };
  auto claim = [&](Coord c) { used.insert(c.x * region.height + c.y); };

  std::vector<BaseStation> bases;
  bases.reserve(static_cast<std::size_t>(params.bases));
  for (int i = 0; i < params.bases; ++i) {
    const Coord c = draw_free();
    claim(c);
    bases.push_back({i, c, params.capacities.processing});
  }

  std::uniform_real_distribution<double> sense(params.sensing_range.lo, params.sensing_range.hi);
  std::uniform_real_distribution<double> comm(params.comm_range.lo, params.comm_range.hi);
  std::vector<SensorNode> sensors;
  sensors.reserve(static_cast<std::size_t>(params.sensors));
  std::vector<char> reachable;
  for (int i = 0; i < params.sensors; ++i) {
    const Coord c = draw_free();
    claim(c);
    SensorNode s{i, c, 0.0, 0.0, params.capacities.sensing};
    s.sensing_range = params.sensing_range.lo == params.sensing_range.hi
                          ? params.sensing_range.lo
                          : sense(rng);
    s.comm_range = params.comm_range.lo == params.comm_range.hi ? params.comm_range.lo
                                                                : comm(rng);
    const bool any = std::any_of(bases.begin(), bases.end(), [&](const BaseStation& b) {
      return distance(s.position, b.position) <= s.comm_range;
    });
    reachable.push_back(any ? 1 : 0);
    sensors.push_back(s);
  }

  auto servable = [&](Coord c) {
    for (const auto& s : sensors) {
      if (reachable[static_cast<std::size_t>(s.id)] &&
          distance(c, s.position) <= s.sensing_range) {
        return true;
      }
    }
    return false;
  };

  std::uniform_int_distribution<int> types(0, 2);
  std::vector<MonitoringPoint> points;
  points.reserve(static_cast<std::size_t>(params.points));
  const std::int64_t budget = 20000 + std::int64_t{params.points} * 20000;
  std::int64_t attempts = 0;
  for (int i = 0; i < params.points; ++i) {
    Coord c = draw_free();
    if (params.covered_points) {
      while (!servable(c)) {
        if (++attempts > budget) {
          throw GenerationError("could not place monitoring point " + std::to_string(i) +
                                " within range of a sensor that reaches a base");
        }
        c = draw_free();
      }
    }
    claim(c);
    points.push_back({i, c, types(rng)});
  }

  Topology topology(region, params.capacities, std::move(points), std::move(sensors),
                    std::move(bases));
  topology.seed = seed;
  topology.params = params;
  return topology;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const TopologyParams& p) {
  return {
      {"region", {{"width", p.region.width}, {"height", p.region.height}}},
      {"points", p.points},
      {"sensors", p.sensors},
      {"bases", p.bases},
      {"sensing_range", {p.sensing_range.lo, p.sensing_range.hi}},
      {"comm_range", {p.comm_range.lo, p.comm_range.hi}},
      {"covered_points", p.covered_points},
  };
}

inline nlohmann::json to_json(const Capacities& c) {
  return {{"sensing", c.sensing.units()},
          {"bandwidth", c.bandwidth.units()},
          {"processing", c.processing.units()},
          {"alpha", c.alpha},
          {"beta", c.beta}};
}

inline Capacities capacities_from_json(const nlohmann::json& j) {
  Capacities c;
  c.sensing = Rate::from_units(j.at("sensing").get<double>());
  c.bandwidth = Rate::from_units(j.at("bandwidth").get<double>());
  c.processing = Rate::from_units(j.at("processing").get<double>());
  c.alpha = j.at("alpha").get<double>();
  c.beta = j.at("beta").get<double>();
  return c;
}

inline nlohmann::json to_json(const Topology& t) {
  nlohmann::json j;
  j["schema"] = "wsnsched.topology.v1";
  j["seed"] = t.seed ? nlohmann::json(*t.seed) : nlohmann::json(nullptr);
  if (t.params) {
    j["params"] = to_json(*t.params);
  } else {
    j["params"] = nullptr;
  }
  j["region"] = {{"width", t.region().width}, {"height", t.region().height}};
  j["capacities"] = to_json(t.capacities());
  auto& pts = j["points"] = nlohmann::json::array();
  for (const auto& p : t.points()) {
    pts.push_back({{"id", p.id}, {"x", p.position.x}, {"y", p.position.y}, {"data_type", p.data_type}});
  }
  auto& ss = j["sensors"] = nlohmann::json::array();
  for (const auto& s : t.sensors()) {
    ss.push_back({{"id", s.id},
                  {"x", s.position.x},
                  {"y", s.position.y},
                  {"sensing_range", s.sensing_range},
                  {"comm_range", s.comm_range},
                  {"sensing_capacity", s.sensing_capacity.units()}});
  }
  auto& bs = j["bases"] = nlohmann::json::array();
  for (const auto& b : t.bases()) {
    bs.push_back({{"id", b.id},
                  {"x", b.position.x},
                  {"y", b.position.y},
                  {"processing_capacity", b.processing_capacity.units()}});
  }
  return j;
}

inline Topology topology_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<std::string>() != "wsnsched.topology.v1") {
      throw ParseError("unsupported topology schema");
    }
    Region region{j.at("region").at("width").get<std::int64_t>(),
                  j.at("region").at("height").get<std::int64_t>()};
    const Capacities caps = capacities_from_json(j.at("capacities"));
    std::vector<MonitoringPoint> points;
    for (const auto& p : j.at("points")) {
      points.push_back({p.at("id").get<PointId>(),
                        {p.at("x").get<std::int64_t>(), p.at("y").get<std::int64_t>()},
                        p.at("data_type").get<int>()});
    }
    std::vector<SensorNode> sensors;
    for (const auto& s : j.at("sensors")) {
      sensors.push_back({s.at("id").get<SensorId>(),
                         {s.at("x").get<std::int64_t>(), s.at("y").get<std::int64_t>()},
                         s.at("sensing_range").get<double>(),
                         s.at("comm_range").get<double>(),
                         Rate::from_units(s.at("sensing_capacity").get<double>())});
    }
    std::vector<BaseStation> bases;
    for (const auto& b : j.at("bases")) {
      bases.push_back({b.at("id").get<BaseId>(),
                       {b.at("x").get<std::int64_t>(), b.at("y").get<std::int64_t>()},
                       Rate::from_units(b.at("processing_capacity").get<double>())});
    }
    Topology t(region, caps, std::move(points), std::move(sensors), std::move(bases));
    if (j.contains("seed") && !j["seed"].is_null()) t.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("params") && !j["params"].is_null()) {
      const auto& p = j["params"];
      TopologyParams tp;
      tp.region = {p.at("region").at("width").get<std::int64_t>(),
                   p.at("region").at("height").get<std::int64_t>()};
      tp.points = p.at("points").get<int>();
      tp.sensors = p.at("sensors").get<int>();
      tp.bases = p.at("bases").get<int>();
      tp.sensing_range = {p.at("sensing_range")[0].get<double>(), p.at("sensing_range")[1].get<double>()};
      tp.comm_range = {p.at("comm_range")[0].get<double>(), p.at("comm_range")[1].get<double>()};
      tp.covered_points = p.at("covered_points").get<bool>();
      tp.capacities = caps;
      t.params = tp;
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed topology document: ") + e.what());
  }
}

}  // namespace wsnsched
