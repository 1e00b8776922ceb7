#pragma once

// Scenario generators: a Manhattan grid HetNet and a vehicle platoon.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "mmiab/channel.hpp"
#include "mmiab/model.hpp"

namespace mmiab {

struct ManhattanConfig {
  int blocks = 2;               // blocks per side
  double block_length = 200.0;  // m, crossroad spacing
  double street_width = 30.0;   // m
  int ue_count = 100;
  Duplex ap_duplex = Duplex::Half;
  Duplex bs_duplex = Duplex::Half;
  FlowDemand traffic;
};

struct PlatoonConfig {
  int vehicles = 10;
  double speed_kmh = 50.0;
  int bt_enabled = 0;
  Duplex bt_mode = Duplex::FullPerfect;
  FlowDemand traffic;
};

namespace detail {

class ScenarioBuilder {
 public:
  explicit ScenarioBuilder(NetworkScenario& s) : s_(s) {}

  NodeId add_node(Role role, Position pos, Duplex duplex = Duplex::Half) {
    const NodeId id{static_cast<std::uint32_t>(s_.nodes.size())};
    s_.nodes.push_back(make_node(id, role, pos, s_.params, duplex));
    return id;
  }

  /// One link a -> b sharing the pair's channel state with its reverse.
  void add_link(NodeId a, NodeId b, Direction dir) {
    const Node& na = s_.nodes.at(a.value);
    const Node& nb = s_.nodes.at(b.value);
    Link l;
    l.id = LinkId{static_cast<std::uint32_t>(s_.links.size())};
    l.tx = a;
    l.rx = b;
    l.distance = distance(na.position, nb.position);
    const LinkState st = pair_state(s_.rng_seed, a, b, l.distance, s_.params);
    l.los = st.los;
    l.shadow_db = st.shadow_db;
    l.pathloss_linear = pathloss(l.distance, l.los, l.shadow_db, s_.params);
    l.direction = dir;
    s_.links.push_back(l);
  }

  /// Downlink a -> b plus uplink b -> a.
  void add_pair(NodeId a, NodeId b) {
    add_link(a, b, Direction::Downlink);
    add_link(b, a, Direction::Uplink);
  }

 private:
  NetworkScenario& s_;
};

}  // namespace detail

/// Square grid of blocks. The BS sits on the centre crossroad and one AP on
/// every crossroad; the AP sharing the BS crossroad is moved to the corner
/// of the intersection. UEs are dropped uniformly on the streets and attach
/// to the closest AP or the BS. Corner APs reach the BS through either of
/// their two neighbouring APs.
inline NetworkScenario generate_manhattan(const ManhattanConfig& cfg, const SystemParams& params,
                                          std::uint64_t seed) {
  if (cfg.blocks < 1 || cfg.block_length <= 0.0 || cfg.street_width <= 0.0 || cfg.ue_count < 0)
    throw std::invalid_argument("generate_manhattan: bad grid dimensions");
  if (cfg.blocks % 2 != 0) throw std::invalid_argument("generate_manhattan: blocks must be even");

  NetworkScenario s;
  s.params = params;
  s.rng_seed = seed;
  detail::ScenarioBuilder b(s);

  const int side = cfg.blocks + 1;
  const int mid = cfg.blocks / 2;
  const double half = cfg.street_width / 2.0;
  auto crossroad = [&](int i, int j) { return Position{i * cfg.block_length, j * cfg.block_length}; };

  const NodeId bs = b.add_node(Role::Bs, crossroad(mid, mid), cfg.bs_duplex);
  std::vector<NodeId> ap_at(side * side);
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      Position p = crossroad(i, j);
      if (i == mid && j == mid) p = {p.x + half, p.y + half};
      ap_at[j * side + i] = b.add_node(Role::Ap, p, cfg.ap_duplex);
    }

  std::mt19937_64 rng(seed);
  const double lo = -half, hi = cfg.blocks * cfg.block_length + half;
  std::uniform_real_distribution<double> coord(lo, hi);
  auto on_street = [&](Position p) {
    auto near_line = [&](double v) {
      const double k = std::round(v / cfg.block_length);
      return std::abs(v - k * cfg.block_length) <= half;
    };
    return near_line(p.x) || near_line(p.y);
  };
  std::vector<std::pair<NodeId, NodeId>> access;  // infrastructure, UE
  for (int u = 0; u < cfg.ue_count; ++u) {
    Position p;
    NodeId serving;
    for (;;) {
      p = {coord(rng), coord(rng)};
      if (!on_street(p)) continue;
      double best = std::numeric_limits<double>::infinity();
      for (std::uint32_t n = 0; n <= ap_at.size(); ++n) {
        const double d = distance(p, s.nodes[n].position);
        if (d < best) best = d, serving = NodeId{n};
      }
      if (best >= 1.0) break;
    }
    const NodeId ue = b.add_node(Role::Ue, p);
    access.emplace_back(serving, ue);
  }

  // Backhaul follows the streets: a node links to the crossroads next to
  // it, and the BS also to the AP on its own crossroad.
  std::map<NodeId, std::vector<NodeId>> backhaul;
  auto connect = [&](NodeId a, NodeId c) {
    backhaul[a].push_back(c);
    backhaul[c].push_back(a);
  };
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      const NodeId a = ap_at[j * side + i];
      if (std::abs(i - mid) + std::abs(j - mid) <= 1) {
        b.add_pair(bs, a);
        connect(bs, a);
      }
    }
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      const NodeId a = ap_at[j * side + i];
      auto relay = [&](NodeId other) {
        b.add_pair(a, other);
        b.add_pair(other, a);
        connect(a, other);
      };
      if (i + 1 < side) relay(ap_at[j * side + i + 1]);
      if (j + 1 < side) relay(ap_at[(j + 1) * side + i]);
    }

  // Shortest-hop backhaul from the BS; among equal hop counts the
  // lowest-id parent wins.
  std::map<NodeId, NodeId> parent;
  std::vector<NodeId> layer{bs};
  parent[bs] = bs;
  while (!layer.empty()) {
    std::vector<NodeId> next;
    for (NodeId v : layer) {
      auto nb = backhaul[v];
      std::sort(nb.begin(), nb.end());
      for (NodeId u : nb)
        if (!parent.contains(u)) parent[u] = v, next.push_back(u);
    }
    std::sort(next.begin(), next.end());
    layer = std::move(next);
  }
  auto backhaul_route = [&](NodeId infra) {
    Route r;
    for (NodeId v = infra; v != bs; v = parent.at(v)) r.push_back(v);
    r.push_back(bs);
    std::reverse(r.begin(), r.end());
    return r;
  };

  for (auto [infra, ue] : access) {
    b.add_pair(infra, ue);
    Route r = backhaul_route(infra);
    r.push_back(ue);
    s.routes[ue] = std::move(r);
    s.traffic[ue] = cfg.traffic;
  }
  return s;
}

/// Gap between platoon vehicles: speed in m/s times two seconds.
inline double platoon_spacing(double speed_kmh) { return speed_kmh / 3.6 * 2.0; }

/// Vehicles in a line behind the BS, spaced speed (m/s) x 2 apart. Vehicle
/// k is reached through vehicles 1..k-1; the first `bt_enabled` vehicles
/// receive and transmit at once.
inline NetworkScenario generate_platoon(const PlatoonConfig& cfg, const SystemParams& params,
                                        std::uint64_t seed) {
  if (cfg.vehicles < 2) throw std::invalid_argument("generate_platoon: need at least two vehicles");
  if (cfg.speed_kmh <= 0.0) throw std::invalid_argument("generate_platoon: speed must be positive");
  if (cfg.bt_enabled < 0 || cfg.bt_enabled > cfg.vehicles)
    throw std::invalid_argument("generate_platoon: bt_enabled out of range");

  NetworkScenario s;
  s.params = params;
  s.rng_seed = seed;
  detail::ScenarioBuilder b(s);

  const double spacing = platoon_spacing(cfg.speed_kmh);
  const NodeId bs = b.add_node(Role::Bs, {0.0, 0.0});
  std::vector<NodeId> v;
  for (int k = 1; k <= cfg.vehicles; ++k)
    v.push_back(b.add_node(Role::Vehicle, {k * spacing, 0.0}, k <= cfg.bt_enabled ? cfg.bt_mode : Duplex::Half));

  for (NodeId x : v) b.add_pair(bs, x);
  for (std::size_t k = 0; k + 1 < v.size(); ++k) b.add_pair(v[k], v[k + 1]);

  Route chain{bs};
  for (NodeId x : v) {
    chain.push_back(x);
    s.routes[x] = chain;
    s.traffic[x] = cfg.traffic;
  }
  return s;
}

}  // namespace mmiab
