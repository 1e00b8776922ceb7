#pragma once

// Domain types shared by every stage of the IAB engine: system parameters,
// nodes, links, routes and per-UE traffic.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace mmiab {

template <typename Tag>
struct StrongId {
  std::uint32_t value = 0;

  constexpr StrongId() = default;
  constexpr explicit StrongId(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(StrongId, StrongId) = default;
};

using NodeId = StrongId<struct NodeTag>;
using LinkId = StrongId<struct LinkTag>;

enum class Role { Bs, Ap, Ue, Vehicle };
enum class Duplex { Half, FullPerfect, FullResidual };
enum class Direction { Downlink, Uplink };

/// Parameter set of the system model. Units are SI throughout.
struct SystemParams {
  double frame_length = 10e-3;           // s
  double carrier_freq = 28e9;            // Hz
  double light_speed = 3e8;              // m/s
  double pathloss_exp_los = 2.1;
  double pathloss_exp_nlos = 3.17;
  double shadow_sigma_los_db = 2.38;
  double shadow_sigma_nlos_db = 6.44;
  double d1 = 20.0;                      // m
  double d2 = 39.0;                      // m
  double noise_power = 2e-11;            // W
  double interference_threshold = 1e-8;  // W
  double system_bandwidth = 1e9;         // Hz
  int slots_per_frame = 100;
  double p_max_bs = 1.0;                 // W
  double p_max_ap = 1.0;                 // W
  double p_max_ue = 0.1;                 // W
  double sidelobe_gain = 0.1;            // linear, -10 dB
  double self_interference_coupling = 1e-11;  // -110 dB

  double slot_duration() const { return frame_length / slots_per_frame; }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

struct AntennaArray {
  int rows = 1;
  int cols = 1;

  int elements() const { return rows * cols; }

  friend bool operator==(const AntennaArray&, const AntennaArray&) = default;
};

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

inline double distance(Position a, Position b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline AntennaArray default_antenna(Role role) {
  switch (role) {
    case Role::Bs:
    case Role::Ap:
      return {16, 8};
    case Role::Ue:
    case Role::Vehicle:
      return {4, 4};
  }
  return {4, 4};
}

inline double default_p_max(Role role, const SystemParams& params) {
  switch (role) {
    case Role::Bs:
      return params.p_max_bs;
    case Role::Ap:
      return params.p_max_ap;
    case Role::Ue:
    case Role::Vehicle:
      return params.p_max_ue;
  }
  return params.p_max_ue;
}

inline bool is_infrastructure(Role role) { return role == Role::Bs || role == Role::Ap; }

struct Node {
  NodeId id;
  Role role = Role::Ue;
  Position position;
  AntennaArray antenna;
  double p_max = 0.1;
  Duplex duplex = Duplex::Half;

  friend bool operator==(const Node&, const Node&) = default;
};

inline Node make_node(NodeId id, Role role, Position pos, const SystemParams& params,
                      Duplex duplex = Duplex::Half) {
  return Node{id, role, pos, default_antenna(role), default_p_max(role, params), duplex};
}

/// Per-frame traffic volume: either full buffer or a finite number of bits.
class Demand {
 public:
  static Demand full_buffer() { return Demand{}; }
  static Demand bits(double b) { return Demand{b}; }

  bool is_full_buffer() const { return !bits_.has_value(); }
  double finite_bits() const { return bits_.value_or(0.0); }
  bool is_active() const { return is_full_buffer() || finite_bits() > 0.0; }

  friend bool operator==(const Demand&, const Demand&) = default;

 private:
  Demand() = default;
  explicit Demand(double b) : bits_(b) {}
  std::optional<double> bits_;
};

struct Link {
  LinkId id;
  NodeId tx;
  NodeId rx;
  double distance = 0.0;         // m
  bool los = true;
  double shadow_db = 0.0;        // dB
  double pathloss_linear = 1.0;  // >= 1
  Direction direction = Direction::Downlink;
  Demand demand = Demand::full_buffer();

  friend bool operator==(const Link&, const Link&) = default;
};

/// Downlink and uplink demand of one UE flow pair.
struct FlowDemand {
  Demand downlink = Demand::full_buffer();
  Demand uplink = Demand::full_buffer();

  friend bool operator==(const FlowDemand&, const FlowDemand&) = default;
};

/// Routes are stored in downlink orientation: BS first, UE last. Uplink
/// traffic of the same UE walks the path in reverse.
using Route = std::vector<NodeId>;

struct NetworkScenario {
  SystemParams params;
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::map<NodeId, Route> routes;
  std::map<NodeId, FlowDemand> traffic;
  std::uint64_t rng_seed = 0;

  const Node* find_node(NodeId id) const {
    auto it = std::find_if(nodes.begin(), nodes.end(), [id](const Node& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
  }

  const Link* find_link(NodeId tx, NodeId rx) const {
    auto it = std::find_if(links.begin(), links.end(),
                           [&](const Link& l) { return l.tx == tx && l.rx == rx; });
    return it == links.end() ? nullptr : &*it;
  }

  const Link* find_link(NodeId tx, NodeId rx, Direction dir) const {
    auto it = std::find_if(links.begin(), links.end(),
                           [&](const Link& l) { return l.tx == tx && l.rx == rx && l.direction == dir; });
    return it == links.end() ? nullptr : &*it;
  }

  const Link& link(LinkId id) const { return links.at(id.value); }

  std::optional<NodeId> base_station() const {
    for (const auto& n : nodes)
      if (n.role == Role::Bs) return n.id;
    return std::nullopt;
  }

  std::vector<NodeId> nodes_with_role(Role role) const {
    std::vector<NodeId> out;
    for (const auto& n : nodes)
      if (n.role == role) out.push_back(n.id);
    return out;
  }

  friend bool operator==(const NetworkScenario&, const NetworkScenario&) = default;
};

inline std::string to_string(Role r) {
  switch (r) {
    case Role::Bs: return "BS";
    case Role::Ap: return "AP";
    case Role::Ue: return "UE";
    case Role::Vehicle: return "Vehicle";
  }
  return "?";
}

inline std::string to_string(Duplex d) {
  switch (d) {
    case Duplex::Half: return "Half";
    case Duplex::FullPerfect: return "FullPerfect";
    case Duplex::FullResidual: return "FullResidual";
  }
  return "?";
}

inline std::string to_string(Direction d) {
  return d == Direction::Downlink ? "Downlink" : "Uplink";
}

inline std::string to_string(NodeId id) { return "node " + std::to_string(id.value); }
inline std::string to_string(LinkId id) { return "link " + std::to_string(id.value); }

}  // namespace mmiab

template <typename Tag>
struct std::hash<mmiab::StrongId<Tag>> {
  std::size_t operator()(mmiab::StrongId<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
