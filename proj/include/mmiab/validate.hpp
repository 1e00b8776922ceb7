#pragma once

// Structural checks on a scenario before any stage consumes it.

#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "mmiab/channel.hpp"
#include "mmiab/model.hpp"

namespace mmiab {

namespace detail {

inline void check_params(const SystemParams& p, std::vector<std::string>& out) {
  const std::pair<const char*, double> positive[] = {
      {"frame_length", p.frame_length},
      {"carrier_freq", p.carrier_freq},
      {"light_speed", p.light_speed},
      {"pathloss_exp_los", p.pathloss_exp_los},
      {"pathloss_exp_nlos", p.pathloss_exp_nlos},
      {"shadow_sigma_los_db", p.shadow_sigma_los_db},
      {"shadow_sigma_nlos_db", p.shadow_sigma_nlos_db},
      {"d1", p.d1},
      {"d2", p.d2},
      {"noise_power", p.noise_power},
      {"interference_threshold", p.interference_threshold},
      {"system_bandwidth", p.system_bandwidth},
      {"p_max_bs", p.p_max_bs},
      {"p_max_ap", p.p_max_ap},
      {"p_max_ue", p.p_max_ue},
  };
  for (const auto& [name, value] : positive)
    if (!(value > 0.0)) out.push_back(std::string("param not positive: ") + name);
  if (p.slots_per_frame < 1) out.emplace_back("param not positive: slots_per_frame");
}

}  // namespace detail

/// Invariant check over a scenario. Returns one message per violation; an
/// empty result means the scenario is well formed. Never throws on bad data.
inline std::vector<std::string> validate_scenario(const NetworkScenario& s) {
  std::vector<std::string> out;
  detail::check_params(s.params, out);

  const auto bss = s.nodes_with_role(Role::Bs);
  if (bss.empty()) {
    out.emplace_back("no BS");
  } else if (bss.size() > 1) {
    std::ostringstream os;
    os << "multiple BS:";
    for (auto id : bss) os << ' ' << to_string(id);
    out.push_back(os.str());
  }

  std::set<NodeId> ids;
  for (const auto& n : s.nodes) {
    if (!ids.insert(n.id).second) out.push_back("duplicate node id: " + to_string(n.id));
    if (n.antenna.rows < 1 || n.antenna.cols < 1)
      out.push_back("antenna array empty: " + to_string(n.id));
    if (!(n.p_max > 0.0)) out.push_back("p_max not positive: " + to_string(n.id));
  }

  std::set<std::tuple<NodeId, NodeId, Direction>> seen;
  for (std::size_t i = 0; i < s.links.size(); ++i) {
    const Link& l = s.links[i];
    const std::string name = to_string(l.id);
    if (l.id.value != i) out.push_back("link id does not match its index: " + name);
    if (l.tx == l.rx) out.push_back("link endpoints equal: " + name);
    const Node* tx = s.find_node(l.tx);
    const Node* rx = s.find_node(l.rx);
    if (!tx || !rx) {
      out.push_back("link endpoint absent: " + name);
      continue;
    }
    if (!seen.emplace(l.tx, l.rx, l.direction).second) out.push_back("duplicate link: " + name);
    if (!(l.distance > 0.0)) {
      out.push_back("link distance not positive: " + name);
      continue;
    }
    if (std::abs(l.distance - distance(tx->position, rx->position)) > 1e-6 * l.distance)
      out.push_back("link distance inconsistent with positions: " + name);
    const double expected = pathloss(l.distance, l.los, l.shadow_db, s.params);
    if (std::abs(l.pathloss_linear - expected) > 1e-9 * expected)
      out.push_back("link pathloss inconsistent: " + name);
  }

  const auto bs = s.base_station();
  for (const auto& [ue, route] : s.routes) {
    const std::string name = "route of " + to_string(ue);
    if (route.size() < 2) {
      out.push_back(name + " too short");
      continue;
    }
    if (!bs || (route.front() != *bs && route.back() != *bs))
      out.push_back(name + " does not touch the BS");
    if (route.front() != ue && route.back() != ue) out.push_back(name + " does not end at its UE");
    const bool downlink_first = bs && route.front() == *bs;
    const auto demand = s.traffic.find(ue);
    const bool has_dl = demand == s.traffic.end() || demand->second.downlink.is_active();
    const bool has_ul = demand == s.traffic.end() || demand->second.uplink.is_active();
    for (std::size_t h = 0; h + 1 < route.size(); ++h) {
      const NodeId a = route[h], b = route[h + 1];
      const Direction fwd_dir = downlink_first ? Direction::Downlink : Direction::Uplink;
      const Direction rev_dir = downlink_first ? Direction::Uplink : Direction::Downlink;
      const bool need_fwd = downlink_first ? has_dl : has_ul;
      const bool need_rev = downlink_first ? has_ul : has_dl;
      if ((need_fwd && !s.find_link(a, b, fwd_dir)) || (need_rev && !s.find_link(b, a, rev_dir)))
        out.push_back("route edge absent: " + name + " hop " + std::to_string(h));
    }
  }
  for (const auto& [ue, _] : s.traffic)
    if (!s.routes.contains(ue)) out.push_back("traffic without route: " + to_string(ue));
  return out;
}

}  // namespace mmiab
