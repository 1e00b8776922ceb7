#pragma once

// Per-UE flows over routes: which links each flow crosses, how much demand
// lands on each link, and how link rates turn into UE rates.

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "mmiab/channel.hpp"
#include "mmiab/model.hpp"
#include "mmiab/resources.hpp"

namespace mmiab {

struct Flow {
  NodeId ue;
  Direction direction = Direction::Downlink;
  Demand demand = Demand::full_buffer();
  std::vector<LinkId> hops;  // in transmission order
};

/// Traffic of a UE without an explicit traffic entry: full buffer both ways.
inline FlowDemand traffic_of(const NetworkScenario& s, NodeId ue) {
  auto it = s.traffic.find(ue);
  return it == s.traffic.end() ? FlowDemand{} : it->second;
}

/// Flows of one UE over `route` (BS first). Throws if a needed link is missing.
inline std::vector<Flow> flows_for(const NetworkScenario& s, NodeId ue, const Route& route) {
  if (route.size() < 2) throw std::invalid_argument("route of " + to_string(ue) + " too short");
  std::vector<Flow> out;
  const FlowDemand t = traffic_of(s, ue);
  auto hop = [&](NodeId a, NodeId b, Direction d) {
    const Link* l = s.find_link(a, b, d);
    if (!l) throw std::invalid_argument("no " + to_string(d) + " link " + std::to_string(a.value) + "->" +
                                        std::to_string(b.value) + " on route of " + to_string(ue));
    return l->id;
  };
  if (t.downlink.is_active()) {
    Flow f{ue, Direction::Downlink, t.downlink, {}};
    for (std::size_t h = 0; h + 1 < route.size(); ++h) f.hops.push_back(hop(route[h], route[h + 1], Direction::Downlink));
    out.push_back(std::move(f));
  }
  if (t.uplink.is_active()) {
    Flow f{ue, Direction::Uplink, t.uplink, {}};
    for (std::size_t h = route.size() - 1; h > 0; --h) f.hops.push_back(hop(route[h], route[h - 1], Direction::Uplink));
    out.push_back(std::move(f));
  }
  return out;
}

inline std::vector<Flow> build_flows(const NetworkScenario& s, const std::map<NodeId, Route>& routes) {
  std::vector<Flow> out;
  for (const auto& [ue, route] : routes)
    for (auto& f : flows_for(s, ue, route)) out.push_back(std::move(f));
  return out;
}

inline std::map<LinkId, int> flow_counts(const std::vector<Flow>& flows) {
  std::map<LinkId, int> n;
  for (const auto& f : flows)
    for (LinkId l : f.hops) ++n[l];
  return n;
}

/// Links carried by at least one flow, ascending.
inline std::vector<LinkId> active_links(const std::vector<Flow>& flows) {
  std::vector<LinkId> out;
  for (const auto& [l, _] : flow_counts(flows)) out.push_back(l);
  return out;
}

/// Slot requirement of every link crossed by a flow. A link carrying any
/// full-buffer flow needs one nominal slot; finite flows add their bits.
inline std::map<LinkId, int> flow_requirements(const std::vector<Flow>& flows, const ChannelView& view) {
  std::map<LinkId, int> full;
  std::map<LinkId, double> bits;
  for (const auto& f : flows)
    for (LinkId l : f.hops) {
      if (f.demand.is_full_buffer()) full[l] = 1;
      else bits[l] += f.demand.finite_bits();
    }
  const auto& s = view.scenario();
  const int n = view.params().slots_per_frame;
  std::map<LinkId, int> out;
  for (const auto& f : flows)
    for (LinkId l : f.hops) {
      if (out.contains(l)) continue;
      int need = full[l];
      if (bits[l] > 0.0)
        need += required_slots_for(Demand::bits(bits[l]), standalone_capacity(s.link(l), view), view.params());
      out[l] = std::clamp(need, 1, n);
    }
  return out;
}

/// Rate each UE gets: per flow, the smallest per-flow share along its hops,
/// summed over the UE's flows. Link shares are split evenly among flows.
template <typename RateOf>
std::map<NodeId, double> ue_rates(const std::vector<Flow>& flows, RateOf&& rate_of) {
  const auto counts = flow_counts(flows);
  std::map<NodeId, double> out;
  for (const auto& f : flows) {
    double r = std::numeric_limits<double>::infinity();
    for (LinkId l : f.hops) r = std::min(r, rate_of(l) / counts.at(l));
    out[f.ue] += f.hops.empty() ? 0.0 : r;
  }
  return out;
}

}  // namespace mmiab
