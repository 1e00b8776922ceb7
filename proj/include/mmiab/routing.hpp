#pragma once

// Bottleneck path selection by layered expansion, and the dynamic-routing
// loop that commits one UE at a time and refreshes link rates in between.

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "mmiab/flows.hpp"
#include "mmiab/graphs.hpp"
#include "mmiab/jsra.hpp"

namespace mmiab {

struct RoutePath {
  std::vector<NodeId> nodes;  // source first; empty when no path exists
  double weight = 0.0;        // bit/s, smallest edge weight along the path

  bool found() const { return !nodes.empty(); }
  std::size_t hops() const { return nodes.empty() ? 0 : nodes.size() - 1; }
};

/// Layered bottleneck search from `s` to `d`. Frontier vertices are expanded
/// in ascending id order. A neighbour whose path weight ties keeps every
/// parent; a strictly better candidate replaces the parents and the weight.
/// The walk back from `d` prefers the parent with the fewest hops to `s`,
/// then the lowest id.
inline RoutePath select_path(const LinkGraph& lg, NodeId s, NodeId d) {
  if (s == d) throw std::invalid_argument("select_path: source equals destination");
  if (!lg.contains(s) || !lg.contains(d)) throw std::invalid_argument("select_path: endpoint not in graph");

  std::unordered_map<NodeId, double> w;  // absent = infinity (not reached)
  std::unordered_map<NodeId, std::vector<NodeId>> parents;
  std::set<NodeId> traversed, current{s}, next;

  auto weight_of = [&](NodeId v) {
    if (v == s) return std::numeric_limits<double>::infinity();
    return w.at(v);
  };

  while (!current.empty()) {
    for (NodeId v : current) {
      auto out = lg.out_edges(v);
      std::stable_sort(out.begin(), out.end(), [](auto a, auto b) { return a->to < b->to; });
      for (const GraphEdge* e : out) {
        const NodeId u = e->to;
        if (u == s || traversed.contains(u)) continue;
        const double cand = std::min(e->weight, weight_of(v));
        auto it = w.find(u);
        if (it == w.end() || it->second == cand) {
          w[u] = cand;
          auto& p = parents[u];
          if (std::find(p.begin(), p.end(), v) == p.end()) p.push_back(v);
          next.insert(u);
        } else if (it->second < cand) {
          it->second = cand;
          parents[u] = {v};
          next.insert(u);
        }
      }
      traversed.insert(v);
    }
    current.clear();
    for (NodeId v : next)
      if (!traversed.contains(v)) current.insert(v);
    next.clear();
  }

  if (!w.contains(d)) return {};

  // A parent is always traversed before its child, so the hop counts below
  // are well founded.
  std::unordered_map<NodeId, std::pair<std::size_t, NodeId>> best;  // hops, chosen parent
  std::function<std::size_t(NodeId)> hops_to = [&](NodeId v) -> std::size_t {
    if (v == s) return 0;
    if (auto it = best.find(v); it != best.end()) return it->second.first;
    std::optional<std::pair<std::size_t, NodeId>> pick;
    for (NodeId p : parents.at(v)) {
      const std::pair<std::size_t, NodeId> c{hops_to(p) + 1, p};
      if (!pick || c < *pick) pick = c;
    }
    best.emplace(v, *pick);
    return pick->first;
  };
  hops_to(d);

  RoutePath path;
  for (NodeId v = d;; v = best.at(v).second) {
    path.nodes.push_back(v);
    if (v == s) break;
  }
  std::reverse(path.nodes.begin(), path.nodes.end());
  path.weight = std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h + 1 < path.nodes.size(); ++h) {
    double hop = 0.0;
    for (const GraphEdge* e : lg.out_edges(path.nodes[h]))
      if (e->to == path.nodes[h + 1]) hop = std::max(hop, e->weight);
    path.weight = std::min(path.weight, hop);
  }
  return path;
}

namespace detail {

inline std::map<LinkId, int> nominal_requirements(const std::vector<LinkId>& links,
                                                  const std::map<LinkId, int>& committed) {
  std::map<LinkId, int> req;
  for (LinkId l : links) req[l] = 1;
  for (const auto& [l, n] : committed) req[l] = n;
  return req;
}

}  // namespace detail

/// Link graph of every admissible link with refreshed weights. Without
/// committed routes a link weighs its standalone rate; otherwise the JSRA
/// pipeline runs over committed and candidate links together, and a link
/// weighs its rate under that plan.
inline LinkGraph update_network(const NetworkScenario& s, const ChannelView& view,
                                const std::map<NodeId, Route>& committed) {
  LinkGraph lg = build_link_graph(s, view);
  if (committed.empty()) return lg;
  const auto flows = build_flows(s, committed);
  std::vector<LinkId> all;
  for (const auto& e : lg.edges()) all.push_back(e.link);
  const auto req = detail::nominal_requirements(all, flow_requirements(flows, view));
  const SchedulePlan plan = plan_jsra(view, all, req);
  for (LinkId l : all) lg.set_weight(l, plan.rate(l));
  return lg;
}

inline LinkGraph update_network(const NetworkScenario& s, const std::map<NodeId, Route>& committed) {
  const ChannelView view(s);
  return update_network(s, view, committed);
}

/// Path-selection graph in downlink orientation: a -> b weighs the smaller
/// of the downlink link a -> b and the uplink link b -> a.
inline LinkGraph route_graph(const NetworkScenario& s, const LinkGraph& weights) {
  LinkGraph g;
  for (const auto& n : s.nodes) g.add_vertex(n.id);
  for (const auto& e : weights.edges()) {
    const Link& l = s.link(e.link);
    if (l.direction != Direction::Downlink) continue;
    double wgt = e.weight;
    if (const Link* back = s.find_link(l.rx, l.tx, Direction::Uplink); back && weights.has_link(back->id))
      wgt = std::min(wgt, weights.weight(back->id));
    g.add_edge({l.id, l.tx, l.rx, wgt});
  }
  return g;
}

struct RoutingResult {
  std::map<NodeId, RoutePath> paths;
  std::vector<NodeId> unrouted;

  std::map<NodeId, Route> routes() const {
    std::map<NodeId, Route> out;
    for (const auto& [ue, p] : paths) out[ue] = p.nodes;
    return out;
  }
};

/// Routes UEs one by one in the given order. The candidate conflict graph
/// and group rates do not depend on the commitments, so they are computed
/// once; each commitment only moves the slot split.
inline RoutingResult dynamic_routing(const NetworkScenario& s, const std::vector<NodeId>& ues) {
  const ChannelView view(s);
  const auto bs = s.base_station();
  if (!bs) throw ScenarioError({"no BS"});

  LinkGraph weights = build_link_graph(s, view);
  std::vector<LinkId> all;
  for (const auto& e : weights.edges()) all.push_back(e.link);
  std::optional<SchedulePlan> base;

  RoutingResult out;
  std::map<NodeId, Route> committed;
  for (NodeId ue : ues) {
    const RoutePath p = select_path(route_graph(s, weights), *bs, ue);
    if (!p.found()) {
      out.unrouted.push_back(ue);
      continue;
    }
    out.paths[ue] = p;
    committed[ue] = p.nodes;

    const auto flows = build_flows(s, committed);
    const auto req = detail::nominal_requirements(all, flow_requirements(flows, view));
    if (!base) base = plan_jsra(view, all, req);
    SchedulePlan plan = *base;
    plan.group_slots = allocate_slots(plan.groups, req, view.params().slots_per_frame).per_group_slots;
    for (auto& lp : plan.links) lp.slots = plan.group_slots[lp.group];
    for (LinkId l : all) weights.set_weight(l, plan.rate(l));
  }
  return out;
}

/// Ascending-id order over every UE in the scenario.
inline RoutingResult dynamic_routing(const NetworkScenario& s) {
  auto ues = s.nodes_with_role(Role::Ue);
  std::sort(ues.begin(), ues.end());
  return dynamic_routing(s, ues);
}

}  // namespace mmiab
