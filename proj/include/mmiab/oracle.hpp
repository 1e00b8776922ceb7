#pragma once

// Exhaustive references for tests: maximum independent set, best JSRA plan
// in the heuristic's plan family, bisection water-filling and widest paths.
// All of them refuse instances above their budget instead of running long.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmiab/graphs.hpp"
#include "mmiab/jsra.hpp"

namespace mmiab {

struct OracleBudget {
  std::size_t max_links = 8;
  int max_slots = 8;
  std::size_t max_graph_nodes = 12;
};

class OracleRefusal : public std::length_error {
 public:
  using std::length_error::length_error;
};

namespace detail {

inline void require_budget(bool ok, const std::string& what) {
  if (!ok) throw OracleRefusal("oracle budget exceeded: " + what);
}

inline std::vector<std::uint32_t> neighbor_masks(const ConflictGraph& cg) {
  std::vector<std::uint32_t> m(cg.size(), 0);
  for (std::size_t v = 0; v < cg.size(); ++v)
    for (auto u : cg.neighbors(v)) m[v] |= 1u << u;
  return m;
}

}  // namespace detail

inline std::size_t exhaustive_mis(const ConflictGraph& cg, const OracleBudget& budget = {}) {
  detail::require_budget(cg.size() <= budget.max_graph_nodes, "conflict graph has " + std::to_string(cg.size()) + " vertices");
  const auto nb = detail::neighbor_masks(cg);
  const std::uint32_t all = cg.size() == 0 ? 0 : (1u << cg.size());
  std::size_t best = 0;
  for (std::uint32_t set = 0; set < all; ++set) {
    bool independent = true;
    for (std::size_t v = 0; v < cg.size() && independent; ++v)
      if ((set >> v & 1u) && (nb[v] & set)) independent = false;
    if (independent) best = std::max<std::size_t>(best, std::popcount(set));
  }
  return best;
}

struct OraclePlan {
  double objective = 0.0;  // sum of r_i n^(k)
  SdmaGroups groups;
  std::vector<int> slots;
};

/// Best plan over every partition of the conflict graph's links into
/// independent groups and every integer slot vector with sum <= N. Group
/// rates come from the same water-filling and SINR evaluation the heuristic
/// uses.
inline OraclePlan brute_force_jsra(const ChannelView& view, const ConflictGraph& cg, int slots_per_frame,
                                   const OracleBudget& budget = {}) {
  const std::size_t m = cg.size();
  detail::require_budget(m <= budget.max_links, std::to_string(m) + " links");
  detail::require_budget(slots_per_frame <= budget.max_slots, std::to_string(slots_per_frame) + " slots");
  OraclePlan best;
  if (m == 0) return best;

  const auto nb = detail::neighbor_masks(cg);
  std::map<std::uint32_t, double> group_rate;  // sum of capacities of a group, by member mask
  auto rate_of = [&](std::uint32_t mask) {
    if (auto it = group_rate.find(mask); it != group_rate.end()) return it->second;
    std::vector<LinkId> g;
    for (std::size_t v = 0; v < m; ++v)
      if (mask >> v & 1u) g.push_back(cg.link(v));
    double sum = 0.0;
    for (const auto& lp : evaluate_group(view, g)) sum += lp.capacity;
    return group_rate[mask] = sum;
  };

  std::vector<std::uint32_t> groups;
  std::vector<int> slots;
  std::function<void(std::size_t, int, double)> fill_slots = [&](std::size_t k, int left, double acc) {
    if (k == groups.size()) {
      if (acc > best.objective) {
        best.objective = acc;
        best.slots = slots;
        best.groups.groups.clear();
        for (auto g : groups) {
          std::vector<LinkId> ids;
          for (std::size_t v = 0; v < m; ++v)
            if (g >> v & 1u) ids.push_back(cg.link(v));
          best.groups.groups.push_back(std::move(ids));
        }
      }
      return;
    }
    const double r = rate_of(groups[k]);
    for (int n = 0; n <= left; ++n) {
      slots[k] = n;
      fill_slots(k + 1, left - n, acc + r * n);
    }
  };

  // Restricted-growth enumeration of set partitions, pruned to independent blocks.
  std::function<void(std::size_t)> place = [&](std::size_t v) {
    if (v == m) {
      slots.assign(groups.size(), 0);
      fill_slots(0, slots_per_frame, 0.0);
      return;
    }
    for (std::size_t k = 0; k < groups.size(); ++k) {
      if (nb[v] & groups[k]) continue;
      groups[k] |= 1u << v;
      place(v + 1);
      groups[k] &= ~(1u << v);
    }
    groups.push_back(1u << v);
    place(v + 1);
    groups.pop_back();
  };
  place(0);
  return best;
}

/// Water level found by bisection until the bracket stops shrinking.
inline std::vector<double> waterfill_bisection(std::span<const double> gamma, double p_max) {
  if (gamma.empty()) throw std::invalid_argument("waterfill_bisection: no links");
  for (double g : gamma)
    if (!(g > 0.0)) throw std::invalid_argument("waterfill_bisection: gamma must be positive");
  auto filled = [&](double level) {
    double s = 0.0;
    for (double g : gamma) s += std::max(level - 1.0 / g, 0.0);
    return s;
  };
  double lo = 0.0;
  double hi = p_max + 1.0 / *std::min_element(gamma.begin(), gamma.end());
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi) break;
    (filled(mid) < p_max ? lo : hi) = mid;
  }
  std::vector<double> p;
  for (double g : gamma) p.push_back(std::max(hi - 1.0 / g, 0.0));
  return p;
}

/// Best bottleneck weight over all simple directed paths s -> d.
inline std::optional<double> widest_path_oracle(const LinkGraph& lg, NodeId s, NodeId d,
                                                const OracleBudget& budget = {}) {
  detail::require_budget(lg.vertices().size() <= budget.max_graph_nodes,
                         std::to_string(lg.vertices().size()) + " graph nodes");
  std::optional<double> best;
  std::vector<NodeId> on_path{s};
  std::function<void(NodeId, double)> walk = [&](NodeId v, double w) {
    if (v == d) {
      if (!best || w > *best) best = w;
      return;
    }
    for (const GraphEdge* e : lg.out_edges(v)) {
      if (std::find(on_path.begin(), on_path.end(), e->to) != on_path.end()) continue;
      on_path.push_back(e->to);
      walk(e->to, std::min(w, e->weight));
      on_path.pop_back();
    }
  };
  walk(s, std::numeric_limits<double>::infinity());
  return best;
}

/// Undirected widest-path value via the maximum spanning tree: the weight
/// at which s and d first join when edges are added heaviest first.
inline std::optional<double> spanning_tree_bottleneck(const LinkGraph& lg, NodeId s, NodeId d) {
  std::map<NodeId, NodeId> parent;
  for (NodeId v : lg.vertices()) parent[v] = v;
  std::function<NodeId(NodeId)> root = [&](NodeId v) { return parent[v] == v ? v : parent[v] = root(parent[v]); };
  std::vector<const GraphEdge*> edges;
  for (const auto& e : lg.edges()) edges.push_back(&e);
  std::stable_sort(edges.begin(), edges.end(), [](auto a, auto b) { return a->weight > b->weight; });
  for (const GraphEdge* e : edges) {
    parent[root(e->from)] = root(e->to);
    if (root(s) == root(d)) return e->weight;
  }
  return std::nullopt;
}

}  // namespace mmiab
