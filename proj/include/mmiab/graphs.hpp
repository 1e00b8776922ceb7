#pragma once

// Link graph (directed, weighted by achievable rate) and conflict graph
// (undirected, one vertex per link).

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mmiab/channel.hpp"
#include "mmiab/model.hpp"
#include "mmiab/validate.hpp"

namespace mmiab {

/// Thrown when a stage receives a scenario that fails validation.
class ScenarioError : public std::invalid_argument {
 public:
  explicit ScenarioError(std::vector<std::string> violations)
      : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid scenario";
    for (const auto& s : v) out += "; " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

struct GraphEdge {
  LinkId link;
  NodeId from;
  NodeId to;
  double weight = 0.0;  // bit/s
};

class LinkGraph {
 public:
  LinkGraph() = default;

  void add_vertex(NodeId v) {
    if (index_.contains(v)) return;
    index_.emplace(v, vertices_.size());
    vertices_.push_back(v);
    out_.emplace_back();
  }

  void add_edge(GraphEdge e) {
    add_vertex(e.from);
    add_vertex(e.to);
    out_[index_.at(e.from)].push_back(edges_.size());
    edge_index_[e.link] = edges_.size();
    edges_.push_back(e);
  }

  const std::vector<NodeId>& vertices() const { return vertices_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  bool contains(NodeId v) const { return index_.contains(v); }
  bool has_link(LinkId l) const { return edge_index_.contains(l); }

  /// Outgoing edges of `v`, in insertion order.
  std::vector<const GraphEdge*> out_edges(NodeId v) const {
    std::vector<const GraphEdge*> r;
    if (auto it = index_.find(v); it != index_.end())
      for (auto e : out_[it->second]) r.push_back(&edges_[e]);
    return r;
  }

  const GraphEdge* find_edge(NodeId from, NodeId to) const {
    if (auto it = index_.find(from); it != index_.end())
      for (auto e : out_[it->second])
        if (edges_[e].to == to) return &edges_[e];
    return nullptr;
  }

  double weight(LinkId l) const { return edges_.at(edge_index_.at(l)).weight; }
  void set_weight(LinkId l, double w) { edges_.at(edge_index_.at(l)).weight = w; }

 private:
  std::vector<NodeId> vertices_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<GraphEdge> edges_;
  std::unordered_map<LinkId, std::size_t> edge_index_;
};

/// Pairs that may carry a link: anything touching the BS or an AP, plus
/// vehicle-to-vehicle relays. UE-to-UE links are never admissible.
inline bool admissible_pair(Role a, Role b) {
  if (is_infrastructure(a) || is_infrastructure(b)) return true;
  return a == Role::Vehicle && b == Role::Vehicle;
}

inline LinkGraph build_link_graph(const NetworkScenario& s, const ChannelView& view) {
  if (auto v = validate_scenario(s); !v.empty()) throw ScenarioError(std::move(v));
  LinkGraph g;
  for (const auto& n : s.nodes) g.add_vertex(n.id);
  for (const auto& l : s.links) {
    if (!admissible_pair(view.node(l.tx).role, view.node(l.rx).role)) continue;
    g.add_edge({l.id, l.tx, l.rx, standalone_capacity(l, view)});
  }
  return g;
}

inline LinkGraph build_link_graph(const NetworkScenario& s) {
  const ChannelView view(s);
  return build_link_graph(s, view);
}

/// Whether two links would force a shared node to transmit and receive at
/// once. Full-duplex nodes never produce a sequential conflict.
inline bool is_sequential(const Link& i, const Link& j, const ChannelView& view) {
  auto clash_at = [&](NodeId n) {
    const bool i_in = i.rx == n, i_out = i.tx == n;
    const bool j_in = j.rx == n, j_out = j.tx == n;
    const bool clash = (i_in && j_out) || (i_out && j_in);
    return clash && view.node(n).duplex == Duplex::Half;
  };
  return clash_at(i.tx) || clash_at(i.rx);
}

inline bool is_sequential(const Link& i, const Link& j, const NetworkScenario& s) {
  return is_sequential(i, j, ChannelView(s));
}

/// Undirected conflict graph. Vertices are kept sorted by link id; local
/// vertex indices follow that order.
class ConflictGraph {
 public:
  ConflictGraph() = default;

  explicit ConflictGraph(std::vector<LinkId> vertices) : vertices_(std::move(vertices)) {
    std::sort(vertices_.begin(), vertices_.end());
    vertices_.erase(std::unique(vertices_.begin(), vertices_.end()), vertices_.end());
    adj_.assign(vertices_.size(), {});
  }

  /// Graph on links 0..n-1; handy for synthetic instances.
  static ConflictGraph with_vertices(std::size_t n) {
    std::vector<LinkId> v;
    for (std::uint32_t i = 0; i < n; ++i) v.emplace_back(i);
    return ConflictGraph(std::move(v));
  }

  /// Adds an undirected edge between local indices; self-loops and repeats are ignored.
  void add_edge(std::size_t a, std::size_t b) {
    if (a == b || has_edge(a, b)) return;
    insert_sorted(adj_.at(a), static_cast<std::uint32_t>(b));
    insert_sorted(adj_.at(b), static_cast<std::uint32_t>(a));
    ++edge_count_;
  }

  bool has_edge(std::size_t a, std::size_t b) const {
    const auto& n = adj_.at(a);
    return std::binary_search(n.begin(), n.end(), static_cast<std::uint32_t>(b));
  }

  std::size_t size() const { return vertices_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::vector<LinkId>& vertices() const { return vertices_; }
  LinkId link(std::size_t v) const { return vertices_.at(v); }
  std::size_t degree(std::size_t v) const { return adj_.at(v).size(); }
  const std::vector<std::uint32_t>& neighbors(std::size_t v) const { return adj_.at(v); }

  std::optional<std::size_t> index_of(LinkId l) const {
    auto it = std::lower_bound(vertices_.begin(), vertices_.end(), l);
    if (it == vertices_.end() || *it != l) return std::nullopt;
    return static_cast<std::size_t>(it - vertices_.begin());
  }

  std::size_t max_degree() const {
    std::size_t d = 0;
    for (const auto& n : adj_) d = std::max(d, n.size());
    return d;
  }

  double average_degree() const {
    return vertices_.empty() ? 0.0 : 2.0 * static_cast<double>(edge_count_) / vertices_.size();
  }

 private:
  static void insert_sorted(std::vector<std::uint32_t>& v, std::uint32_t x) {
    v.insert(std::lower_bound(v.begin(), v.end(), x), x);
  }

  std::vector<LinkId> vertices_;
  std::vector<std::vector<std::uint32_t>> adj_;
  std::size_t edge_count_ = 0;
};

/// Conflict rule for one link pair: sequential, or either link at full power
/// leaking more than the interference threshold into the other's receiver.
inline bool links_conflict(const Link& a, const Link& b, const ChannelView& view) {
  if (is_sequential(a, b, view)) return true;
  const double sigma = view.params().interference_threshold;
  return view.interference_at(a, b, view.node(b.tx).p_max) > sigma ||
         view.interference_at(b, a, view.node(a.tx).p_max) > sigma;
}

/// Conflict graph over a subset of the scenario's links.
inline ConflictGraph build_conflict_graph(const ChannelView& view, std::span<const LinkId> active) {
  ConflictGraph cg(std::vector<LinkId>(active.begin(), active.end()));
  const auto& s = view.scenario();
  for (std::size_t a = 0; a < cg.size(); ++a) {
    const Link& la = s.link(cg.link(a));
    for (std::size_t b = a + 1; b < cg.size(); ++b)
      if (links_conflict(la, s.link(cg.link(b)), view)) cg.add_edge(a, b);
  }
  return cg;
}

/// Conflict graph over every edge of a link graph built from `s`.
inline ConflictGraph build_conflict_graph(const NetworkScenario& s, const LinkGraph& lg) {
  const ChannelView view(s);
  std::vector<LinkId> active;
  for (const auto& e : lg.edges()) active.push_back(e.link);
  return build_conflict_graph(view, active);
}

/// Plain edge list: a comment header, then one "u v" pair of link ids per line.
inline void write_edge_list(std::ostream& os, const ConflictGraph& cg) {
  os << "# conflict graph: " << cg.size() << " vertices, " << cg.edge_count() << " edges\n";
  for (std::size_t a = 0; a < cg.size(); ++a)
    for (auto b : cg.neighbors(a))
      if (a < b) os << cg.link(a).value << ' ' << cg.link(b).value << '\n';
}

}  // namespace mmiab
