#pragma once

// Acceptance suite. Each criterion returns PASS/FAIL plus the measured
// figures; `verify` runs all of them at desk scale.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mmiab/experiment.hpp"
#include "mmiab/oracle.hpp"
#include "mmiab/routing.hpp"
#include "mmiab/scenarios.hpp"

namespace mmiab {

using PowerAllocator = std::function<PowerSlice(std::span<const double>, double)>;

struct VerifyOptions {
  std::uint64_t seed = 2024;
  int threads = 1;
  double scale = 1.0;        // multiplies instance and snapshot counts
  PowerAllocator allocator;  // water-filling under test; empty = allocate_power
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Water-filling with a deliberate error, used to check that the suite
/// catches a broken allocator.
inline PowerSlice faulty_allocate_power(std::span<const double> gamma, double p_max) {
  PowerSlice s = allocate_power(gamma, p_max);
  if (s.power.size() > 1) {
    const auto hi = static_cast<std::size_t>(std::max_element(s.power.begin(), s.power.end()) - s.power.begin());
    const double moved = std::min(0.05 * p_max, s.power[hi]);
    s.power[hi] -= moved;
    s.power[(hi + 1) % s.power.size()] += moved;
  }
  return s;
}

namespace detail {

inline int scaled(int n, const VerifyOptions& o) { return std::max(1, static_cast<int>(std::lround(n * o.scale))); }

inline std::string fmt(double v, int precision = 4) {
  std::ostringstream ss;
  ss << std::setprecision(precision) << v;
  return ss.str();
}

inline ConflictGraph random_graph(std::mt19937_64& rng, std::size_t n, double p) {
  auto cg = ConflictGraph::with_vertices(n);
  std::bernoulli_distribution edge(p);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (edge(rng)) cg.add_edge(a, b);
  return cg;
}

/// Random micro network: one BS, up to two APs and up to three UEs in a
/// 150 m square, with up to `max_links` admissible links.
inline NetworkScenario micro_instance(std::mt19937_64& rng, std::size_t max_links, int slots) {
  NetworkScenario s;
  s.params.slots_per_frame = slots;
  s.rng_seed = rng();
  ScenarioBuilder b(s);
  std::uniform_real_distribution<double> coord(0.0, 150.0);
  std::uniform_int_distribution<int> count(1, 2), ues(1, 3);
  b.add_node(Role::Bs, {coord(rng), coord(rng)});
  const int aps = count(rng);
  for (int k = 0; k < aps; ++k) b.add_node(Role::Ap, {coord(rng), coord(rng)});
  const int n_ue = ues(rng);
  for (int k = 0; k < n_ue; ++k) b.add_node(Role::Ue, {coord(rng), coord(rng)});

  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (const auto& a : s.nodes)
    for (const auto& c : s.nodes)
      if (a.id != c.id && admissible_pair(a.role, c.role)) pairs.emplace_back(a.id, c.id);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  std::uniform_int_distribution<std::size_t> links(1, max_links);
  pairs.resize(std::min(pairs.size(), links(rng)));
  for (auto [tx, rx] : pairs) {
    const bool up = s.nodes[tx.value].role == Role::Ue || s.nodes[rx.value].role == Role::Bs;
    b.add_link(tx, rx, up ? Direction::Uplink : Direction::Downlink);
  }
  return s;
}

/// Random directed graph on 2..10 nodes; node 0 is the source and the last
/// node the destination. `layered` puts the nodes into consecutive layers
/// with edges only from one layer to the next.
inline LinkGraph random_link_graph(std::mt19937_64& rng, bool layered) {
  std::uniform_int_distribution<int> size(2, 10);
  const int n = size(rng);
  std::uniform_real_distribution<double> prob(0.15, 0.6);
  std::bernoulli_distribution edge(prob(rng));
  std::uniform_int_distribution<int> weight(1, 20);
  std::vector<int> layer(n, 0);
  if (layered) {
    // source alone in layer 0, destination alone in the last layer
    std::uniform_int_distribution<int> width(1, 3);
    int next = 1, depth = 1;
    while (next < n - 1) {
      const int w = std::min(width(rng), n - 1 - next);
      for (int k = 0; k < w; ++k) layer[next++] = depth;
      ++depth;
    }
    layer[n - 1] = depth;
  }
  LinkGraph g;
  for (int v = 0; v < n; ++v) g.add_vertex(NodeId{static_cast<std::uint32_t>(v)});
  std::uint32_t id = 0;
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      if (a == c || (layered && layer[c] != layer[a] + 1)) continue;
      if (!edge(rng)) continue;
      g.add_edge({LinkId{id++}, NodeId{static_cast<std::uint32_t>(a)}, NodeId{static_cast<std::uint32_t>(c)},
                  static_cast<double>(weight(rng))});
    }
  return g;
}

inline bool has_cycle(const LinkGraph& g) {
  std::map<NodeId, int> state;
  std::function<bool(NodeId)> visit = [&](NodeId v) {
    state[v] = 1;
    for (const GraphEdge* e : g.out_edges(v)) {
      if (state[e->to] == 1) return true;
      if (state[e->to] == 0 && visit(e->to)) return true;
    }
    state[v] = 2;
    return false;
  };
  for (NodeId v : g.vertices())
    if (state[v] == 0 && visit(v)) return true;
  return false;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline ExperimentConfig manhattan_config(const VerifyOptions& o, int snapshots) {
  ExperimentConfig c;
  c.snapshots = scaled(snapshots, o);
  c.seed = o.seed;
  c.threads = o.threads;
  c.schemes = {Scheme::Jsra};
  return c;
}

}  // namespace detail

// 1 -------------------------------------------------------------------------
inline CriterionResult check_group_bound(const VerifyOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(o.seed ^ 1);
  std::uniform_int_distribution<std::size_t> size(1, 50);
  const double probs[] = {0.1, 0.3, 0.6};
  const int graphs = detail::scaled(500, o);
  int violations = 0, groups = 0;
  for (int g = 0; g < graphs; ++g) {
    const auto cg = detail::random_graph(rng, size(rng), probs[g % 3]);
    const auto sched = cg_mis_schedule(cg);
    std::vector<char> left(cg.size(), 1);
    for (const auto& group : sched.groups) {
      std::size_t n_res = 0, delta = 0;
      for (std::size_t v = 0; v < cg.size(); ++v) {
        if (!left[v]) continue;
        ++n_res;
        std::size_t d = 0;
        for (auto u : cg.neighbors(v)) d += left[u] ? 1 : 0;
        delta = std::max(delta, d);
      }
      if (group.size() * (delta + 1) < n_res) ++violations;
      for (LinkId l : group) left[*cg.index_of(l)] = 0;
      ++groups;
    }
  }
  const double secs = detail::seconds_since(t0);
  return {1, "CG-MIS group-size bound", violations == 0 && secs < 10.0,
          std::to_string(graphs) + " graphs, " + std::to_string(groups) + " groups, " + std::to_string(violations) +
              " violations, " + detail::fmt(secs, 3) + " s"};
}

// 2 -------------------------------------------------------------------------
inline CriterionResult check_waterfilling(const VerifyOptions& o) {
  const PowerAllocator alloc = o.allocator ? o.allocator : PowerAllocator(allocate_power);
  std::mt19937_64 rng(o.seed ^ 2);
  std::uniform_int_distribution<int> links(2, 16);
  std::uniform_real_distribution<double> decade(-3.0, 3.0), pmax(0.05, 2.0);
  const int instances = detail::scaled(1000, o);
  int kkt_bad = 0, oracle_bad = 0;
  double worst_kkt = 0.0, worst_rel = 0.0;
  for (int i = 0; i < instances; ++i) {
    std::vector<double> gamma(links(rng));
    for (double& g : gamma) g = std::pow(10.0, decade(rng));
    const double p = pmax(rng);
    const PowerSlice s = alloc(gamma, p);
    const double r = kkt_residual(s, gamma, p);
    worst_kkt = std::max(worst_kkt, r);
    if (!(r <= 1e-9)) ++kkt_bad;
    const auto ref = waterfill_bisection(gamma, p);
    bool ok = true;
    for (std::size_t k = 0; k < gamma.size(); ++k) {
      const double err = std::abs(s.power[k] - ref[k]);
      const double rel = err / std::max(std::abs(ref[k]), 1e-12 * p);
      if (err > 1e-12 * p) worst_rel = std::max(worst_rel, rel);
      ok = ok && (err <= 1e-12 * p || rel <= 1e-6);
    }
    if (!ok) ++oracle_bad;
  }
  return {2, "Water-filling KKT and bisection agreement", kkt_bad == 0 && oracle_bad == 0,
          std::to_string(instances) + " instances, KKT violations " + std::to_string(kkt_bad) + " (worst " +
              detail::fmt(worst_kkt, 3) + "), bisection mismatches " + std::to_string(oracle_bad) + " (worst rel " +
              detail::fmt(worst_rel, 3) + ")"};
}

// 3 -------------------------------------------------------------------------
/// Problems with one plan: partition of the active links, independence in
/// the conflict graph, slot budget, and per-sender power per group.
inline std::vector<std::string> plan_violations(const ChannelView& view, std::span<const LinkId> active,
                                                const SchedulePlan& plan) {
  std::vector<std::string> out;
  const auto cg = build_conflict_graph(view, active);
  if (!validate_schedule(cg, plan.groups)) out.push_back("groups are not an independent partition");
  if (plan.total_slots() > plan.slots_per_frame) out.push_back("slot budget exceeded");
  for (int n : plan.group_slots)
    if (n < 0) out.push_back("negative slot count");
  std::map<std::pair<std::size_t, NodeId>, double> spent;
  for (const auto& lp : plan.links) {
    if (lp.power < 0.0) out.push_back("negative power on " + to_string(lp.id));
    spent[{lp.group, view.scenario().link(lp.id).tx}] += lp.power;
  }
  for (const auto& [key, p] : spent)
    if (p > view.node(key.second).p_max * (1.0 + 1e-12)) out.push_back("power budget exceeded at " + to_string(key.second));
  return out;
}

inline CriterionResult check_feasibility(const VerifyOptions& o) {
  ExperimentConfig c = detail::manhattan_config(o, 200);
  c.manhattan.ue_count = 20;
  c.params.slots_per_frame = 20;
  int bad = 0;
  std::string first;
  for (int i = 0; i < c.snapshots; ++i) {
    const auto s = make_scenario(c, snapshot_seed(c.seed, i));
    const ChannelView view(s);
    const auto flows = build_flows(s, s.routes);
    const auto active = active_links(flows);
    for (auto mode : {SwitchPointMode::Flexible, SwitchPointMode::Fixed}) {
      const auto m = run_frame(view, flows, Scheme::Jsra, mode);
      const auto v = plan_violations(view, active, m.plan);
      if (!v.empty()) {
        ++bad;
        if (first.empty()) first = " (snapshot " + std::to_string(i) + ": " + v.front() + ")";
      }
    }
  }
  return {3, "Schedule feasibility", bad == 0,
          std::to_string(2 * c.snapshots) + " plans, " + std::to_string(bad) + " infeasible" + first};
}

// 4 -------------------------------------------------------------------------
inline CriterionResult check_oracle_dominance(const VerifyOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(o.seed ^ 4);
  std::uniform_int_distribution<int> slots(1, 8);
  const int instances = detail::scaled(300, o);
  int above = 0;
  double ratio_sum = 0.0, degree_sum = 0.0;
  int counted = 0;
  for (int i = 0; i < instances; ++i) {
    const auto s = detail::micro_instance(rng, 6, slots(rng));
    const ChannelView view(s);
    std::vector<LinkId> active;
    std::map<LinkId, int> req;
    for (const auto& l : s.links) active.push_back(l.id), req[l.id] = 1;
    const auto plan = plan_jsra(view, active, req);
    const auto cg = build_conflict_graph(view, active);
    const auto best = brute_force_jsra(view, cg, s.params.slots_per_frame);
    if (plan.objective() > best.objective * (1.0 + 1e-9)) ++above;
    if (best.objective > 0.0) {
      ratio_sum += plan.objective() / best.objective;
      degree_sum += cg.average_degree();
      ++counted;
    }
  }
  const double secs = detail::seconds_since(t0);
  const double mean_ratio = counted ? ratio_sum / counted : 1.0;
  const double dbar = counted ? degree_sum / counted : 0.0;
  return {4, "Oracle dominance", above == 0 && secs < 300.0,
          std::to_string(instances) + " micro-instances, heuristic above optimum " + std::to_string(above) +
              ", mean heuristic/optimal " + detail::fmt(mean_ratio) + " (mean degree " + detail::fmt(dbar, 3) +
              ", greedy MIS ratio context (2d+3)/5 = " + detail::fmt((2 * dbar + 3) / 5, 3) + "), " +
              detail::fmt(secs, 3) + " s"};
}

// 5 -------------------------------------------------------------------------
inline CriterionResult check_tdma_ordering(const VerifyOptions& o) {
  ExperimentConfig c = detail::manhattan_config(o, 200);
  c.schemes = {Scheme::Jsra, Scheme::Tdma};
  const auto r = run_simulation(c);
  int avg_ok = 0, edge_ok = 0;
  for (const auto& s : r.snapshots) {
    avg_ok += s.at(Scheme::Jsra).avg_rate >= s.at(Scheme::Tdma).avg_rate;
    edge_ok += s.at(Scheme::Jsra).edge_rate >= s.at(Scheme::Tdma).edge_rate;
  }
  const int n = c.snapshots;
  return {5, "JSRA vs TDMA rate ordering", avg_ok >= 0.95 * n && edge_ok >= 0.90 * n,
          "average " + std::to_string(avg_ok) + "/" + std::to_string(n) + " (need 95%), edge " +
              std::to_string(edge_ok) + "/" + std::to_string(n) + " (need 90%); mean avg JSRA " +
              detail::fmt(r.at(Scheme::Jsra).avg_rate) + " vs TDMA " + detail::fmt(r.at(Scheme::Tdma).avg_rate) +
              " bit/s"};
}

// 6 -------------------------------------------------------------------------
inline CriterionResult check_dynamic_routing(const VerifyOptions& o) {
  ExperimentConfig fixed = detail::manhattan_config(o, 200);
  ExperimentConfig dynamic = fixed;
  dynamic.routing = RoutingMode::Dynamic;
  const auto a = run_simulation(fixed), b = run_simulation(dynamic);
  int ok = 0;
  for (int i = 0; i < fixed.snapshots; ++i)
    ok += b.snapshots[i].at(Scheme::Jsra).avg_rate >= a.snapshots[i].at(Scheme::Jsra).avg_rate;
  const int n = fixed.snapshots;
  return {6, "Dynamic routing gain", ok >= 0.90 * n,
          "DR >= fixed in " + std::to_string(ok) + "/" + std::to_string(n) + " (need 90%); mean avg DR " +
              detail::fmt(b.at(Scheme::Jsra).avg_rate) + " vs fixed " + detail::fmt(a.at(Scheme::Jsra).avg_rate) +
              " bit/s"};
}

// 7 -------------------------------------------------------------------------
inline CriterionResult check_path_oracle(const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed ^ 7);
  const int graphs = detail::scaled(500, o);
  struct Tally {
    int total = 0, equal = 0;
    std::string witness;
  } layered, dag, cyclic;
  for (int i = 0; i < graphs; ++i) {
    const bool is_layered = i % 2 == 0;
    const auto g = detail::random_link_graph(rng, is_layered);
    const NodeId s{0}, d{static_cast<std::uint32_t>(g.vertices().size() - 1)};
    const RoutePath p = select_path(g, s, d);
    const auto best = widest_path_oracle(g, s, d);
    const double got = p.found() ? p.weight : 0.0;
    const bool equal = best ? p.found() && got == *best : !p.found();
    Tally& t = is_layered ? layered : detail::has_cycle(g) ? cyclic : dag;
    ++t.total;
    t.equal += equal;
    if (!equal && t.witness.empty())
      t.witness = " (graph " + std::to_string(i) + ": " + detail::fmt(got) + " vs " + detail::fmt(best.value_or(0.0)) + ")";
  }
  auto line = [](const Tally& t) { return std::to_string(t.equal) + "/" + std::to_string(t.total) + t.witness; };
  return {7, "Path selection vs widest-path oracle", layered.equal == layered.total,
          "layered " + line(layered) + " equal; other DAG " + line(dag) + ", cyclic " + line(cyclic) +
              " equal (reported only)"};
}

// 8 -------------------------------------------------------------------------
inline CriterionResult check_switch_point(const VerifyOptions& o) {
  ExperimentConfig c = detail::manhattan_config(o, 1);
  c.manhattan.ue_count = 20;
  c.trace.arrival_frames = c.trace.max_frames = 100;

  c.manhattan.traffic = {Demand::bits(1e5), Demand::bits(0.0)};
  const auto dl = run_simulation(c);
  bool all_one = true;
  std::size_t frames = 0;
  for (const auto& snap : dl.snapshots)
    for (const auto& f : snap.at(Scheme::Jsra).switch_trace) {
      ++frames;
      for (const auto& [_, sp] : f) all_one = all_one && sp == 1.0;
    }

  c.manhattan.traffic = {Demand::bits(1e5), Demand::bits(1e5)};
  const double sym = run_simulation(c).at(Scheme::Jsra).switch_point;

  ExperimentConfig flex = detail::manhattan_config(o, 200);
  ExperimentConfig half = flex;
  half.switch_point = SwitchPointMode::Fixed;
  const auto a = run_simulation(flex), b = run_simulation(half);
  int ok = 0;
  for (int i = 0; i < flex.snapshots; ++i)
    ok += a.snapshots[i].at(Scheme::Jsra).avg_rate >= b.snapshots[i].at(Scheme::Jsra).avg_rate;
  const bool pass = all_one && frames > 0 && sym >= 0.35 && sym <= 0.65 && ok >= 0.90 * flex.snapshots;
  return {8, "Switch-point flexibility", pass,
          std::string("all-downlink switch point 1.0 in every frame: ") + (all_one && frames ? "yes" : "no") +
              "; symmetric mean " + detail::fmt(sym, 3) + " (need [0.35, 0.65]); flexible >= fixed-50% in " +
              std::to_string(ok) + "/" + std::to_string(flex.snapshots)};
}

// 9 -------------------------------------------------------------------------
inline CriterionResult check_duplex_ordering(const VerifyOptions& o) {
  const std::pair<Duplex, Duplex> modes[] = {{Duplex::Half, Duplex::Half},
                                             {Duplex::FullResidual, Duplex::Half},
                                             {Duplex::FullResidual, Duplex::FullResidual},
                                             {Duplex::FullPerfect, Duplex::FullPerfect}};
  std::vector<double> avg;
  for (auto [ap, bs] : modes) {
    ExperimentConfig c = detail::manhattan_config(o, 200);
    c.manhattan.ap_duplex = ap;
    c.manhattan.bs_duplex = bs;
    avg.push_back(run_simulation(c).at(Scheme::Jsra).avg_rate);
  }
  const bool pass = std::is_sorted(avg.begin(), avg.end());
  return {9, "Duplex ordering", pass,
          "mean avg rate Half " + detail::fmt(avg[0]) + ", residual AP " + detail::fmt(avg[1]) + ", residual AP+BS " +
              detail::fmt(avg[2]) + ", perfect AP+BS " + detail::fmt(avg[3]) + " bit/s"};
}

// 10 ------------------------------------------------------------------------
inline CriterionResult check_platoon(const VerifyOptions& o) {
  std::vector<double> lat, thr;
  std::string worse;
  for (int bt = 0; bt <= 10; ++bt) {
    ExperimentConfig c;
    c.kind = ScenarioKind::Platoon;
    c.snapshots = detail::scaled(50, o);
    c.seed = o.seed;
    c.threads = o.threads;
    c.schemes = {Scheme::Jsra, Scheme::RoundRobin, Scheme::PropFair};
    c.platoon.bt_enabled = bt;
    c.platoon.traffic = {Demand::bits(1e5), Demand::bits(1e5)};
    const auto r = run_simulation(c);
    lat.push_back(r.at(Scheme::Jsra).mean_latency);
    thr.push_back(r.at(Scheme::Jsra).throughput);
    for (Scheme s : {Scheme::RoundRobin, Scheme::PropFair})
      if (lat.back() > r.at(s).mean_latency)
        worse += " bt=" + std::to_string(bt) + ": " + detail::fmt(lat.back()) + " > " + to_string(s) + " " +
                 detail::fmt(r.at(s).mean_latency) + ";";
  }
  bool lat_mono = true, thr_mono = true;
  for (std::size_t k = 1; k < lat.size(); ++k) {
    lat_mono = lat_mono && lat[k] <= lat[k - 1];
    thr_mono = thr_mono && thr[k] >= thr[k - 1];
  }
  return {10, "Platoon trends", lat_mono && thr_mono && worse.empty(),
          "CG-MIS latency " + detail::fmt(lat.front()) + " -> " + detail::fmt(lat.back()) + " frames (monotone: " +
              (lat_mono ? "yes" : "no") + "), throughput " + detail::fmt(thr.front()) + " -> " +
              detail::fmt(thr.back()) + " bit/s (monotone: " + (thr_mono ? "yes" : "no") + ")" +
              (worse.empty() ? "; CG-MIS <= RR and PF at every bt count" : "; CG-MIS above baseline at" + worse)};
}

// 11 ------------------------------------------------------------------------
inline CriterionResult check_channel(const VerifyOptions&) {
  const SystemParams p;
  bool near_one = true;
  for (double d = 0.5; d <= 20.0; d += 0.5) near_one = near_one && los_probability(d, p) == 1.0;
  const double at39 = los_probability(39.0, p);
  const double direct = 20.0 / 39.0 * (1.0 - std::exp(-1.0)) + std::exp(-1.0);
  bool mono = true;
  for (bool los : {true, false})
    for (double d = 1.0; d < 500.0; d += 1.0) mono = mono && pathloss(d + 1.0, los, 0.0, p) > pathloss(d, los, 0.0, p);
  const bool pass = near_one && std::abs(at39 - 0.6921) <= 1e-3 && std::abs(at39 - direct) <= 1e-12 && mono;
  return {11, "Channel unit checks", pass,
          std::string("P_LOS(d<=20)=1: ") + (near_one ? "yes" : "no") + "; P_LOS(39)=" + detail::fmt(at39, 6) +
              "; pathloss increasing in d: " + (mono ? "yes" : "no")};
}

inline const std::vector<std::function<CriterionResult(const VerifyOptions&)>>& criteria() {
  static const std::vector<std::function<CriterionResult(const VerifyOptions&)>> v{
      check_group_bound,     check_waterfilling,   check_feasibility,     check_oracle_dominance,
      check_tdma_ordering,   check_dynamic_routing, check_path_oracle,    check_switch_point,
      check_duplex_ordering, check_platoon,        check_channel};
  return v;
}

/// Runs the listed criteria (1-based ids; empty = all), printing one line
/// per criterion as it finishes.
inline std::vector<CriterionResult> run_acceptance(const VerifyOptions& o, const std::vector<int>& only,
                                                   std::ostream* log = nullptr) {
  std::vector<CriterionResult> out;
  for (std::size_t k = 0; k < criteria().size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    out.push_back(criteria()[k](o));
    if (log)
      *log << (out.back().pass ? "PASS" : "FAIL") << " [" << id << "] " << out.back().name << ": "
           << out.back().detail << std::endl;
  }
  return out;
}

}  // namespace mmiab
