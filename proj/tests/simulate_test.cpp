#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "mmiab/experiment.hpp"

using namespace mmiab;

namespace {

int link_slots(const SchedulePlan& p) {
  int n = 0;
  for (const auto& l : p.links) n += l.slots;
  return n;
}

// Six downlinks: BS to two APs and one UE, the APs on to three UEs.
NetworkScenario six_links() {
  NetworkScenario s;
  s.params = fixtures::params_with_slots(10);
  s.rng_seed = 21;
  detail::ScenarioBuilder sb(s);
  const NodeId bs = sb.add_node(Role::Bs, {0, 0});
  const NodeId ap1 = sb.add_node(Role::Ap, {100, 0});
  const NodeId ap2 = sb.add_node(Role::Ap, {-100, 0});
  const NodeId u1 = sb.add_node(Role::Ue, {100, 60});
  const NodeId u2 = sb.add_node(Role::Ue, {-100, -60});
  const NodeId u3 = sb.add_node(Role::Ue, {0, 50});
  const NodeId u4 = sb.add_node(Role::Ue, {160, 0});
  sb.add_pair(bs, ap1);
  sb.add_pair(bs, ap2);
  sb.add_pair(ap1, u1);
  sb.add_pair(ap2, u2);
  sb.add_pair(bs, u3);
  sb.add_pair(ap1, u4);
  s.routes = {{u1, {bs, ap1, u1}}, {u2, {bs, ap2, u2}}, {u3, {bs, u3}}, {u4, {bs, ap1, u4}}};
  for (const auto& [ue, _] : s.routes) s.traffic[ue] = {Demand::full_buffer(), Demand::bits(0)};
  return s;
}

double latency_of(const NetworkScenario& s, Scheme scheme = Scheme::Jsra) {
  const ChannelView view(s);
  const auto t = simulate_traffic(view, build_flows(s, s.routes), scheme, TrafficTrace{});
  EXPECT_EQ(t.latency.size(), 1u);
  EXPECT_EQ(t.censored, 0u);
  return t.latency.empty() ? -1.0 : t.latency[0];
}

}  // namespace

TEST(Manhattan, DefaultLayout) {
  const auto s = generate_manhattan({}, SystemParams{}, 1);
  EXPECT_EQ(s.nodes_with_role(Role::Bs).size(), 1u);
  EXPECT_EQ(s.nodes_with_role(Role::Ap).size(), 9u);
  EXPECT_EQ(s.nodes_with_role(Role::Ue).size(), 100u);
  EXPECT_EQ(s.routes.size(), 100u);
  EXPECT_TRUE(validate_scenario(s).empty());
}

TEST(Manhattan, UesStayOnStreets) {
  const ManhattanConfig cfg;
  const auto s = generate_manhattan(cfg, SystemParams{}, 4);
  for (NodeId ue : s.nodes_with_role(Role::Ue)) {
    const Position p = s.find_node(ue)->position;
    auto near_street = [&](double v) {
      const double r = std::fmod(v + 1000 * cfg.block_length, cfg.block_length);
      return std::min(r, cfg.block_length - r) <= cfg.street_width / 2 + 1e-9;
    };
    EXPECT_TRUE(near_street(p.x) || near_street(p.y));
  }
}

TEST(Manhattan, UesAttachToClosestInfrastructure) {
  const auto s = generate_manhattan(fixtures::manhattan(40), SystemParams{}, 8);
  for (const auto& [ue, route] : s.routes) {
    const Position p = s.find_node(ue)->position;
    const NodeId host = route[route.size() - 2];
    double best = 1e18;
    for (const auto& n : s.nodes)
      if (is_infrastructure(n.role)) best = std::min(best, distance(p, n.position));
    EXPECT_DOUBLE_EQ(distance(p, s.find_node(host)->position), best);
  }
}

TEST(Manhattan, BackhaulOnlyWithoutUes) {
  const auto s = generate_manhattan(fixtures::manhattan(0), SystemParams{}, 1);
  EXPECT_TRUE(s.nodes_with_role(Role::Ue).empty());
  EXPECT_TRUE(s.routes.empty());
  EXPECT_FALSE(s.links.empty());
}

TEST(Manhattan, SeedDeterminesDrops) {
  EXPECT_EQ(generate_manhattan({}, SystemParams{}, 9), generate_manhattan({}, SystemParams{}, 9));
  EXPECT_NE(generate_manhattan({}, SystemParams{}, 9), generate_manhattan({}, SystemParams{}, 10));
}

TEST(Platoon, SpacingFromSpeed) {
  EXPECT_NEAR(platoon_spacing(50.0), 27.78, 0.01);
  const auto s = generate_platoon({}, SystemParams{}, 1);
  EXPECT_EQ(s.nodes_with_role(Role::Vehicle).size(), 10u);
  EXPECT_NEAR(distance(s.nodes[1].position, s.nodes[2].position), 27.78, 0.01);
}

TEST(Platoon, HalfDuplexChainConflicts) {
  const auto s = generate_platoon(fixtures::platoon(0), SystemParams{}, 1);
  const ChannelView view(s);
  const auto v = s.nodes_with_role(Role::Vehicle);
  for (std::size_t k = 0; k + 2 < v.size(); ++k) {
    const Link& in = *s.find_link(v[k], v[k + 1], Direction::Downlink);
    const Link& out = *s.find_link(v[k + 1], v[k + 2], Direction::Downlink);
    EXPECT_TRUE(is_sequential(in, out, view));
    EXPECT_TRUE(links_conflict(in, out, view));
  }
}

TEST(Platoon, RelayCapableVehiclesDropSequentialConflicts) {
  const auto s = generate_platoon(fixtures::platoon(10), SystemParams{}, 1);
  const ChannelView view(s);
  const auto v = s.nodes_with_role(Role::Vehicle);
  for (std::size_t k = 0; k + 2 < v.size(); ++k)
    EXPECT_FALSE(is_sequential(*s.find_link(v[k], v[k + 1], Direction::Downlink),
                               *s.find_link(v[k + 1], v[k + 2], Direction::Downlink), view));
}

TEST(Frame, SpatialReuseBeatsTdmaSlotCount) {
  const auto s = six_links();
  const auto jsra = run_frame(s, s.routes, Scheme::Jsra);
  const auto tdma = run_frame(s, s.routes, Scheme::Tdma);
  EXPECT_EQ(jsra.plan.links.size(), 6u);
  EXPECT_EQ(link_slots(tdma.plan), 10);
  EXPECT_GT(link_slots(jsra.plan), 10);
  EXPECT_LE(jsra.plan.total_slots(), 10);
}

TEST(Frame, SingleLinkSchemesAgree) {
  auto s = fixtures::one_hop(0);
  s.traffic.begin()->second.downlink = Demand::full_buffer();
  const auto ref = run_frame(s, s.routes, Scheme::Jsra);
  for (Scheme sc : {Scheme::Tdma, Scheme::RoundRobin, Scheme::PropFair}) {
    const auto m = run_frame(s, s.routes, sc);
    EXPECT_EQ(m.per_link_rate, ref.per_link_rate) << to_string(sc);
    EXPECT_DOUBLE_EQ(m.objective, ref.objective) << to_string(sc);
  }
}

TEST(Frame, ObjectiveIsRateTimesFrame) {
  const auto s = generate_manhattan(fixtures::manhattan(20), SystemParams{}, 2);
  for (Scheme sc : {Scheme::Jsra, Scheme::Tdma}) {
    const auto m = run_frame(s, s.routes, sc);
    double sum = 0.0;
    for (const auto& [_, r] : m.per_link_rate) sum += r;
    EXPECT_NEAR(m.objective, sum * s.params.slots_per_frame, 1e-9 * m.objective);
  }
}

TEST(Frame, JsraPlanIsFeasible) {
  const auto s = generate_manhattan(fixtures::manhattan(30), fixtures::params_with_slots(20), 5);
  const ChannelView view(s);
  const auto m = run_frame(s, s.routes, Scheme::Jsra);
  const auto& p = m.plan;
  std::set<LinkId> seen;
  for (const auto& g : p.groups.groups)
    for (LinkId l : g) EXPECT_TRUE(seen.insert(l).second);
  EXPECT_LE(p.total_slots(), 20);
  for (const auto& g : p.groups.groups)
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = i + 1; j < g.size(); ++j) EXPECT_FALSE(links_conflict(s.link(g[i]), s.link(g[j]), view));
  std::map<std::pair<std::size_t, NodeId>, double> spent;
  for (const auto& l : p.links) spent[{l.group, s.link(l.id).tx}] += l.power;
  for (const auto& [k, w] : spent) EXPECT_LE(w, view.node(k.second).p_max * (1 + 1e-12));
}

TEST(Latency, OneHopOneFrame) {
  EXPECT_EQ(latency_of(fixtures::one_hop(1e4)), 1.0);
}

TEST(Latency, HalfDuplexRelayStoresAndForwards) {
  EXPECT_EQ(latency_of(fixtures::two_hop(1e4, Duplex::Half)), 2.0);
}

TEST(Latency, FullDuplexRelayCutsThrough) {
  const auto s = fixtures::two_hop(1e4, Duplex::FullPerfect);
  const ChannelView view(s);
  const std::vector<LinkId> both{s.find_link(NodeId{0}, NodeId{1})->id, s.find_link(NodeId{1}, NodeId{2})->id};
  EXPECT_EQ(build_conflict_graph(view, both).edge_count(), 0u);
  EXPECT_EQ(latency_of(s), 1.0);
}

TEST(Latency, SlotExclusiveSchemesAlsoForward) {
  for (Scheme sc : {Scheme::Tdma, Scheme::RoundRobin, Scheme::PropFair})
    EXPECT_EQ(latency_of(fixtures::two_hop(1e4, Duplex::Half), sc), 2.0) << to_string(sc);
}

TEST(Traffic, DeliversEverything) {
  const auto s = fixtures::two_hop(3e7, Duplex::Half);
  const ChannelView view(s);
  const auto t = simulate_traffic(view, build_flows(s, s.routes), Scheme::Jsra, TrafficTrace{});
  EXPECT_EQ(t.censored, 0u);
  EXPECT_NEAR(t.delivered_bits, 3e7, 1e-3);
}

TEST(Simulation, RerunIsIdentical) {
  ExperimentConfig c;
  c.manhattan.ue_count = 15;
  c.snapshots = 2;
  c.schemes = {Scheme::Jsra, Scheme::Tdma};
  const auto a = run_simulation(c);
  c.threads = 2;
  const auto b = run_simulation(c);
  ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    EXPECT_EQ(a.snapshots[i].seed, b.snapshots[i].seed);
    for (std::size_t k = 0; k < a.snapshots[i].schemes.size(); ++k)
      EXPECT_EQ(a.snapshots[i].schemes[k].ue_rate, b.snapshots[i].schemes[k].ue_rate);
  }
}

TEST(Simulation, SummaryPoolsUeRates) {
  ExperimentConfig c;
  c.manhattan.ue_count = 10;
  c.snapshots = 3;
  c.schemes = {Scheme::Tdma};
  const auto r = run_simulation(c);
  std::vector<double> pooled;
  for (const auto& s : r.snapshots)
    for (const auto& [_, v] : s.at(Scheme::Tdma).ue_rate) pooled.push_back(v);
  EXPECT_EQ(pooled.size(), 30u);
  EXPECT_NEAR(r.at(Scheme::Tdma).avg_rate, mean(pooled), 1e-6 * mean(pooled));
  EXPECT_NEAR(r.at(Scheme::Tdma).edge_rate, percentile(pooled, 5.0), 1e-6);
}

TEST(Simulation, JsraBeatsTdmaOnAverage) {
  ExperimentConfig c;
  c.snapshots = 5;
  c.schemes = {Scheme::Jsra, Scheme::Tdma};
  const auto r = run_simulation(c);
  EXPECT_GT(r.at(Scheme::Jsra).avg_rate, r.at(Scheme::Tdma).avg_rate);
}

TEST(Simulation, RejectsEmptySchemeList) {
  ExperimentConfig c;
  c.schemes.clear();
  EXPECT_THROW(run_simulation(c), std::invalid_argument);
  c.schemes = {Scheme::Jsra};
  c.snapshots = 0;
  EXPECT_THROW(run_simulation(c), std::invalid_argument);
}

TEST(Percentile, Interpolates) {
  EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4, 5}, 50), 3.0);
  EXPECT_DOUBLE_EQ(percentile({0, 10}, 5), 0.5);
}
