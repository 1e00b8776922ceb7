#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "mmiab/flows.hpp"
#include "mmiab/oracle.hpp"

using namespace mmiab;

namespace {

ConflictGraph cycle(std::size_t n) {
  auto cg = ConflictGraph::with_vertices(n);
  for (std::size_t v = 0; v < n; ++v) cg.add_edge(v, (v + 1) % n);
  return cg;
}

LinkGraph symmetric_random(std::mt19937_64& rng, std::uint32_t n, double p) {
  LinkGraph g;
  for (std::uint32_t v = 0; v < n; ++v) g.add_vertex(NodeId{v});
  std::bernoulli_distribution edge(p);
  std::uniform_int_distribution<int> w(1, 50);
  std::uint32_t id = 0;
  for (std::uint32_t a = 0; a < n; ++a)
    for (std::uint32_t b = a + 1; b < n; ++b)
      if (edge(rng)) {
        const double x = w(rng);
        g.add_edge({LinkId{id++}, NodeId{a}, NodeId{b}, x});
        g.add_edge({LinkId{id++}, NodeId{b}, NodeId{a}, x});
      }
  return g;
}

}  // namespace

TEST(ExhaustiveMis, SmallGraphs) {
  auto k3 = ConflictGraph::with_vertices(3);
  k3.add_edge(0, 1);
  k3.add_edge(1, 2);
  k3.add_edge(0, 2);
  EXPECT_EQ(exhaustive_mis(k3), 1u);
  EXPECT_EQ(exhaustive_mis(ConflictGraph::with_vertices(7)), 7u);
  EXPECT_EQ(exhaustive_mis(cycle(5)), 2u);
  EXPECT_EQ(exhaustive_mis(cycle(6)), 3u);
  EXPECT_EQ(exhaustive_mis(ConflictGraph{}), 0u);
}

TEST(ExhaustiveMis, RefusesLargeGraphs) {
  EXPECT_THROW(exhaustive_mis(ConflictGraph::with_vertices(13)), OracleRefusal);
}

class BruteForce : public ::testing::Test {
 protected:
  BruteForce() : net(fixtures::small_hetnet(3)), view(net.s) {}
  LinkId id(NodeId a, NodeId b) { return net.s.find_link(a, b)->id; }
  fixtures::SmallHetNet net;
  ChannelView view;
};

TEST_F(BruteForce, SingleLinkTakesTheFrame) {
  const ConflictGraph cg(std::vector<LinkId>{id(net.b, net.d)});
  const auto best = brute_force_jsra(view, cg, 6);
  const double r = evaluate_group(view, cg.vertices())[0].capacity;
  EXPECT_DOUBLE_EQ(best.objective, r * 6);
  EXPECT_EQ(best.slots, std::vector<int>{6});
}

TEST_F(BruteForce, TwoConflictingLinks) {
  const std::vector<LinkId> pair{id(net.a, net.b), id(net.b, net.d)};
  const auto cg = build_conflict_graph(view, pair);
  ASSERT_EQ(cg.edge_count(), 1u);
  const double r0 = evaluate_group(view, std::vector<LinkId>{pair[0]})[0].capacity;
  const double r1 = evaluate_group(view, std::vector<LinkId>{pair[1]})[0].capacity;
  double want = 0.0;
  for (int n0 = 0; n0 <= 5; ++n0)
    for (int n1 = 0; n0 + n1 <= 5; ++n1) want = std::max(want, r0 * n0 + r1 * n1);
  EXPECT_DOUBLE_EQ(brute_force_jsra(view, cg, 5).objective, want);
}

TEST_F(BruteForce, HeuristicNeverExceedsOracle) {
  for (int n = 1; n <= 6; ++n) {
    for (const auto& routes : std::vector<std::map<NodeId, Route>>{
             {{net.d, net.s.routes.at(net.d)}, {net.f, net.s.routes.at(net.f)}},
             {{net.e, net.s.routes.at(net.e)}, {net.g, net.s.routes.at(net.g)}},
             {{net.d, net.s.routes.at(net.d)}, {net.e, net.s.routes.at(net.e)}}}) {
      auto s = net.s;
      s.params.slots_per_frame = n;
      const ChannelView v(s);
      const auto flows = build_flows(s, routes);
      const auto active = active_links(flows);
      const auto plan = plan_jsra(v, active, flow_requirements(flows, v));
      const auto best = brute_force_jsra(v, build_conflict_graph(v, active), n);
      EXPECT_LE(plan.objective(), best.objective * (1 + 1e-12));
    }
  }
}

TEST_F(BruteForce, RefusesOverBudget) {
  std::vector<LinkId> all;
  for (const auto& l : net.s.links) all.push_back(l.id);
  EXPECT_THROW(brute_force_jsra(view, build_conflict_graph(view, all), 4), OracleRefusal);
  const ConflictGraph one(std::vector<LinkId>{id(net.b, net.d)});
  EXPECT_THROW(brute_force_jsra(view, one, 9), OracleRefusal);
}

TEST(Bisection, KnownSplits) {
  const std::vector<double> twin{4.0, 4.0}, single{2.0};
  const auto p = waterfill_bisection(twin, 1.0);
  EXPECT_NEAR(p[0], 0.5, 1e-12);
  EXPECT_NEAR(p[1], 0.5, 1e-12);
  EXPECT_NEAR(waterfill_bisection(single, 0.3)[0], 0.3, 1e-12);
}

TEST(Bisection, AgreesWithClosedForm) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> dec(-3.0, 3.0);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> g(2 + rng() % 15);
    for (auto& x : g) x = std::pow(10.0, dec(rng));
    const auto ref = waterfill_bisection(g, 1.0);
    const auto got = allocate_power(g, 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(got.power[i], ref[i], 1e-9);
  }
}

TEST(WidestPath, SinglePathAndParallelPaths) {
  LinkGraph chain;
  chain.add_edge({LinkId{0}, NodeId{0}, NodeId{1}, 7});
  chain.add_edge({LinkId{1}, NodeId{1}, NodeId{2}, 3});
  EXPECT_EQ(widest_path_oracle(chain, NodeId{0}, NodeId{2}), 3.0);
  LinkGraph par = chain;
  par.add_edge({LinkId{2}, NodeId{0}, NodeId{3}, 4});
  par.add_edge({LinkId{3}, NodeId{3}, NodeId{2}, 9});
  EXPECT_EQ(widest_path_oracle(par, NodeId{0}, NodeId{2}), 4.0);
  EXPECT_FALSE(widest_path_oracle(par, NodeId{2}, NodeId{0}).has_value());
}

TEST(WidestPath, AgreesWithSpanningTreeOnUndirectedGraphs) {
  std::mt19937_64 rng(19);
  for (int t = 0; t < 200; ++t) {
    const auto n = static_cast<std::uint32_t>(3 + rng() % 7);
    const auto g = symmetric_random(rng, n, 0.4);
    const NodeId s{0}, d{n - 1};
    EXPECT_EQ(widest_path_oracle(g, s, d), spanning_tree_bottleneck(g, s, d));
  }
}
