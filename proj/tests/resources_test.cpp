#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "mmiab/resources.hpp"

using namespace mmiab;

namespace {

std::vector<LinkId> ids(std::initializer_list<std::uint32_t> v) {
  std::vector<LinkId> out;
  for (auto x : v) out.emplace_back(x);
  return out;
}

// Two single-element nodes joined by one link of the given linear loss.
NetworkScenario bare_link(double loss) {
  NetworkScenario s;
  detail::ScenarioBuilder sb(s);
  sb.add_node(Role::Bs, {0, 0});
  sb.add_node(Role::Ue, {10, 0});
  for (auto& n : s.nodes) n.antenna = {1, 1};
  sb.add_link(NodeId{0}, NodeId{1}, Direction::Downlink);
  s.links[0].pathloss_linear = loss;
  return s;
}

}  // namespace

TEST(RequiredSlots, FullBufferIsOneNominalSlot) {
  EXPECT_EQ(required_slots_for(Demand::full_buffer(), 1e9, SystemParams{}), 1);
  EXPECT_EQ(required_slots_for(Demand::full_buffer(), 1e3, SystemParams{}), 1);
}

TEST(RequiredSlots, CeilingAtBoundaries) {
  const SystemParams p;  // 100 us slots
  const double cap = 2e9;
  const double one_slot = cap * 1e-4;
  EXPECT_EQ(required_slots_for(Demand::bits(one_slot), cap, p), 1);
  EXPECT_EQ(required_slots_for(Demand::bits(2.4 * one_slot), cap, p), 3);
  EXPECT_EQ(required_slots_for(Demand::bits(3.0 * one_slot), cap, p), 3);
  EXPECT_EQ(required_slots_for(Demand::bits(0.0), cap, p), 0);
}

TEST(RequiredSlots, ClampedToFrame) {
  const SystemParams p;
  EXPECT_EQ(required_slots_for(Demand::bits(1e12), 1e9, p), 100);
  EXPECT_EQ(required_slots_for(Demand::bits(10.0), 0.0, p), 100);
}

TEST(AllocateSlots, SingleGroupTakesTheFrame) {
  const SdmaGroups g{{ids({0, 1})}};
  const auto a = allocate_slots(g, {{LinkId{0}, 2}, {LinkId{1}, 5}}, 10);
  EXPECT_EQ(a.per_group_slots, std::vector<int>{10});
}

TEST(AllocateSlots, ProportionalToGroupMaxima) {
  const SdmaGroups g{{ids({0, 1}), ids({2})}};
  const auto a = allocate_slots(g, {{LinkId{0}, 3}, {LinkId{1}, 1}, {LinkId{2}, 7}}, 10);
  EXPECT_EQ(a.per_group_slots, (std::vector<int>{3, 7}));
  EXPECT_EQ(a.total(), 10);
}

TEST(AllocateSlots, FlooringLeavesSlotsIdle) {
  const SdmaGroups g{{ids({0}), ids({1}), ids({2})}};
  const auto a = allocate_slots(g, {{LinkId{0}, 1}, {LinkId{1}, 1}, {LinkId{2}, 1}}, 10);
  EXPECT_EQ(a.per_group_slots, (std::vector<int>{3, 3, 3}));
  EXPECT_EQ(a.total(), 9);
}

TEST(AllocateSlots, MissingRequirementThrows) {
  const SdmaGroups g{{ids({0, 1})}};
  EXPECT_THROW(allocate_slots(g, {{LinkId{0}, 2}}, 10), std::invalid_argument);
  EXPECT_THROW(allocate_slots(SdmaGroups{}, {}, 10), std::invalid_argument);
}

TEST(ChannelQuality, UnitGainAndLoss) {
  const auto s = bare_link(1.0);
  const ChannelView view(s);
  EXPECT_DOUBLE_EQ(channel_quality(s.links[0], view), 5e10);
}

TEST(ChannelQuality, DoublingLossHalvesQuality) {
  const auto a = bare_link(1e7), b = bare_link(2e7);
  const ChannelView va(a), vb(b);
  EXPECT_DOUBLE_EQ(channel_quality(a.links[0], va), 2.0 * channel_quality(b.links[0], vb));
}

TEST(ChannelQuality, ShorterLosLinkIsBetter) {
  NetworkScenario s;
  detail::ScenarioBuilder sb(s);
  sb.add_node(Role::Ap, {0, 0});
  sb.add_node(Role::Ue, {10, 0});
  sb.add_node(Role::Ue, {100, 0});
  sb.add_link(NodeId{0}, NodeId{1}, Direction::Downlink);
  sb.add_link(NodeId{0}, NodeId{2}, Direction::Downlink);
  for (auto& l : s.links) l.pathloss_linear = pathloss(l.distance, true, 0.0, s.params);
  const ChannelView view(s);
  EXPECT_GT(channel_quality(s.links[0], view), channel_quality(s.links[1], view));
}

TEST(WaterFilling, SingleLinkTakesEverything) {
  const std::vector<double> g{3.0};
  const auto s = allocate_power(g, 0.8);
  EXPECT_DOUBLE_EQ(s.power[0], 0.8);
  EXPECT_DOUBLE_EQ(s.water_level, 0.8 + 1.0 / 3.0);
}

TEST(WaterFilling, SymmetricSplit) {
  const std::vector<double> g{4.0, 4.0};
  const auto s = allocate_power(g, 1.0);
  EXPECT_DOUBLE_EQ(s.power[0], 0.5);
  EXPECT_DOUBLE_EQ(s.power[1], 0.5);
}

TEST(WaterFilling, WeakLinkGetsNothing) {
  // Level for both would be (1 + 0.1 + 10) / 2 = 5.55, under 1/0.1; one link gives 1.1.
  const std::vector<double> g{10.0, 0.1};
  const auto s = allocate_power(g, 1.0);
  EXPECT_DOUBLE_EQ(s.power[0], 1.0);
  EXPECT_EQ(s.power[1], 0.0);
  EXPECT_DOUBLE_EQ(s.water_level, 1.1);
  EXPECT_EQ(s.active, 1u);
}

TEST(WaterFilling, OrderDoesNotMatter) {
  const std::vector<double> a{0.5, 20.0, 3.0}, b{20.0, 3.0, 0.5};
  const auto x = allocate_power(a, 1.0), y = allocate_power(b, 1.0);
  EXPECT_DOUBLE_EQ(x.power[0], y.power[2]);
  EXPECT_DOUBLE_EQ(x.power[1], y.power[0]);
  EXPECT_DOUBLE_EQ(x.power[2], y.power[1]);
}

TEST(WaterFilling, RejectsBadInput) {
  const std::vector<double> none, bad{1.0, 0.0}, ok{1.0};
  EXPECT_THROW(allocate_power(none, 1.0), std::invalid_argument);
  EXPECT_THROW(allocate_power(bad, 1.0), std::invalid_argument);
  EXPECT_THROW(allocate_power(ok, 0.0), std::invalid_argument);
}

TEST(Kkt, AllocatorOutputIsOptimal) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dec(-3.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> g(2 + rng() % 15);
    for (auto& x : g) x = std::pow(10.0, dec(rng));
    const auto s = allocate_power(g, 1.0);
    EXPECT_LE(kkt_residual(s, g, 1.0), 1e-9);
  }
}

TEST(Kkt, PerturbationIsDetected) {
  const std::vector<double> g{4.0, 4.0};
  auto s = allocate_power(g, 1.0);
  s.power[0] += 1e-3;
  s.power[1] -= 1e-3;
  EXPECT_GT(kkt_residual(s, g, 1.0), 1e-4);
}

TEST(Kkt, ZeroPowersViolateTheBudget) {
  const std::vector<double> g{4.0, 1.0};
  auto s = allocate_power(g, 1.0);
  s.power = {0.0, 0.0};
  EXPECT_GT(kkt_residual(s, g, 1.0), 0.0);
}
