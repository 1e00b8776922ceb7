#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "mmiab/channel.hpp"

using namespace mmiab;

namespace {

// (4 pi f / c)^2 at 28 GHz, evaluated independently of the library.
const double kUnitLoss = std::pow(4.0 * 3.14159265358979323846 * 28e9 / 3e8, 2);

}  // namespace

TEST(Pathloss, UnitDistanceLos) {
  const SystemParams p;
  EXPECT_NEAR(pathloss(1.0, true, 0.0, p), kUnitLoss, 1e-6 * kUnitLoss);
  EXPECT_NEAR(pathloss(1.0, true, 0.0, p), 1.376e6, 1e3);
  EXPECT_NEAR(10.0 * std::log10(pathloss(1.0, true, 0.0, p)), 61.4, 0.05);
}

TEST(Pathloss, UnitDistanceIgnoresExponent) {
  const SystemParams p;
  EXPECT_DOUBLE_EQ(pathloss(1.0, false, 0.0, p), pathloss(1.0, true, 0.0, p));
}

TEST(Pathloss, NlosAtHundredMetres) {
  const SystemParams p;
  const double expected = kUnitLoss * std::pow(100.0, 3.17);
  EXPECT_NEAR(pathloss(100.0, false, 0.0, p), expected, 1e-9 * expected);
}

TEST(Pathloss, ShadowingScalesInDecibels) {
  const SystemParams p;
  EXPECT_NEAR(pathloss(50.0, true, 10.0, p) / pathloss(50.0, true, 0.0, p), 10.0, 1e-9);
}

TEST(Pathloss, IncreasingInDistance) {
  const SystemParams p;
  for (bool los : {true, false})
    for (double d = 1.0; d < 1000.0; d *= 1.3) EXPECT_LT(pathloss(d, los, 0.0, p), pathloss(d * 1.3, los, 0.0, p));
}

TEST(Pathloss, RejectsNonPositiveDistance) {
  EXPECT_THROW(pathloss(0.0, true, 0.0, SystemParams{}), std::domain_error);
}

TEST(LosProbability, OneUpToBreakpoint) {
  const SystemParams p;
  for (double d : {0.5, 1.0, 5.0, 19.9, 20.0}) EXPECT_EQ(los_probability(d, p), 1.0);
}

TEST(LosProbability, AtSecondBreakpoint) {
  const SystemParams p;
  const double expected = 20.0 / 39.0 * (1.0 - std::exp(-1.0)) + std::exp(-1.0);
  EXPECT_NEAR(los_probability(39.0, p), expected, 1e-12);
  EXPECT_NEAR(los_probability(39.0, p), 0.6921, 1e-3);
}

TEST(LosProbability, VanishingTail) {
  const SystemParams p;
  double prev = 1.0;
  for (double d = 25.0; d < 1e5; d *= 2.0) {
    const double v = los_probability(d, p);
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(LinkState, ShortLinksAreAlwaysLos) {
  const SystemParams p;
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) EXPECT_TRUE(sample_link_state(5.0, p, rng).los);
}

TEST(LinkState, SameSeedSameDraws) {
  const SystemParams p;
  std::mt19937_64 a(99), b(99);
  for (int i = 0; i < 100; ++i) {
    const auto x = sample_link_state(60.0, p, a);
    const auto y = sample_link_state(60.0, p, b);
    EXPECT_EQ(x.los, y.los);
    EXPECT_EQ(x.shadow_db, y.shadow_db);
  }
}

TEST(LinkState, EmpiricalLosFrequency) {
  const SystemParams p;
  std::mt19937_64 rng(2024);
  int los = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) los += sample_link_state(39.0, p, rng).los;
  EXPECT_NEAR(static_cast<double>(los) / n, 0.692, 0.01);
}

TEST(LinkState, PairStateIsSymmetric) {
  const SystemParams p;
  const auto x = pair_state(5, NodeId{3}, NodeId{8}, 70.0, p);
  const auto y = pair_state(5, NodeId{8}, NodeId{3}, 70.0, p);
  EXPECT_EQ(x.los, y.los);
  EXPECT_EQ(x.shadow_db, y.shadow_db);
}

TEST(Antenna, BoresightGain) {
  const SystemParams p;
  EXPECT_DOUBLE_EQ(antenna_gain({16, 8}, {4, 4}, 0.0, 0.0, p), 2048.0);
}

TEST(Antenna, SidelobeFloor) {
  const SystemParams p;
  EXPECT_NEAR(antenna_gain({16, 8}, {4, 4}, 2.0, 2.5, p), 0.01, 1e-15);
}

TEST(Antenna, SwapSymmetry) {
  const SystemParams p;
  for (double a : {0.0, 0.1, 0.5, 1.0})
    for (double b : {0.0, 0.2, 0.9})
      EXPECT_DOUBLE_EQ(antenna_gain({16, 8}, {4, 4}, a, b, p), antenna_gain({4, 4}, {16, 8}, b, a, p));
}

TEST(Antenna, MainLobeEdge) {
  const SystemParams p;
  const double edge = std::numbers::pi / 16.0;
  EXPECT_DOUBLE_EQ(element_gain({16, 8}, edge, p), 128.0);
  EXPECT_DOUBLE_EQ(element_gain({16, 8}, edge * 1.01, p), 0.1);
}

TEST(Capacity, ShannonCases) {
  EXPECT_EQ(link_capacity(1e9, 5.0, false), 0.0);
  EXPECT_DOUBLE_EQ(link_capacity(1e9, 1.0, true), 1e9);
  EXPECT_DOUBLE_EQ(link_capacity(1e9, 3.0, true), 2e9);
}

class SinrTest : public ::testing::Test {
 protected:
  SinrTest() : net(fixtures::small_hetnet(4)), view(net.s) {}
  const Link& link(NodeId tx, NodeId rx) { return *net.s.find_link(tx, rx); }
  fixtures::SmallHetNet net;
  ChannelView view;
};

TEST_F(SinrTest, NoInterferers) {
  const Link& l = link(net.b, net.d);
  const auto b = link_sinr(l, 0.7, {}, view, 1e9);
  EXPECT_DOUBLE_EQ(b.sinr, 0.7 * 2048.0 / (l.pathloss_linear * 2e-11));
  EXPECT_EQ(b.interference_power, 0.0);
}

TEST_F(SinrTest, ZeroPowerInterferer) {
  const Link& l = link(net.b, net.d);
  const std::vector<Interferer> one{{link(net.c, net.f), 0.0}};
  EXPECT_DOUBLE_EQ(link_sinr(l, 0.7, one, view, 1e9).sinr, link_sinr(l, 0.7, {}, view, 1e9).sinr);
}

TEST_F(SinrTest, TwinInterferersDouble) {
  const Link& l = link(net.b, net.d);
  const Interferer x{link(net.c, net.f), 1.0};
  const std::vector<Interferer> one{x}, two{x, x};
  const double i1 = link_sinr(l, 1.0, one, view, 1e9).interference_power;
  EXPECT_GT(i1, 0.0);
  EXPECT_EQ(link_sinr(l, 1.0, two, view, 1e9).interference_power, 2.0 * i1);
}

TEST_F(SinrTest, HalfDuplexSelfInterferenceBlocks) {
  const auto b = link_sinr(link(net.a, net.b), 1.0, std::vector<Interferer>{{link(net.b, net.d), 1.0}}, view, 1e9);
  EXPECT_EQ(b.sinr, 0.0);
}

TEST(ChannelView, LinkPairsUseTheirOwnPathloss) {
  const auto net = fixtures::small_hetnet(8);
  const ChannelView view(net.s);
  for (const auto& l : net.s.links) EXPECT_EQ(view.pathloss_between(l.tx, l.rx), l.pathloss_linear);
}
