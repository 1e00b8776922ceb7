#pragma once

// Hand-placed scenarios shared by the unit suites.

#include <map>

#include "mmiab/scenarios.hpp"

namespace fixtures {

using namespace mmiab;

inline SystemParams params_with_slots(int n) {
  SystemParams p;
  p.slots_per_frame = n;
  return p;
}

inline ManhattanConfig manhattan(int ue_count) {
  ManhattanConfig c;
  c.ue_count = ue_count;
  return c;
}

inline PlatoonConfig platoon(int bt_enabled) {
  PlatoonConfig c;
  c.bt_enabled = bt_enabled;
  return c;
}

/// BS A, APs B and C, UEs D..G. D, E hang off B, F off C, G off the BS and
/// C. One UE-UE link (D -> E) is present but never admissible.
struct SmallHetNet {
  NetworkScenario s;
  NodeId a, b, c, d, e, f, g;
};

inline SmallHetNet small_hetnet(std::uint64_t seed = 1) {
  SmallHetNet n;
  n.s.rng_seed = seed;
  detail::ScenarioBuilder sb(n.s);
  n.a = sb.add_node(Role::Bs, {0, 0});
  n.b = sb.add_node(Role::Ap, {-60, 40});
  n.c = sb.add_node(Role::Ap, {60, 40});
  n.d = sb.add_node(Role::Ue, {-90, 70});
  n.e = sb.add_node(Role::Ue, {-40, 80});
  n.f = sb.add_node(Role::Ue, {80, 80});
  n.g = sb.add_node(Role::Ue, {30, 20});
  sb.add_pair(n.a, n.b);
  sb.add_pair(n.a, n.c);
  sb.add_pair(n.b, n.d);
  sb.add_pair(n.b, n.e);
  sb.add_pair(n.c, n.f);
  sb.add_pair(n.a, n.g);
  sb.add_pair(n.c, n.g);
  sb.add_link(n.d, n.e, Direction::Downlink);
  n.s.routes[n.d] = {n.a, n.b, n.d};
  n.s.routes[n.e] = {n.a, n.b, n.e};
  n.s.routes[n.f] = {n.a, n.c, n.f};
  n.s.routes[n.g] = {n.a, n.g};
  return n;
}

/// BS -> relay -> UE with a bend at the relay that keeps the two hops out
/// of each other's main lobes. Downlink only, `bits` per arrival frame.
inline NetworkScenario two_hop(double bits, Duplex relay, int slots = 100) {
  NetworkScenario s;
  s.params = params_with_slots(slots);
  s.rng_seed = 3;
  detail::ScenarioBuilder sb(s);
  const NodeId bs = sb.add_node(Role::Bs, {0, 0});
  const NodeId ap = sb.add_node(Role::Ap, {15, 0}, relay);
  const NodeId ue = sb.add_node(Role::Ue, {10, 15});
  sb.add_pair(bs, ap);
  sb.add_pair(ap, ue);
  s.routes[ue] = {bs, ap, ue};
  s.traffic[ue] = {Demand::bits(bits), Demand::bits(0)};
  return s;
}

/// BS -> UE, downlink only.
inline NetworkScenario one_hop(double bits) {
  NetworkScenario s;
  s.rng_seed = 3;
  detail::ScenarioBuilder sb(s);
  const NodeId bs = sb.add_node(Role::Bs, {0, 0});
  const NodeId ue = sb.add_node(Role::Ue, {25, 0});
  sb.add_pair(bs, ue);
  s.routes[ue] = {bs, ue};
  s.traffic[ue] = {Demand::bits(bits), Demand::bits(0)};
  return s;
}

}  // namespace fixtures
