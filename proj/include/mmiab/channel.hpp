#pragma once

// Propagation, antenna gain, SINR and Shannon capacity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mmiab/model.hpp"

namespace mmiab {

struct LinkBudget {
  double rx_power = 0.0;            // W
  double interference_power = 0.0;  // W
  double sinr = 0.0;
  double bandwidth = 0.0;           // Hz
};

struct LinkState {
  bool los = true;
  double shadow_db = 0.0;
};

/// Isotropic pathloss (linear, >= 1 for d >= 1 m) at distance `d`.
inline double pathloss(double d, bool los, double shadow_db, const SystemParams& params) {
  if (!(d > 0.0)) throw std::domain_error("pathloss: distance must be positive");
  const double k = 4.0 * std::numbers::pi * params.carrier_freq / params.light_speed;
  const double exponent = los ? params.pathloss_exp_los : params.pathloss_exp_nlos;
  return k * k * std::pow(d, exponent) * std::pow(10.0, shadow_db / 10.0);
}

/// d1/d2 LOS probability model.
inline double los_probability(double d, const SystemParams& params) {
  if (!(d > 0.0)) throw std::domain_error("los_probability: distance must be positive");
  const double tail = std::exp(-d / params.d2);
  return std::min(params.d1 / d, 1.0) * (1.0 - tail) + tail;
}

template <typename Rng>
LinkState sample_link_state(double d, const SystemParams& params, Rng& rng) {
  const double p = los_probability(d, params);
  std::bernoulli_distribution los_draw(std::clamp(p, 0.0, 1.0));
  const bool los = los_draw(rng);
  const double sigma = los ? params.shadow_sigma_los_db : params.shadow_sigma_nlos_db;
  std::normal_distribution<double> shadow(0.0, sigma);
  return {los, shadow(rng)};
}

/// Flat-top sector gain of one array at angular offset from boresight.
inline double element_gain(const AntennaArray& array, double offset, const SystemParams& params) {
  const double half_beamwidth = std::numbers::pi / std::max(array.rows, array.cols);
  return std::abs(offset) <= half_beamwidth ? static_cast<double>(array.elements())
                                            : params.sidelobe_gain;
}

inline double antenna_gain(const AntennaArray& tx, const AntennaArray& rx, double tx_offset,
                           double rx_offset, const SystemParams& params) {
  return element_gain(tx, tx_offset, params) * element_gain(rx, rx_offset, params);
}

/// Shannon capacity in bit/s; zero when the link is not scheduled.
inline double link_capacity(double bandwidth, double sinr, bool scheduled) {
  return scheduled ? bandwidth * std::log2(1.0 + sinr) : 0.0;
}

/// Angle at `from` between the directions toward `target` and `other`, in [0, pi].
inline double beam_offset(Position from, Position target, Position other) {
  const double ax = target.x - from.x, ay = target.y - from.y;
  const double bx = other.x - from.x, by = other.y - from.y;
  if ((ax == 0.0 && ay == 0.0) || (bx == 0.0 && by == 0.0)) return 0.0;
  return std::abs(std::atan2(ax * by - ay * bx, ax * bx + ay * by));
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Channel state of the unordered node pair (a, b), fixed for a given
/// scenario seed. Link generation and cross-link interference both draw from
/// here so the two always agree.
inline LinkState pair_state(std::uint64_t seed, NodeId a, NodeId b, double d,
                            const SystemParams& params) {
  const auto lo = std::min(a.value, b.value);
  const auto hi = std::max(a.value, b.value);
  const std::uint64_t key = (static_cast<std::uint64_t>(lo) << 32) | hi;
  std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(key)));
  return sample_link_state(d, params, rng);
}

/// Dense, precomputed view of a scenario's geometry and pair pathlosses.
/// Pairs joined by a scenario link use the link's own channel state; all
/// other pairs fall back to the seeded pair draw.
class ChannelView {
 public:
  explicit ChannelView(const NetworkScenario& s) : scenario_(&s) {
    const std::size_t n = s.nodes.size();
    index_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) index_.emplace(s.nodes[i].id, i);
    pathloss_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = std::max(1.0, mmiab::distance(s.nodes[i].position, s.nodes[j].position));
        const auto st = pair_state(s.rng_seed, s.nodes[i].id, s.nodes[j].id, d, s.params);
        pathloss_[i * n + j] = pathloss_[j * n + i] = pathloss(d, st.los, st.shadow_db, s.params);
      }
    }
    for (const auto& l : s.links) {
      const std::size_t a = index_.at(l.tx), b = index_.at(l.rx);
      pathloss_[a * n + b] = pathloss_[b * n + a] = l.pathloss_linear;
    }
  }

  const NetworkScenario& scenario() const { return *scenario_; }
  const SystemParams& params() const { return scenario_->params; }
  const Node& node(NodeId id) const { return scenario_->nodes[index_.at(id)]; }

  double pathloss_between(NodeId a, NodeId b) const {
    const std::size_t n = scenario_->nodes.size();
    return pathloss_[index_.at(a) * n + index_.at(b)];
  }

  /// Main-lobe gain of a link's own path, both ends on boresight.
  double boresight_gain(const Link& l) const {
    return antenna_gain(node(l.tx).antenna, node(l.rx).antenna, 0.0, 0.0, params());
  }

  /// Received power of `l` when transmitted with power `p`.
  double received_power(const Link& l, double p) const {
    return p * boresight_gain(l) / l.pathloss_linear;
  }

  /// Power that `aggressor`, transmitting at `p`, leaks into the receiver of
  /// `victim`. A half-duplex node receiving while it transmits yields +inf.
  double interference_at(const Link& victim, const Link& aggressor, double p) const {
    if (p <= 0.0) return 0.0;
    if (aggressor.tx == victim.rx) {
      switch (node(victim.rx).duplex) {
        case Duplex::Half:
          return std::numeric_limits<double>::infinity();
        case Duplex::FullPerfect:
          return 0.0;
        case Duplex::FullResidual:
          return p * params().self_interference_coupling;
      }
    }
    const Node& atx = node(aggressor.tx);
    const Node& arx = node(aggressor.rx);
    const Node& vtx = node(victim.tx);
    const Node& vrx = node(victim.rx);
    const double tx_off = beam_offset(atx.position, arx.position, vrx.position);
    const double rx_off = beam_offset(vrx.position, vtx.position, atx.position);
    const double g = antenna_gain(atx.antenna, vrx.antenna, tx_off, rx_off, params());
    return p * g / pathloss_between(aggressor.tx, victim.rx);
  }

 private:
  const NetworkScenario* scenario_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<double> pathloss_;
};

struct Interferer {
  Link link;
  double power = 0.0;  // W
};

inline LinkBudget link_sinr(const Link& link, double p_tx, std::span<const Interferer> interferers,
                            const ChannelView& view, double bandwidth) {
  LinkBudget b;
  b.rx_power = view.received_power(link, p_tx);
  for (const auto& it : interferers) b.interference_power += view.interference_at(link, it.link, it.power);
  b.sinr = b.rx_power / (view.params().noise_power + b.interference_power);
  b.bandwidth = bandwidth;
  return b;
}

inline LinkBudget link_sinr(const Link& link, double p_tx, std::span<const Interferer> interferers,
                            const NetworkScenario& s) {
  const ChannelView view(s);
  return link_sinr(link, p_tx, interferers, view, s.params.system_bandwidth);
}

/// Single-link capacity at the transmitter's full power, no interference.
inline double standalone_capacity(const Link& l, const ChannelView& view) {
  const double p = view.node(l.tx).p_max;
  const double snr = view.received_power(l, p) / view.params().noise_power;
  return link_capacity(view.params().system_bandwidth, snr, true);
}

}  // namespace mmiab
