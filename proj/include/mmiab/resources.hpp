#pragma once

// Slot allocation across SDMA groups and per-sender water-filling power split.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "mmiab/channel.hpp"
#include "mmiab/scheduling.hpp"

namespace mmiab {

struct SlotAllocation {
  std::vector<int> per_group_slots;
  std::map<LinkId, int> required_per_link;

  int total() const { return std::accumulate(per_group_slots.begin(), per_group_slots.end(), 0); }
};

/// Slots a demand needs on a link of the given standalone capacity. Full
/// buffer counts as one nominal unit; a link that cannot carry a positive
/// demand at all is pinned at N.
inline int required_slots_for(const Demand& demand, double capacity, const SystemParams& params) {
  const int n = params.slots_per_frame;
  if (demand.is_full_buffer()) return 1;
  const double bits = demand.finite_bits();
  if (bits <= 0.0) return 0;
  if (!(capacity > 0.0)) return n;
  const double slots = bits / (capacity * params.slot_duration());
  // A demand of exactly k slots' worth must not round up to k + 1.
  const double needed = std::ceil(slots * (1.0 - 1e-12));
  return static_cast<int>(std::clamp(needed, 1.0, static_cast<double>(n)));
}

inline int required_slots(const Link& link, const ChannelView& view) {
  return required_slots_for(link.demand, standalone_capacity(link, view), view.params());
}

/// Each group gets floor(n_max^k / sum n_max * N) slots, n_max^k being the
/// largest requirement inside group k. Flooring leftovers stay idle.
inline SlotAllocation allocate_slots(const SdmaGroups& groups, const std::map<LinkId, int>& required,
                                     int total_slots) {
  if (groups.groups.empty()) throw std::invalid_argument("allocate_slots: no groups");
  if (total_slots < 0) throw std::invalid_argument("allocate_slots: negative slot budget");
  SlotAllocation out;
  std::vector<long long> group_max;
  long long sum = 0;
  for (const auto& g : groups.groups) {
    long long m = 0;
    for (LinkId l : g) {
      const auto it = required.find(l);
      if (it == required.end()) throw std::invalid_argument("allocate_slots: missing requirement for " + to_string(l));
      out.required_per_link[l] = it->second;
      m = std::max<long long>(m, it->second);
    }
    group_max.push_back(m);
    sum += m;
  }
  for (long long m : group_max)
    out.per_group_slots.push_back(sum == 0 ? 0 : static_cast<int>(m * total_slots / sum));
  return out;
}

/// gamma = g / (l * eta) with boresight gain, in 1/W.
inline double channel_quality(const Link& link, const ChannelView& view) {
  return view.boresight_gain(link) / (link.pathloss_linear * view.params().noise_power);
}

/// Power split of one sender inside one group. `power[i]` belongs to the
/// i-th input quality; `water_level` is 1 / phi*.
struct PowerSlice {
  std::vector<double> power;
  double water_level = 0.0;
  std::size_t active = 0;  // links with positive power
};

/// Water-filling over the sender's links: sort qualities in descending
/// order, take the largest prefix m whose level (P + sum 1/gamma_j) / m sits
/// above 1/gamma_m and not above 1/gamma_{m+1}.
inline PowerSlice allocate_power(std::span<const double> gamma, double p_max) {
  if (gamma.empty()) throw std::invalid_argument("allocate_power: no links");
  if (!(p_max > 0.0)) throw std::invalid_argument("allocate_power: p_max must be positive");
  for (double g : gamma)
    if (!(g > 0.0)) throw std::invalid_argument("allocate_power: channel quality must be positive");

  const std::size_t m_total = gamma.size();
  std::vector<std::size_t> order(m_total);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return gamma[a] > gamma[b]; });

  std::vector<double> level(m_total);
  double inv_sum = 0.0;
  for (std::size_t i = 0; i < m_total; ++i) {
    inv_sum += 1.0 / gamma[order[i]];
    level[i] = (p_max + inv_sum) / static_cast<double>(i + 1);
  }

  std::size_t m = 0;  // 1-based prefix length; 0 = not found yet
  std::size_t fallback = 1;
  for (std::size_t i = 0; i < m_total; ++i) {
    if (!(level[i] > 1.0 / gamma[order[i]])) continue;
    fallback = i + 1;
    const bool last = i + 1 == m_total;
    if (last || level[i] <= 1.0 / gamma[order[i + 1]]) m = i + 1;
  }
  if (m == 0) m = fallback;

  PowerSlice out;
  out.power.assign(m_total, 0.0);
  out.water_level = level[m - 1];
  for (std::size_t i = 0; i < m; ++i) {
    const double p = std::max(out.water_level - 1.0 / gamma[order[i]], 0.0);
    out.power[order[i]] = p;
    if (p > 0.0) ++out.active;
  }
  return out;
}

/// Largest violation of the optimality conditions of the sum-log-rate power
/// split. Power terms are relative to p_max and multiplier terms relative to
/// phi*, which keeps the figure independent of the quality scale.
inline double kkt_residual(const PowerSlice& slice, std::span<const double> gamma, double p_max) {
  if (slice.power.size() != gamma.size()) throw std::invalid_argument("kkt_residual: size mismatch");
  const double phi = 1.0 / slice.water_level;
  double total = 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    const double p = slice.power[i];
    total += p;
    worst = std::max(worst, std::max(-p, 0.0) / p_max);
    const double marginal = gamma[i] / (1.0 + gamma[i] * std::max(p, 0.0));
    const double omega = phi - marginal;
    if (p > 0.0) {
      worst = std::max(worst, std::abs(marginal - phi) / phi);      // stationarity
      worst = std::max(worst, std::abs(omega * p) / (phi * p_max)); // complementary slackness
    } else {
      worst = std::max(worst, std::max(-omega, 0.0) / phi);         // dual feasibility
    }
  }
  worst = std::max(worst, std::abs(total - p_max) / p_max);
  return worst;
}

}  // namespace mmiab
