#pragma once

// Joint scheduling and resource allocation: conflict graph -> CG-MIS groups
// -> proportional slot split -> per-sender water-filling -> actual-SINR rates.

#include <algorithm>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "mmiab/channel.hpp"
#include "mmiab/graphs.hpp"
#include "mmiab/resources.hpp"
#include "mmiab/scheduling.hpp"

namespace mmiab {

enum class SwitchPointMode { Flexible, Fixed };

/// Resolved state of one scheduled link inside a plan.
struct LinkPlan {
  LinkId id;
  std::size_t group = 0;
  double power = 0.0;      // W
  double bandwidth = 0.0;  // Hz
  double sinr = 0.0;
  double capacity = 0.0;   // bit/s while active
  int slots = 0;
};

struct SchedulePlan {
  SdmaGroups groups;
  std::vector<int> group_slots;
  std::vector<LinkPlan> links;  // sorted by link id
  int slots_per_frame = 0;

  const LinkPlan* find(LinkId id) const {
    auto it = std::lower_bound(links.begin(), links.end(), id,
                               [](const LinkPlan& p, LinkId l) { return p.id < l; });
    return it == links.end() || it->id != id ? nullptr : &*it;
  }

  /// Frame-averaged rate r_i * n^(k) / N.
  double rate(LinkId id) const {
    const LinkPlan* p = find(id);
    return p ? p->capacity * p->slots / slots_per_frame : 0.0;
  }

  /// Sum over links of r_i * n^(k).
  double objective() const {
    double sum = 0.0;
    for (const auto& l : links) sum += l.capacity * l.slots;
    return sum;
  }

  int total_slots() const {
    int t = 0;
    for (int n : group_slots) t += n;
    return t;
  }
};

/// Power, bandwidth and SINR of every member of one simultaneous group. Each
/// sender splits its bandwidth evenly and water-fills its power budget over
/// its own links; interference comes from every other member of the group.
inline std::vector<LinkPlan> evaluate_group(const ChannelView& view, std::span<const LinkId> group,
                                            std::size_t group_index = 0) {
  const auto& s = view.scenario();
  std::map<NodeId, std::vector<std::size_t>> by_sender;
  for (std::size_t i = 0; i < group.size(); ++i) by_sender[s.link(group[i]).tx].push_back(i);

  std::vector<LinkPlan> out(group.size());
  for (const auto& [sender, members] : by_sender) {
    std::vector<double> gamma;
    for (auto i : members) gamma.push_back(channel_quality(s.link(group[i]), view));
    const PowerSlice slice = allocate_power(gamma, view.node(sender).p_max);
    const double bw = view.params().system_bandwidth / static_cast<double>(members.size());
    for (std::size_t m = 0; m < members.size(); ++m) {
      auto& lp = out[members[m]];
      lp.id = group[members[m]];
      lp.group = group_index;
      lp.power = slice.power[m];
      lp.bandwidth = bw;
    }
  }

  std::vector<Interferer> others;
  for (std::size_t i = 0; i < group.size(); ++i) {
    others.clear();
    for (std::size_t j = 0; j < group.size(); ++j)
      if (j != i) others.push_back({s.link(group[j]), out[j].power});
    const LinkBudget b = link_sinr(s.link(group[i]), out[i].power, others, view, out[i].bandwidth);
    out[i].sinr = b.sinr;
    out[i].capacity = link_capacity(b.bandwidth, b.sinr, out[i].power > 0.0);
  }
  return out;
}

/// Assembles a plan from explicit groups and per-group slot counts.
inline SchedulePlan assemble_plan(const ChannelView& view, SdmaGroups groups, std::vector<int> slots) {
  if (slots.size() != groups.groups.size()) throw std::invalid_argument("assemble_plan: slot/group count mismatch");
  SchedulePlan plan;
  plan.slots_per_frame = view.params().slots_per_frame;
  for (std::size_t k = 0; k < groups.groups.size(); ++k) {
    for (auto lp : evaluate_group(view, groups.groups[k], k)) {
      lp.slots = slots[k];
      plan.links.push_back(lp);
    }
  }
  std::sort(plan.links.begin(), plan.links.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  plan.groups = std::move(groups);
  plan.group_slots = std::move(slots);
  return plan;
}

/// Splits every group into its downlink part followed by its uplink part,
/// dropping empty halves. Grouping decisions are unchanged.
inline SdmaGroups split_by_direction(const SdmaGroups& groups, const NetworkScenario& s,
                                     std::size_t* downlink_count) {
  SdmaGroups dl, ul;
  for (const auto& g : groups.groups) {
    std::vector<LinkId> d, u;
    for (LinkId l : g) (s.link(l).direction == Direction::Downlink ? d : u).push_back(l);
    if (!d.empty()) dl.groups.push_back(std::move(d));
    if (!u.empty()) ul.groups.push_back(std::move(u));
  }
  *downlink_count = dl.groups.size();
  for (auto& g : ul.groups) dl.groups.push_back(std::move(g));
  return dl;
}

/// Water-filling can leave a weak link of a sender with no power, which
/// would schedule it without serving it. Such links leave their group and
/// are grouped again among themselves in further groups. Every round the
/// strongest link of each sender keeps power, so this terminates.
inline SdmaGroups defer_unpowered(const ChannelView& view, SdmaGroups groups) {
  std::size_t from = 0;
  while (from < groups.groups.size()) {
    std::vector<LinkId> deferred;
    const std::size_t to = groups.groups.size();
    for (std::size_t k = from; k < to; ++k) {
      auto& g = groups.groups[k];
      std::vector<LinkId> kept;
      for (const auto& lp : evaluate_group(view, g)) (lp.power > 0.0 ? kept : deferred).push_back(lp.id);
      g = std::move(kept);
    }
    if (deferred.empty()) break;
    for (auto& g : cg_mis_schedule(build_conflict_graph(view, deferred)).groups) groups.groups.push_back(std::move(g));
    from = to;
  }
  return groups;
}

/// Full JSRA pipeline over the active links. `required` must hold a slot
/// requirement for every active link.
inline SchedulePlan plan_jsra(const ChannelView& view, std::span<const LinkId> active,
                              const std::map<LinkId, int>& required,
                              SwitchPointMode mode = SwitchPointMode::Flexible) {
  SchedulePlan empty;
  empty.slots_per_frame = view.params().slots_per_frame;
  if (active.empty()) return empty;

  SdmaGroups groups = defer_unpowered(view, cg_mis_schedule(build_conflict_graph(view, active)));
  const int n = view.params().slots_per_frame;

  if (mode == SwitchPointMode::Flexible) {
    auto alloc = allocate_slots(groups, required, n);
    return assemble_plan(view, std::move(groups), std::move(alloc.per_group_slots));
  }

  // Fixed switch point: floor(N/2) slots for the downlink halves of the
  // groups, the remainder for the uplink halves.
  std::size_t n_dl = 0;
  SdmaGroups split = split_by_direction(groups, view.scenario(), &n_dl);
  std::vector<int> slots;
  auto allocate_half = [&](std::size_t from, std::size_t to, int budget) {
    if (from == to) return;
    SdmaGroups half;
    half.groups.assign(split.groups.begin() + from, split.groups.begin() + to);
    auto a = allocate_slots(half, required, budget);
    slots.insert(slots.end(), a.per_group_slots.begin(), a.per_group_slots.end());
  };
  allocate_half(0, n_dl, n / 2);
  allocate_half(n_dl, split.groups.size(), n - n / 2);
  return assemble_plan(view, std::move(split), std::move(slots));
}

/// One link per slot at full power: the capacity every slot-exclusive
/// scheme (TDMA, round robin, proportional fair) sees.
inline LinkPlan exclusive_link_plan(const ChannelView& view, const Link& l, int slots) {
  LinkPlan p;
  p.id = l.id;
  p.power = view.node(l.tx).p_max;
  p.bandwidth = view.params().system_bandwidth;
  p.sinr = view.received_power(l, p.power) / view.params().noise_power;
  p.capacity = link_capacity(p.bandwidth, p.sinr, true);
  p.slots = slots;
  return p;
}

}  // namespace mmiab
