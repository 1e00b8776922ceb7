#pragma once

// Frame engine: per-frame plans for JSRA and the slot-exclusive baselines,
// frame metrics, and a queueing model that turns plans into packet latency.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmiab/flows.hpp"
#include "mmiab/jsra.hpp"

namespace mmiab {

enum class Scheme { Jsra, Tdma, RoundRobin, PropFair };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::Jsra: return "JSRA";
    case Scheme::Tdma: return "TDMA";
    case Scheme::RoundRobin: return "RoundRobin";
    case Scheme::PropFair: return "PropFair";
  }
  return "?";
}

/// Offered load of one link in one frame.
struct LinkLoad {
  int full_flows = 0;  // full-buffer flows crossing the link
  double bits = 0.0;   // finite backlog

  bool active() const { return full_flows > 0 || bits > 0.0; }
  bool unbounded() const { return full_flows > 0; }
};

using LoadMap = std::map<LinkId, LinkLoad>;

inline LoadMap full_buffer_load(const std::vector<Flow>& flows) {
  LoadMap m;
  for (const auto& f : flows)
    for (LinkId l : f.hops) {
      if (f.demand.is_full_buffer()) ++m[l].full_flows;
      else m[l].bits += f.demand.finite_bits();
    }
  return m;
}

struct FrameMetrics {
  SchedulePlan plan;
  std::map<LinkId, double> per_link_rate;  // bit/s, frame average
  double objective = 0.0;                  // sum of r_i n^(k)
  std::map<NodeId, double> switch_point;   // downlink share of a node's busy slots
  std::size_t group_count = 0;
};

/// Persistent state of the stateful baselines across frames.
struct SchedulerState {
  std::deque<LinkId> round_robin;          // backlogged links, service order
  std::map<LinkId, double> average_rate;   // proportional-fair history, bit/s
};

namespace detail {

inline int load_slots(const LinkLoad& load, double capacity, const SystemParams& p) {
  int need = load.full_flows > 0 ? 1 : 0;
  if (load.bits > 0.0) need += required_slots_for(Demand::bits(load.bits), capacity, p);
  return std::clamp(need, 1, p.slots_per_frame);
}

/// Plan in which every listed link owns its slots alone at full power.
inline SchedulePlan exclusive_plan(const ChannelView& view, const std::map<LinkId, int>& slots) {
  SchedulePlan plan;
  plan.slots_per_frame = view.params().slots_per_frame;
  for (const auto& [l, n] : slots) {
    if (n <= 0) continue;
    auto lp = exclusive_link_plan(view, view.scenario().link(l), n);
    lp.group = plan.groups.groups.size();
    plan.groups.groups.push_back({l});
    plan.group_slots.push_back(n);
    plan.links.push_back(lp);
  }
  return plan;
}

/// Largest-remainder split of `total` proportional to `weight`; ties in the
/// remainder go to the lower link id.
inline std::map<LinkId, int> apportion(const std::map<LinkId, int>& weight, int total) {
  std::map<LinkId, int> out;
  long long sum = 0;
  for (const auto& [_, w] : weight) sum += w;
  if (sum <= 0) return out;
  std::vector<std::pair<long long, LinkId>> rem;
  int used = 0;
  for (const auto& [l, w] : weight) {
    const long long num = static_cast<long long>(w) * total;
    out[l] = static_cast<int>(num / sum);
    used += out[l];
    rem.emplace_back(num % sum, l);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; used < total && i < rem.size(); ++i, ++used) ++out[rem[i].second];
  return out;
}

}  // namespace detail

inline SchedulePlan plan_frame(const ChannelView& view, const LoadMap& load, Scheme scheme,
                               SchedulerState& state, SwitchPointMode mode = SwitchPointMode::Flexible) {
  const auto& s = view.scenario();
  const auto& p = view.params();
  const int n = p.slots_per_frame;
  const double tau = p.slot_duration();

  std::vector<LinkId> active;
  for (const auto& [l, ld] : load)
    if (ld.active()) active.push_back(l);

  switch (scheme) {
    case Scheme::Jsra: {
      std::map<LinkId, int> req;
      for (LinkId l : active) req[l] = detail::load_slots(load.at(l), standalone_capacity(s.link(l), view), p);
      return plan_jsra(view, active, req, mode);
    }
    case Scheme::Tdma: {
      std::map<LinkId, int> req;
      for (LinkId l : active) req[l] = detail::load_slots(load.at(l), standalone_capacity(s.link(l), view), p);
      return detail::exclusive_plan(view, detail::apportion(req, n));
    }
    case Scheme::RoundRobin: {
      std::set<LinkId> queued(state.round_robin.begin(), state.round_robin.end());
      std::erase_if(state.round_robin, [&](LinkId l) { return !load.contains(l) || !load.at(l).active(); });
      for (LinkId l : active)
        if (!queued.contains(l)) state.round_robin.push_back(l);
      std::map<LinkId, double> left;
      for (LinkId l : active) left[l] = load.at(l).unbounded() ? std::numeric_limits<double>::infinity() : load.at(l).bits;
      std::map<LinkId, int> slots;
      for (int t = 0; t < n && !state.round_robin.empty(); ++t) {
        const LinkId l = state.round_robin.front();
        state.round_robin.pop_front();
        ++slots[l];
        left[l] -= standalone_capacity(s.link(l), view) * tau;
        if (left[l] > 0.0) state.round_robin.push_back(l);
      }
      // Links drained this frame rejoin at the back once they are backlogged again.
      return detail::exclusive_plan(view, slots);
    }
    case Scheme::PropFair: {
      const double beta = 1.0 / n;  // one-frame averaging window
      std::map<LinkId, double> left, cap;
      for (LinkId l : active) {
        cap[l] = standalone_capacity(s.link(l), view);
        left[l] = load.at(l).unbounded() ? std::numeric_limits<double>::infinity() : load.at(l).bits;
        state.average_rate.try_emplace(l, cap[l]);
      }
      std::map<LinkId, int> slots;
      for (int t = 0; t < n; ++t) {
        std::optional<LinkId> pick;
        double best = -1.0;
        for (LinkId l : active) {
          if (!(left[l] > 0.0)) continue;
          const double metric = cap[l] / state.average_rate[l];
          if (metric > best) best = metric, pick = l;
        }
        for (LinkId l : active) {
          const double served = pick && *pick == l ? cap[l] : 0.0;
          state.average_rate[l] = (1.0 - beta) * state.average_rate[l] + beta * served;
          state.average_rate[l] = std::max(state.average_rate[l], 1e-9 * cap[l]);
        }
        if (!pick) continue;
        ++slots[*pick];
        left[*pick] -= cap[*pick] * tau;
      }
      return detail::exclusive_plan(view, slots);
    }
  }
  throw std::logic_error("plan_frame: unknown scheme");
}

/// Downlink share of the slots in which each node transmits or receives.
inline std::map<NodeId, double> switch_points(const SchedulePlan& plan, const NetworkScenario& s) {
  std::map<NodeId, std::pair<long long, long long>> busy;  // downlink, uplink slots
  for (std::size_t k = 0; k < plan.groups.groups.size(); ++k) {
    std::map<NodeId, std::pair<bool, bool>> seen;
    for (LinkId l : plan.groups.groups[k]) {
      const Link& link = s.link(l);
      for (NodeId v : {link.tx, link.rx}) {
        auto& f = seen[v];
        (link.direction == Direction::Downlink ? f.first : f.second) = true;
      }
    }
    for (const auto& [v, f] : seen) {
      if (f.first) busy[v].first += plan.group_slots[k];
      if (f.second) busy[v].second += plan.group_slots[k];
    }
  }
  std::map<NodeId, double> out;
  for (const auto& [v, b] : busy)
    if (b.first + b.second > 0) out[v] = static_cast<double>(b.first) / static_cast<double>(b.first + b.second);
  return out;
}

inline FrameMetrics frame_metrics(SchedulePlan plan, const NetworkScenario& s) {
  FrameMetrics m;
  for (const auto& lp : plan.links) m.per_link_rate[lp.id] = plan.rate(lp.id);
  m.objective = plan.objective();
  m.switch_point = switch_points(plan, s);
  m.group_count = plan.groups.groups.size();
  m.plan = std::move(plan);
  return m;
}

/// One frame under full-buffer (or fixed per-frame) load with fresh
/// scheduler state.
inline FrameMetrics run_frame(const ChannelView& view, const std::vector<Flow>& flows, Scheme scheme,
                              SwitchPointMode mode = SwitchPointMode::Flexible) {
  SchedulerState state;
  return frame_metrics(plan_frame(view, full_buffer_load(flows), scheme, state, mode), view.scenario());
}

inline FrameMetrics run_frame(const NetworkScenario& s, const std::map<NodeId, Route>& routes, Scheme scheme,
                              SwitchPointMode mode = SwitchPointMode::Flexible) {
  const ChannelView view(s);
  return run_frame(view, build_flows(s, routes), scheme, mode);
}

// ---------------------------------------------------------------------------
// Packet-level queueing

struct TrafficTrace {
  int arrival_frames = 1;  // frames in which every finite flow injects its demand
  int max_frames = 200;    // hard stop; undelivered packets are censored here
};

struct TrafficResult {
  std::vector<double> latency;         // frames, one entry per packet
  std::size_t censored = 0;            // packets still in flight at the stop
  std::vector<FrameMetrics> frames;
  std::map<NodeId, double> delivered;  // bits per UE
  double delivered_bits = 0.0;
  int frames_run = 0;                  // up to and including the last delivery

  double mean_latency() const {
    if (latency.empty()) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (double l : latency) sum += l;
    return sum / latency.size();
  }

  double throughput(double frame_length) const {
    return frames_run == 0 ? 0.0 : delivered_bits / (frames_run * frame_length);
  }
};

/// Store-and-forward queues over the flows' hops. Bits that cross a hop in
/// frame f move on in frame f + 1, or still in frame f when the next hop is
/// scheduled in the same group (the relay receives and transmits at once).
/// Packets are delivered when their last bit reaches the destination;
/// latency = delivery frame - arrival frame + 1.
class TrafficEngine {
 public:
  TrafficEngine(const ChannelView& view, std::vector<Flow> flows) : view_(view), flows_(std::move(flows)) {
    for (const auto& f : flows_)
      if (f.demand.is_full_buffer()) throw std::invalid_argument("TrafficEngine: flows need finite demand");
    order_links();
  }

  /// Load each link would see if scheduled now. With `through_relays`, bits
  /// queued upstream count too while every relay in between is full duplex.
  LoadMap load(bool through_relays) const {
    LoadMap out;
    for (std::size_t fi = 0; fi < flows_.size(); ++fi) {
      const auto& f = flows_[fi];
      double carried = 0.0;
      for (std::size_t h = 0; h < f.hops.size(); ++h) {
        const double here = ready_bits(fi, h);
        carried = (through_relays ? carried : 0.0) + here;
        if (carried > 0.0) out[f.hops[h]].bits += carried;
        const Link& l = view_.scenario().link(f.hops[h]);
        if (view_.node(l.rx).duplex == Duplex::Half) carried = 0.0;
      }
    }
    return out;
  }

  void inject(int frame) {
    for (std::size_t fi = 0; fi < flows_.size(); ++fi) {
      const double bits = flows_[fi].demand.finite_bits();
      if (bits <= 0.0 || flows_[fi].hops.empty()) continue;
      packets_.push_back({fi, frame, bits, -1});
      queues_[key(fi, 0)].push_back({packets_.size() - 1, bits, frame});
    }
  }

  /// Serves one frame under `plan`.
  void step(int frame, const SchedulePlan& plan, TrafficResult& out) {
    const double frame_length = view_.params().frame_length;
    std::map<LinkId, double> budget;
    for (const auto& lp : plan.links) budget[lp.id] = plan.rate(lp.id) * frame_length;

    for (LinkId l : link_order_) {
      double& left = budget[l];
      if (left <= 0.0) continue;
      // FIFO across the flows sharing the link, by packet arrival.
      for (;;) {
        Chunk* head = nullptr;
        std::size_t head_hop = 0;
        for (const auto& [fi, h] : users_[l]) {
          auto& q = queues_[key(fi, h)];
          if (q.empty() || q.front().ready > frame) continue;
          if (!head || packets_[q.front().packet].arrival < packets_[head->packet].arrival ||
              (packets_[q.front().packet].arrival == packets_[head->packet].arrival &&
               q.front().packet < head->packet)) {
            head = &q.front();
            head_hop = h;
          }
        }
        if (!head || left <= 0.0) break;
        const std::size_t fi = packets_[head->packet].flow;
        const double moved = std::min(left, head->bits);
        left -= moved;
        head->bits -= moved;
        const std::size_t pkt = head->packet;
        if (head->bits <= 1e-9) queues_[key(fi, head_hop)].pop_front();
        forward(pkt, fi, head_hop, moved, frame, plan, out);
      }
    }
  }

  bool idle() const {
    for (const auto& [_, q] : queues_)
      if (!q.empty()) return false;
    return true;
  }

  /// Censors every undelivered packet at `frame`.
  void close(int frame, TrafficResult& out) const {
    for (const auto& p : packets_)
      if (p.delivered < 0) {
        out.latency.push_back(frame - p.arrival + 1);
        ++out.censored;
      }
  }

 private:
  struct Chunk {
    std::size_t packet;
    double bits;
    int ready;
  };
  struct Packet {
    std::size_t flow;
    int arrival;
    double remaining;
    int delivered;
  };

  static std::uint64_t key(std::size_t flow, std::size_t hop) { return (static_cast<std::uint64_t>(flow) << 16) | hop; }

  double ready_bits(std::size_t fi, std::size_t h) const {
    auto it = queues_.find(key(fi, h));
    if (it == queues_.end()) return 0.0;
    double sum = 0.0;
    for (const auto& c : it->second) sum += c.bits;
    return sum;
  }

  void forward(std::size_t pkt, std::size_t fi, std::size_t h, double bits, int frame, const SchedulePlan& plan,
               TrafficResult& out) {
    const auto& f = flows_[fi];
    if (h + 1 == f.hops.size()) {
      auto& p = packets_[pkt];
      p.remaining -= bits;
      out.delivered[f.ue] += bits;
      out.delivered_bits += bits;
      out.frames_run = std::max(out.frames_run, frame + 1);
      if (p.remaining <= 1e-6 && p.delivered < 0) {
        p.delivered = frame;
        out.latency.push_back(frame - p.arrival + 1);
      }
      return;
    }
    const LinkPlan* here = plan.find(f.hops[h]);
    const LinkPlan* next = plan.find(f.hops[h + 1]);
    const bool through = here && next && here->group == next->group;
    auto& q = queues_[key(fi, h + 1)];
    const int ready = through ? frame : frame + 1;
    if (!q.empty() && q.back().packet == pkt && q.back().ready == ready) q.back().bits += bits;
    else q.push_back({pkt, bits, ready});
  }

  /// Upstream hops before downstream ones; ties and cycles by link id.
  void order_links() {
    std::map<LinkId, std::set<LinkId>> succ;
    std::map<LinkId, int> indeg;
    for (std::size_t fi = 0; fi < flows_.size(); ++fi) {
      const auto& f = flows_[fi];
      for (std::size_t h = 0; h < f.hops.size(); ++h) {
        users_[f.hops[h]].emplace_back(fi, h);
        indeg.try_emplace(f.hops[h], 0);
        if (h + 1 < f.hops.size() && succ[f.hops[h]].insert(f.hops[h + 1]).second) ++indeg[f.hops[h + 1]];
      }
    }
    std::set<LinkId> ready;
    for (const auto& [l, d] : indeg)
      if (d == 0) ready.insert(l);
    std::set<LinkId> done;
    while (done.size() < indeg.size()) {
      if (ready.empty()) {
        for (const auto& [l, _] : indeg)
          if (!done.contains(l)) {
            ready.insert(l);
            break;
          }
      }
      const LinkId l = *ready.begin();
      ready.erase(ready.begin());
      if (!done.insert(l).second) continue;
      link_order_.push_back(l);
      for (LinkId n : succ[l])
        if (--indeg[n] == 0 && !done.contains(n)) ready.insert(n);
    }
  }

  const ChannelView& view_;
  std::vector<Flow> flows_;
  std::vector<Packet> packets_;
  std::map<std::uint64_t, std::deque<Chunk>> queues_;
  std::map<LinkId, std::vector<std::pair<std::size_t, std::size_t>>> users_;
  std::vector<LinkId> link_order_;
};

/// Latency under an explicit plan per frame; the last plan repeats once the
/// sequence runs out.
inline TrafficResult packet_latency(const ChannelView& view, const std::vector<Flow>& flows,
                                    const std::vector<SchedulePlan>& plans, const TrafficTrace& trace) {
  if (plans.empty()) throw std::invalid_argument("packet_latency: no plans");
  TrafficEngine engine(view, flows);
  TrafficResult out;
  int f = 0;
  for (; f < trace.max_frames; ++f) {
    if (f < trace.arrival_frames) engine.inject(f);
    const SchedulePlan& plan = plans[std::min<std::size_t>(f, plans.size() - 1)];
    engine.step(f, plan, out);
    if (f + 1 >= trace.arrival_frames && engine.idle()) break;
  }
  engine.close(std::min(f, trace.max_frames - 1), out);
  return out;
}

/// Latency when `scheme` re-plans every frame from the queues it sees.
inline TrafficResult simulate_traffic(const ChannelView& view, const std::vector<Flow>& flows, Scheme scheme,
                                      const TrafficTrace& trace, SwitchPointMode mode = SwitchPointMode::Flexible,
                                      bool keep_frames = false) {
  TrafficEngine engine(view, flows);
  SchedulerState state;
  TrafficResult out;
  int f = 0;
  for (; f < trace.max_frames; ++f) {
    if (f < trace.arrival_frames) engine.inject(f);
    const LoadMap load = engine.load(scheme == Scheme::Jsra);
    SchedulePlan plan = plan_frame(view, load, scheme, state, mode);
    engine.step(f, plan, out);
    if (keep_frames) out.frames.push_back(frame_metrics(std::move(plan), view.scenario()));
    if (f + 1 >= trace.arrival_frames && engine.idle()) break;
  }
  engine.close(std::min(f, trace.max_frames - 1), out);
  return out;
}

}  // namespace mmiab
