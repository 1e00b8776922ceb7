#pragma once

// Snapshot experiments: build a scenario per seed, route it, run every
// scheme, and aggregate UE rates, latency and switch points.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mmiab/engine.hpp"
#include "mmiab/routing.hpp"
#include "mmiab/scenario_io.hpp"
#include "mmiab/scenarios.hpp"

namespace mmiab {

enum class ScenarioKind { Manhattan, Platoon, File };
enum class RoutingMode { Fixed, Dynamic };

struct ExperimentConfig {
  ScenarioKind kind = ScenarioKind::Manhattan;
  ManhattanConfig manhattan;
  PlatoonConfig platoon;
  std::string scenario_file;
  SystemParams params;
  std::vector<Scheme> schemes{Scheme::Jsra, Scheme::Tdma};
  RoutingMode routing = RoutingMode::Fixed;
  SwitchPointMode switch_point = SwitchPointMode::Flexible;
  int snapshots = 1000;
  std::uint64_t seed = 1;
  int threads = 1;
  TrafficTrace trace;
};

/// Linear-interpolation percentile, q in [0, 100].
inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double rank = q / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (rank - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline std::uint64_t snapshot_seed(std::uint64_t base, int index) {
  return detail::splitmix64(base ^ detail::splitmix64(static_cast<std::uint64_t>(index) + 1));
}

struct SchemeOutcome {
  Scheme scheme = Scheme::Jsra;
  std::map<NodeId, double> ue_rate;  // bit/s
  double avg_rate = 0.0;
  double edge_rate = 0.0;
  double objective = 0.0;      // first frame
  double group_count = 0.0;    // mean per frame
  double switch_point = std::numeric_limits<double>::quiet_NaN();  // mean over nodes and frames
  std::vector<double> latency; // frames, finite traffic only
  std::size_t censored = 0;
  double throughput = 0.0;     // bit/s
  std::vector<std::map<NodeId, double>> switch_trace;  // per frame

  bool has_latency() const { return !latency.empty(); }
  double mean_latency() const { return mean(latency); }
};

struct SnapshotResult {
  int index = 0;
  std::uint64_t seed = 0;
  std::size_t unrouted = 0;
  std::vector<SchemeOutcome> schemes;

  const SchemeOutcome& at(Scheme s) const {
    for (const auto& o : schemes)
      if (o.scheme == s) return o;
    throw std::out_of_range("scheme not run: " + to_string(s));
  }
};

inline NetworkScenario make_scenario(const ExperimentConfig& cfg, std::uint64_t seed) {
  switch (cfg.kind) {
    case ScenarioKind::Manhattan:
      return generate_manhattan(cfg.manhattan, cfg.params, seed);
    case ScenarioKind::Platoon:
      return generate_platoon(cfg.platoon, cfg.params, seed);
    case ScenarioKind::File:
      return load_scenario(cfg.scenario_file);
  }
  throw std::logic_error("make_scenario: unknown kind");
}

namespace detail {

inline bool all_finite(const std::vector<Flow>& flows) {
  return std::all_of(flows.begin(), flows.end(), [](const Flow& f) { return !f.demand.is_full_buffer(); });
}

inline double mean_switch_point(const std::map<NodeId, double>& sp, double& sum, std::size_t& count) {
  for (const auto& [_, v] : sp) sum += v, ++count;
  return count ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// Runs every scheme on one scenario with the given routes.
inline std::vector<SchemeOutcome> evaluate_schemes(const NetworkScenario& s, const std::map<NodeId, Route>& routes,
                                                   const ExperimentConfig& cfg) {
  const ChannelView view(s);
  const auto flows = build_flows(s, routes);
  std::vector<NodeId> ues;
  for (const auto& n : s.nodes)
    if (n.role == Role::Ue || n.role == Role::Vehicle) ues.push_back(n.id);
  std::vector<SchemeOutcome> out;
  for (Scheme scheme : cfg.schemes) {
    SchemeOutcome o;
    o.scheme = scheme;
    for (NodeId ue : ues) o.ue_rate[ue] = 0.0;
    double sp_sum = 0.0;
    std::size_t sp_count = 0;
    if (flows.empty()) {
      // nothing to schedule
    } else if (!detail::all_finite(flows)) {
      const FrameMetrics m = run_frame(view, flows, scheme, cfg.switch_point);
      for (const auto& [ue, r] : ue_rates(flows, [&](LinkId l) { return m.plan.rate(l); })) o.ue_rate[ue] = r;
      o.objective = m.objective;
      o.group_count = static_cast<double>(m.group_count);
      o.switch_point = detail::mean_switch_point(m.switch_point, sp_sum, sp_count);
      o.switch_trace.push_back(m.switch_point);
    } else {
      const TrafficResult t = simulate_traffic(view, flows, scheme, cfg.trace, cfg.switch_point, true);
      const double span = std::max(t.frames_run, 1) * s.params.frame_length;
      for (const auto& [ue, bits] : t.delivered) o.ue_rate[ue] = bits / span;
      o.latency = t.latency;
      o.censored = t.censored;
      o.throughput = t.throughput(s.params.frame_length);
      double groups = 0.0;
      for (const auto& f : t.frames) {
        o.switch_trace.push_back(f.switch_point);
        o.switch_point = detail::mean_switch_point(f.switch_point, sp_sum, sp_count);
        groups += static_cast<double>(f.group_count);
      }
      if (!t.frames.empty()) {
        o.objective = t.frames.front().objective;
        o.group_count = groups / static_cast<double>(t.frames.size());
      }
    }
    std::vector<double> rates;
    for (const auto& [_, r] : o.ue_rate) rates.push_back(r);
    o.avg_rate = rates.empty() ? 0.0 : mean(rates);
    o.edge_rate = rates.empty() ? 0.0 : percentile(rates, 5.0);
    out.push_back(std::move(o));
  }
  return out;
}

inline SnapshotResult run_snapshot(const ExperimentConfig& cfg, int index) {
  SnapshotResult r;
  r.index = index;
  r.seed = cfg.kind == ScenarioKind::File ? cfg.seed : snapshot_seed(cfg.seed, index);
  const NetworkScenario s = make_scenario(cfg, r.seed);
  std::map<NodeId, Route> routes = s.routes;
  if (cfg.routing == RoutingMode::Dynamic) {
    std::vector<NodeId> ues;
    for (const auto& [ue, _] : s.routes) ues.push_back(ue);
    const RoutingResult dr = dynamic_routing(s, ues);
    routes = dr.routes();
    r.unrouted = dr.unrouted.size();
  }
  r.schemes = evaluate_schemes(s, routes, cfg);
  return r;
}

struct SchemeSummary {
  Scheme scheme = Scheme::Jsra;
  double edge_rate = 0.0;     // 5th percentile of pooled UE rates
  double avg_rate = 0.0;      // mean of pooled UE rates
  double mean_latency = std::numeric_limits<double>::quiet_NaN();
  double throughput = 0.0;    // mean over snapshots
  double switch_point = std::numeric_limits<double>::quiet_NaN();
};

struct RunSummary {
  std::vector<SnapshotResult> snapshots;
  std::vector<SchemeSummary> schemes;

  const SchemeSummary& at(Scheme s) const {
    for (const auto& o : schemes)
      if (o.scheme == s) return o;
    throw std::out_of_range("scheme not run: " + to_string(s));
  }
};

inline RunSummary summarize(std::vector<SnapshotResult> snapshots, const std::vector<Scheme>& schemes) {
  RunSummary r;
  for (Scheme scheme : schemes) {
    SchemeSummary sum;
    sum.scheme = scheme;
    std::vector<double> rates, latency, throughput, sp;
    for (const auto& snap : snapshots) {
      const auto& o = snap.at(scheme);
      for (const auto& [_, v] : o.ue_rate) rates.push_back(v);
      latency.insert(latency.end(), o.latency.begin(), o.latency.end());
      throughput.push_back(o.throughput);
      if (!std::isnan(o.switch_point)) sp.push_back(o.switch_point);
    }
    sum.edge_rate = rates.empty() ? 0.0 : percentile(rates, 5.0);
    sum.avg_rate = rates.empty() ? 0.0 : mean(rates);
    sum.mean_latency = mean(latency);
    sum.throughput = throughput.empty() ? 0.0 : mean(throughput);
    sum.switch_point = mean(sp);
    r.schemes.push_back(sum);
  }
  r.snapshots = std::move(snapshots);
  return r;
}

/// Snapshots run on `cfg.threads` workers; results keep snapshot order, so
/// the outcome does not depend on the thread count.
inline RunSummary run_simulation(const ExperimentConfig& cfg) {
  if (cfg.schemes.empty()) throw std::invalid_argument("run_simulation: no schemes");
  if (cfg.snapshots < 1) throw std::invalid_argument("run_simulation: snapshot count must be >= 1");
  std::vector<SnapshotResult> snaps(cfg.snapshots);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (int i = next++; i < cfg.snapshots && !failed; i = next++) {
      try {
        snaps[i] = run_snapshot(cfg, i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  const int n = std::clamp(cfg.threads, 1, cfg.snapshots);
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return summarize(std::move(snaps), cfg.schemes);
}

}  // namespace mmiab
