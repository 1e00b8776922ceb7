#pragma once

// Experiment configuration files and result writers.
//
//   {
//     "scenario": { "kind": "manhattan", "ue_count": 100, "ap_duplex": "half" },
//     "schemes": ["jsra", "tdma"],
//     "routing": "fixed",
//     "snapshots": 200,
//     "seed": 1,
//     "output": { "csv": "results.csv", "json": "summary.json" }
//   }
//
// configs/SCHEMA.md lists every field. Errors name the file, the line and
// the offending field.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmiab/experiment.hpp"
#include "mmiab/scenario_io.hpp"

namespace mmiab {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, int line, std::string field, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + (field.empty() ? "" : field + ": ") + what),
        source_(std::move(source)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& source() const { return source_; }
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string source_;
  int line_;
  std::string field_;
};

struct OutputPaths {
  std::string csv;
  std::string json;
  std::string trace;  // per-frame switch points; empty = not written
};

struct RunConfig {
  ExperimentConfig experiment;
  OutputPaths output;
};

namespace detail {

/// Line of every value in a JSON text, keyed by JSON pointer. Only called on
/// text the JSON parser already accepted.
class JsonLines {
 public:
  explicit JsonLines(const std::string& text) : t_(text) {
    skip();
    value("");
  }

  int line(const std::string& pointer) const {
    for (std::string p = pointer;; p = p.substr(0, p.rfind('/'))) {
      if (auto it = lines_.find(p); it != lines_.end()) return it->second;
      if (p.empty()) return 1;
    }
  }

 private:
  void skip() {
    while (i_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[i_]))) {
      if (t_[i_] == '\n') ++line_;
      ++i_;
    }
  }

  std::string string() {
    std::string out;
    for (++i_; i_ < t_.size() && t_[i_] != '"'; ++i_) {
      if (t_[i_] == '\\') ++i_;
      out += t_[i_];
    }
    ++i_;
    return out;
  }

  void value(const std::string& ptr) {
    lines_[ptr] = line_;
    if (i_ >= t_.size()) return;
    const char c = t_[i_];
    if (c == '{') {
      ++i_;
      for (skip(); i_ < t_.size() && t_[i_] != '}';) {
        const int key_line = line_;
        const std::string key = string();
        skip();
        ++i_;  // ':'
        skip();
        value(ptr + "/" + key);
        lines_[ptr + "/" + key] = key_line;
        skip();
        if (t_[i_] == ',') ++i_, skip();
      }
      ++i_;
    } else if (c == '[') {
      ++i_;
      int k = 0;
      for (skip(); i_ < t_.size() && t_[i_] != ']'; ++k) {
        value(ptr + "/" + std::to_string(k));
        skip();
        if (t_[i_] == ',') ++i_, skip();
      }
      ++i_;
    } else if (c == '"') {
      string();
    } else {
      while (i_ < t_.size() && !std::strchr(",]} \t\r\n", t_[i_])) ++i_;
    }
  }

  const std::string& t_;
  std::size_t i_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

class ConfigReader {
 public:
  ConfigReader(const std::string& text, std::string source) : source_(std::move(source)) {
    try {
      root_ = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      int line = 1;
      const std::size_t end = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
      for (std::size_t k = 0; k < end; ++k)
        if (text[k] == '\n') ++line;
      throw ConfigError(source_, line, "", "malformed JSON");
    }
    lines_.emplace(text);
  }

  const nlohmann::json& root() const { return root_; }

  [[noreturn]] void fail(const std::string& ptr, const std::string& what) const {
    throw ConfigError(source_, lines_->line(ptr), field_name(ptr), what);
  }

  const nlohmann::json& object(const std::string& ptr, const nlohmann::json& j,
                               std::initializer_list<const char*> allowed) const {
    if (!j.is_object()) fail(ptr, "expected an object");
    for (const auto& [key, _] : j.items()) {
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) fail(ptr + "/" + key, "unknown field");
    }
    return j;
  }

  const nlohmann::json& require(const std::string& ptr, const nlohmann::json& parent, const char* key) const {
    if (!parent.contains(key)) fail(ptr + "/" + key, "missing required field");
    return parent.at(key);
  }

  template <typename T>
  void get(const std::string& ptr, const nlohmann::json& parent, const char* key, T& out) const {
    if (!parent.contains(key)) return;
    const auto& v = parent.at(key);
    const std::string at = ptr + "/" + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(at, "expected true or false");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(at, "expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(at, "expected a number");
    } else {
      if (!v.is_string()) fail(at, "expected a string");
    }
    out = v.get<T>();
  }

  template <typename E>
  E choice(const std::string& ptr, const nlohmann::json& v, const std::vector<std::pair<const char*, E>>& names) const {
    std::string allowed;
    for (const auto& [n, e] : names) {
      if (v.is_string() && v.get<std::string>() == n) return e;
      allowed += (allowed.empty() ? "" : ", ") + std::string(n);
    }
    fail(ptr, "expected one of " + allowed);
  }

 private:
  static std::string field_name(const std::string& ptr) {
    std::string out;
    std::stringstream ss(ptr);
    for (std::string part; std::getline(ss, part, '/');)
      if (!part.empty()) out += (out.empty() ? "" : ".") + part;
    return out;
  }

  std::string source_;
  nlohmann::json root_;
  std::optional<JsonLines> lines_;
};

inline const std::vector<std::pair<const char*, Scheme>>& scheme_names() {
  static const std::vector<std::pair<const char*, Scheme>> v{
      {"jsra", Scheme::Jsra}, {"tdma", Scheme::Tdma}, {"round_robin", Scheme::RoundRobin}, {"prop_fair", Scheme::PropFair}};
  return v;
}

inline const std::vector<std::pair<const char*, Duplex>>& duplex_names() {
  static const std::vector<std::pair<const char*, Duplex>> v{
      {"half", Duplex::Half}, {"full_perfect", Duplex::FullPerfect}, {"full_residual", Duplex::FullResidual}};
  return v;
}

template <typename E>
std::string name_of(E e, const std::vector<std::pair<const char*, E>>& names) {
  for (const auto& [n, x] : names)
    if (x == e) return n;
  return "?";
}

inline Demand read_demand(const ConfigReader& r, const std::string& ptr, const nlohmann::json& v) {
  if (v.is_string() && v.get<std::string>() == "full_buffer") return Demand::full_buffer();
  if (!v.is_number() || v.get<double>() < 0.0) r.fail(ptr, "expected \"full_buffer\" or bits >= 0");
  return Demand::bits(v.get<double>());
}

inline nlohmann::json demand_json(const Demand& d) {
  if (d.is_full_buffer()) return "full_buffer";
  return d.finite_bits();
}

}  // namespace detail

inline std::string to_config_name(Scheme s) { return detail::name_of(s, detail::scheme_names()); }
inline std::string to_config_name(Duplex d) { return detail::name_of(d, detail::duplex_names()); }

/// Parses a configuration document. `source` names it in diagnostics.
inline RunConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  const detail::ConfigReader r(text, source);
  const auto& root = r.object("", r.root(),
                              {"scenario", "schemes", "routing", "switch_point", "snapshots", "seed", "threads",
                               "traffic", "trace", "params", "output"});
  RunConfig rc;
  ExperimentConfig& c = rc.experiment;

  const auto& sc = r.object("/scenario", r.require("", root, "scenario"),
                            {"kind", "ue_count", "blocks", "block_length", "street_width", "ap_duplex", "bs_duplex",
                             "vehicles", "speed_kmh", "bt_enabled", "bt_mode", "path"});
  c.kind = r.choice("/scenario/kind", r.require("/scenario", sc, "kind"),
                    std::vector<std::pair<const char*, ScenarioKind>>{
                        {"manhattan", ScenarioKind::Manhattan}, {"platoon", ScenarioKind::Platoon}, {"file", ScenarioKind::File}});
  r.get("/scenario", sc, "ue_count", c.manhattan.ue_count);
  r.get("/scenario", sc, "blocks", c.manhattan.blocks);
  r.get("/scenario", sc, "block_length", c.manhattan.block_length);
  r.get("/scenario", sc, "street_width", c.manhattan.street_width);
  if (sc.contains("ap_duplex")) c.manhattan.ap_duplex = r.choice("/scenario/ap_duplex", sc["ap_duplex"], detail::duplex_names());
  if (sc.contains("bs_duplex")) c.manhattan.bs_duplex = r.choice("/scenario/bs_duplex", sc["bs_duplex"], detail::duplex_names());
  r.get("/scenario", sc, "vehicles", c.platoon.vehicles);
  r.get("/scenario", sc, "speed_kmh", c.platoon.speed_kmh);
  r.get("/scenario", sc, "bt_enabled", c.platoon.bt_enabled);
  if (sc.contains("bt_mode")) c.platoon.bt_mode = r.choice("/scenario/bt_mode", sc["bt_mode"], detail::duplex_names());
  r.get("/scenario", sc, "path", c.scenario_file);
  if (c.kind == ScenarioKind::File && c.scenario_file.empty()) r.fail("/scenario/path", "missing required field");
  if (c.manhattan.ue_count < 0) r.fail("/scenario/ue_count", "must be >= 0");
  if (c.manhattan.blocks < 2 || c.manhattan.blocks % 2) r.fail("/scenario/blocks", "must be an even number >= 2");
  if (c.platoon.vehicles < 2) r.fail("/scenario/vehicles", "must be >= 2");
  if (c.platoon.bt_enabled < 0 || c.platoon.bt_enabled > c.platoon.vehicles)
    r.fail("/scenario/bt_enabled", "must lie in [0, vehicles]");

  const auto& schemes = r.require("", root, "schemes");
  if (!schemes.is_array() || schemes.empty()) r.fail("/schemes", "expected a non-empty list");
  c.schemes.clear();
  for (std::size_t k = 0; k < schemes.size(); ++k)
    c.schemes.push_back(r.choice("/schemes/" + std::to_string(k), schemes[k], detail::scheme_names()));

  if (root.contains("routing"))
    c.routing = r.choice("/routing", root["routing"],
                         std::vector<std::pair<const char*, RoutingMode>>{{"fixed", RoutingMode::Fixed},
                                                                          {"dynamic", RoutingMode::Dynamic}});
  if (root.contains("switch_point"))
    c.switch_point = r.choice("/switch_point", root["switch_point"],
                              std::vector<std::pair<const char*, SwitchPointMode>>{
                                  {"flexible", SwitchPointMode::Flexible}, {"fixed", SwitchPointMode::Fixed}});
  r.get("", root, "snapshots", c.snapshots);
  if (c.snapshots < 1) r.fail("/snapshots", "must be >= 1");
  std::int64_t seed = static_cast<std::int64_t>(c.seed);
  r.get("", root, "seed", seed);
  if (seed < 0) r.fail("/seed", "must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  r.get("", root, "threads", c.threads);
  if (c.threads < 1) r.fail("/threads", "must be >= 1");

  if (root.contains("traffic")) {
    const auto& t = r.object("/traffic", root["traffic"], {"downlink", "uplink"});
    FlowDemand d;
    if (t.contains("downlink")) d.downlink = detail::read_demand(r, "/traffic/downlink", t["downlink"]);
    if (t.contains("uplink")) d.uplink = detail::read_demand(r, "/traffic/uplink", t["uplink"]);
    c.manhattan.traffic = c.platoon.traffic = d;
  }
  if (root.contains("trace")) {
    const auto& t = r.object("/trace", root["trace"], {"arrival_frames", "max_frames"});
    r.get("/trace", t, "arrival_frames", c.trace.arrival_frames);
    r.get("/trace", t, "max_frames", c.trace.max_frames);
    if (c.trace.arrival_frames < 1) r.fail("/trace/arrival_frames", "must be >= 1");
    if (c.trace.max_frames < c.trace.arrival_frames) r.fail("/trace/max_frames", "must be >= arrival_frames");
  }
  if (root.contains("params")) {
    const auto& p = root["params"];
    if (!p.is_object()) r.fail("/params", "expected an object");
    const nlohmann::json known = params_to_json(SystemParams{});
    for (const auto& [key, v] : p.items()) {
      if (!known.contains(key)) r.fail("/params/" + key, "unknown field");
      if (!v.is_number()) r.fail("/params/" + key, "expected a number");
      if (key == "slots_per_frame" && !v.is_number_integer()) r.fail("/params/" + key, "expected an integer");
    }
    c.params = params_from_json(p);
    if (c.params.slots_per_frame < 1) r.fail("/params/slots_per_frame", "must be >= 1");
  }
  if (root.contains("output")) {
    const auto& o = r.object("/output", root["output"], {"csv", "json", "trace"});
    r.get("/output", o, "csv", rc.output.csv);
    r.get("/output", o, "json", rc.output.json);
    r.get("/output", o, "trace", rc.output.trace);
  }
  return rc;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "", "cannot read file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

/// Canonical form of the effective experiment; output paths excluded.
inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  switch (c.kind) {
    case ScenarioKind::Manhattan:
      j["scenario"] = {{"kind", "manhattan"},
                       {"ue_count", c.manhattan.ue_count},
                       {"blocks", c.manhattan.blocks},
                       {"block_length", c.manhattan.block_length},
                       {"street_width", c.manhattan.street_width},
                       {"ap_duplex", to_config_name(c.manhattan.ap_duplex)},
                       {"bs_duplex", to_config_name(c.manhattan.bs_duplex)}};
      j["traffic"] = {{"downlink", detail::demand_json(c.manhattan.traffic.downlink)},
                      {"uplink", detail::demand_json(c.manhattan.traffic.uplink)}};
      break;
    case ScenarioKind::Platoon:
      j["scenario"] = {{"kind", "platoon"},
                       {"vehicles", c.platoon.vehicles},
                       {"speed_kmh", c.platoon.speed_kmh},
                       {"bt_enabled", c.platoon.bt_enabled},
                       {"bt_mode", to_config_name(c.platoon.bt_mode)}};
      j["traffic"] = {{"downlink", detail::demand_json(c.platoon.traffic.downlink)},
                      {"uplink", detail::demand_json(c.platoon.traffic.uplink)}};
      break;
    case ScenarioKind::File:
      j["scenario"] = {{"kind", "file"}, {"path", c.scenario_file}};
      break;
  }
  j["schemes"] = nlohmann::json::array();
  for (Scheme s : c.schemes) j["schemes"].push_back(to_config_name(s));
  j["routing"] = c.routing == RoutingMode::Dynamic ? "dynamic" : "fixed";
  j["switch_point"] = c.switch_point == SwitchPointMode::Fixed ? "fixed" : "flexible";
  j["snapshots"] = c.snapshots;
  j["seed"] = c.seed;
  j["trace"] = {{"arrival_frames", c.trace.arrival_frames}, {"max_frames", c.trace.max_frames}};
  j["params"] = params_to_json(c.params);
  return j;
}

/// 64-bit FNV-1a of the canonical config. Thread count is left out since it
/// does not change results.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
  const std::string text = config_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

// ---------------------------------------------------------------------------
// Sweeps

inline const std::vector<std::string>& sweep_axes() {
  static const std::vector<std::string> v{"ue_count", "bt_enabled", "bt_enabled_count", "duplex",
                                                "switch_point"};
  return v;
}

/// Duplex presets for the "duplex" axis: AP and BS modes together.
inline const std::vector<std::pair<std::string, std::pair<Duplex, Duplex>>>& duplex_presets() {
  static const std::vector<std::pair<std::string, std::pair<Duplex, Duplex>>> v{
      {"half", {Duplex::Half, Duplex::Half}},
      {"residual_ap", {Duplex::FullResidual, Duplex::Half}},
      {"residual_ap_bs", {Duplex::FullResidual, Duplex::FullResidual}},
      {"perfect_ap_bs", {Duplex::FullPerfect, Duplex::FullPerfect}}};
  return v;
}

/// Applies one sweep value; throws std::invalid_argument on a bad axis or value.
inline void apply_axis(ExperimentConfig& c, const std::string& axis, const std::string& value) {
  auto integer = [&] {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (value.empty() || used != value.size() || v < 0) throw std::invalid_argument(axis + ": bad value '" + value + "'");
    return v;
  };
  if (axis == "ue_count") {
    c.manhattan.ue_count = integer();
  } else if (axis == "bt_enabled" || axis == "bt_enabled_count") {
    c.platoon.bt_enabled = integer();
    if (c.platoon.bt_enabled > c.platoon.vehicles) throw std::invalid_argument("bt_enabled: exceeds vehicle count");
  } else if (axis == "duplex") {
    for (const auto& [name, modes] : duplex_presets())
      if (name == value) {
        c.manhattan.ap_duplex = modes.first;
        c.manhattan.bs_duplex = modes.second;
        return;
      }
    throw std::invalid_argument("duplex: bad value '" + value + "'");
  } else if (axis == "switch_point") {
    if (value == "flexible") c.switch_point = SwitchPointMode::Flexible;
    else if (value == "fixed") c.switch_point = SwitchPointMode::Fixed;
    else throw std::invalid_argument("switch_point: bad value '" + value + "'");
  } else {
    throw std::invalid_argument("unknown sweep axis '" + axis + "'");
  }
}

// ---------------------------------------------------------------------------
// Writers

inline const std::vector<std::string>& csv_metrics() {
  static const std::vector<std::string> v{"avg_rate",    "edge_rate",    "objective", "group_count",
                                          "switch_point", "mean_latency", "throughput"};
  return v;
}

namespace detail {

inline std::string number(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream ss;
  ss << std::setprecision(10) << v;
  return ss.str();
}

inline double metric(const SchemeOutcome& o, const std::string& m) {
  if (m == "avg_rate") return o.avg_rate;
  if (m == "edge_rate") return o.edge_rate;
  if (m == "objective") return o.objective;
  if (m == "group_count") return o.group_count;
  if (m == "switch_point") return o.switch_point;
  if (m == "mean_latency") return o.has_latency() ? o.mean_latency() : std::numeric_limits<double>::quiet_NaN();
  if (m == "throughput") return o.throughput;
  throw std::invalid_argument("unknown metric " + m);
}

inline nlohmann::json json_number(double v) {
  if (std::isnan(v) || std::isinf(v)) return nullptr;
  return v;
}

}  // namespace detail

/// Long-format rows: one per snapshot, scheme and metric. Sweeps add the
/// axis and level columns.
inline void write_csv_header(std::ostream& out, bool sweep) {
  out << "config_hash,seed," << (sweep ? "axis,level," : "") << "snapshot,snapshot_seed,scheme,metric,value\n";
}

inline void write_csv_rows(std::ostream& out, const RunSummary& r, const ExperimentConfig& c,
                           const std::string& axis = "", const std::string& level = "") {
  const std::string lead = hash_hex(config_hash(c)) + "," + std::to_string(c.seed) + "," +
                           (axis.empty() ? "" : axis + "," + level + ",");
  for (const auto& snap : r.snapshots)
    for (const auto& o : snap.schemes)
      for (const auto& m : csv_metrics())
        out << lead << snap.index << ',' << snap.seed << ',' << to_string(o.scheme) << ',' << m << ','
            << detail::number(detail::metric(o, m)) << '\n';
}

inline nlohmann::json summary_json(const RunSummary& r, const ExperimentConfig& c) {
  nlohmann::json j;
  j["config_hash"] = hash_hex(config_hash(c));
  j["seed"] = c.seed;
  j["snapshots"] = r.snapshots.size();
  j["config"] = config_to_json(c);
  std::size_t unrouted = 0;
  for (const auto& s : r.snapshots) unrouted += s.unrouted;
  j["unrouted"] = unrouted;
  j["schemes"] = nlohmann::json::array();
  for (const auto& s : r.schemes)
    j["schemes"].push_back({{"scheme", to_string(s.scheme)},
                            {"edge_rate", detail::json_number(s.edge_rate)},
                            {"avg_rate", detail::json_number(s.avg_rate)},
                            {"mean_latency", detail::json_number(s.mean_latency)},
                            {"throughput", detail::json_number(s.throughput)},
                            {"switch_point", detail::json_number(s.switch_point)}});
  return j;
}

/// Per-frame switch point of every node.
inline void write_trace(std::ostream& out, const RunSummary& r, const ExperimentConfig& c) {
  const std::string lead = hash_hex(config_hash(c)) + "," + std::to_string(c.seed) + ",";
  out << "config_hash,seed,snapshot,scheme,frame,node,switch_point\n";
  for (const auto& snap : r.snapshots)
    for (const auto& o : snap.schemes)
      for (std::size_t f = 0; f < o.switch_trace.size(); ++f)
        for (const auto& [node, sp] : o.switch_trace[f])
          out << lead << snap.index << ',' << to_string(o.scheme) << ',' << f << ',' << node.value << ','
              << detail::number(sp) << '\n';
}

inline void print_summary(std::ostream& out, const RunSummary& r, const ExperimentConfig& c) {
  out << "config " << hash_hex(config_hash(c)) << "  seed " << c.seed << "  snapshots " << r.snapshots.size() << '\n';
  out << std::left << std::setw(12) << "scheme" << std::right << std::setw(14) << "edge [bit/s]" << std::setw(14)
      << "avg [bit/s]" << std::setw(16) << "latency [frm]" << '\n';
  for (const auto& s : r.schemes)
    out << std::left << std::setw(12) << to_string(s.scheme) << std::right << std::setprecision(4) << std::setw(14)
        << s.edge_rate << std::setw(14) << s.avg_rate << std::setw(16)
        << (std::isnan(s.mean_latency) ? std::string("-") : detail::number(s.mean_latency)) << '\n';
}

}  // namespace mmiab
