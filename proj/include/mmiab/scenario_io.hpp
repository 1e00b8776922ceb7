#pragma once

// Scenario files: a JSON document with a versioned header.
//
//   {
//     "format": "mmiab-scenario", "version": 1,
//     "rng_seed": 7,
//     "params": { "frame_length": 0.01, ... },
//     "nodes":  [ {"id": 0, "role": "BS", "x": 0, "y": 0, "rows": 16, "cols": 8,
//                  "p_max": 1.0, "duplex": "Half"}, ... ],
//     "links":  [ {"id": 0, "tx": 0, "rx": 1, "distance": 200, "los": true,
//                  "shadow_db": 0.4, "pathloss": 2.3e10, "direction": "Downlink",
//                  "demand": "full_buffer" | <bits>}, ... ],
//     "routes": [ {"ue": 5, "path": [0, 1, 5]}, ... ],
//     "traffic": [ {"ue": 5, "downlink": "full_buffer", "uplink": 1.0e6}, ... ]
//   }

#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "mmiab/model.hpp"

namespace mmiab {

inline constexpr const char* kScenarioFormat = "mmiab-scenario";
inline constexpr int kScenarioVersion = 1;

namespace detail {

template <typename E>
E enum_from(const std::string& s, std::initializer_list<E> all, const char* what) {
  for (E e : all)
    if (to_string(e) == s) return e;
  throw std::invalid_argument(std::string("unknown ") + what + ": " + s);
}

inline nlohmann::json demand_to_json(const Demand& d) {
  if (d.is_full_buffer()) return "full_buffer";
  return d.finite_bits();
}

inline Demand demand_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() != "full_buffer") throw std::invalid_argument("bad demand: " + j.dump());
    return Demand::full_buffer();
  }
  return Demand::bits(j.get<double>());
}

}  // namespace detail

inline nlohmann::json params_to_json(const SystemParams& p) {
  return {
      {"frame_length", p.frame_length},
      {"carrier_freq", p.carrier_freq},
      {"light_speed", p.light_speed},
      {"pathloss_exp_los", p.pathloss_exp_los},
      {"pathloss_exp_nlos", p.pathloss_exp_nlos},
      {"shadow_sigma_los_db", p.shadow_sigma_los_db},
      {"shadow_sigma_nlos_db", p.shadow_sigma_nlos_db},
      {"d1", p.d1},
      {"d2", p.d2},
      {"noise_power", p.noise_power},
      {"interference_threshold", p.interference_threshold},
      {"system_bandwidth", p.system_bandwidth},
      {"slots_per_frame", p.slots_per_frame},
      {"p_max_bs", p.p_max_bs},
      {"p_max_ap", p.p_max_ap},
      {"p_max_ue", p.p_max_ue},
      {"sidelobe_gain", p.sidelobe_gain},
      {"self_interference_coupling", p.self_interference_coupling},
  };
}

/// Missing keys keep their defaults, so partial parameter blocks are valid.
inline SystemParams params_from_json(const nlohmann::json& j) {
  SystemParams p;
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("frame_length", p.frame_length);
  get("carrier_freq", p.carrier_freq);
  get("light_speed", p.light_speed);
  get("pathloss_exp_los", p.pathloss_exp_los);
  get("pathloss_exp_nlos", p.pathloss_exp_nlos);
  get("shadow_sigma_los_db", p.shadow_sigma_los_db);
  get("shadow_sigma_nlos_db", p.shadow_sigma_nlos_db);
  get("d1", p.d1);
  get("d2", p.d2);
  get("noise_power", p.noise_power);
  get("interference_threshold", p.interference_threshold);
  get("system_bandwidth", p.system_bandwidth);
  get("slots_per_frame", p.slots_per_frame);
  get("p_max_bs", p.p_max_bs);
  get("p_max_ap", p.p_max_ap);
  get("p_max_ue", p.p_max_ue);
  get("sidelobe_gain", p.sidelobe_gain);
  get("self_interference_coupling", p.self_interference_coupling);
  return p;
}

inline nlohmann::json scenario_to_json(const NetworkScenario& s) {
  nlohmann::json j;
  j["format"] = kScenarioFormat;
  j["version"] = kScenarioVersion;
  j["rng_seed"] = s.rng_seed;
  j["params"] = params_to_json(s.params);
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : s.nodes) {
    j["nodes"].push_back({{"id", n.id.value},
                          {"role", to_string(n.role)},
                          {"x", n.position.x},
                          {"y", n.position.y},
                          {"rows", n.antenna.rows},
                          {"cols", n.antenna.cols},
                          {"p_max", n.p_max},
                          {"duplex", to_string(n.duplex)}});
  }
  j["links"] = nlohmann::json::array();
  for (const auto& l : s.links) {
    j["links"].push_back({{"id", l.id.value},
                          {"tx", l.tx.value},
                          {"rx", l.rx.value},
                          {"distance", l.distance},
                          {"los", l.los},
                          {"shadow_db", l.shadow_db},
                          {"pathloss", l.pathloss_linear},
                          {"direction", to_string(l.direction)},
                          {"demand", detail::demand_to_json(l.demand)}});
  }
  j["routes"] = nlohmann::json::array();
  for (const auto& [ue, path] : s.routes) {
    nlohmann::json p = nlohmann::json::array();
    for (auto v : path) p.push_back(v.value);
    j["routes"].push_back({{"ue", ue.value}, {"path", p}});
  }
  j["traffic"] = nlohmann::json::array();
  for (const auto& [ue, t] : s.traffic) {
    j["traffic"].push_back({{"ue", ue.value},
                            {"downlink", detail::demand_to_json(t.downlink)},
                            {"uplink", detail::demand_to_json(t.uplink)}});
  }
  return j;
}

inline NetworkScenario scenario_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != kScenarioFormat)
    throw std::invalid_argument("not a scenario document (format header missing)");
  if (j.at("version").get<int>() != kScenarioVersion)
    throw std::invalid_argument("unsupported scenario version " + j.at("version").dump());

  NetworkScenario s;
  s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  s.params = params_from_json(j.value("params", nlohmann::json::object()));
  for (const auto& n : j.at("nodes")) {
    Node node;
    node.id = NodeId{n.at("id").get<std::uint32_t>()};
    node.role = detail::enum_from(n.at("role").get<std::string>(),
                                  {Role::Bs, Role::Ap, Role::Ue, Role::Vehicle}, "role");
    node.position = {n.at("x").get<double>(), n.at("y").get<double>()};
    const AntennaArray def = default_antenna(node.role);
    node.antenna = {n.value("rows", def.rows), n.value("cols", def.cols)};
    node.p_max = n.value("p_max", default_p_max(node.role, s.params));
    node.duplex = detail::enum_from(n.value("duplex", std::string("Half")),
                                    {Duplex::Half, Duplex::FullPerfect, Duplex::FullResidual},
                                    "duplex");
    s.nodes.push_back(node);
  }
  for (const auto& l : j.at("links")) {
    Link link;
    link.id = LinkId{l.at("id").get<std::uint32_t>()};
    link.tx = NodeId{l.at("tx").get<std::uint32_t>()};
    link.rx = NodeId{l.at("rx").get<std::uint32_t>()};
    link.distance = l.at("distance").get<double>();
    link.los = l.at("los").get<bool>();
    link.shadow_db = l.at("shadow_db").get<double>();
    link.pathloss_linear = l.at("pathloss").get<double>();
    link.direction = detail::enum_from(l.at("direction").get<std::string>(),
                                       {Direction::Downlink, Direction::Uplink}, "direction");
    link.demand = detail::demand_from_json(l.value("demand", nlohmann::json("full_buffer")));
    s.links.push_back(link);
  }
  for (const auto& r : j.value("routes", nlohmann::json::array())) {
    Route path;
    for (const auto& v : r.at("path")) path.push_back(NodeId{v.get<std::uint32_t>()});
    s.routes[NodeId{r.at("ue").get<std::uint32_t>()}] = std::move(path);
  }
  for (const auto& t : j.value("traffic", nlohmann::json::array())) {
    s.traffic[NodeId{t.at("ue").get<std::uint32_t>()}] =
        FlowDemand{detail::demand_from_json(t.at("downlink")), detail::demand_from_json(t.at("uplink"))};
  }
  return s;
}

inline void save_scenario(const NetworkScenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << scenario_to_json(s).dump(2) << '\n';
}

inline NetworkScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return scenario_from_json(nlohmann::json::parse(in));
}

}  // namespace mmiab
