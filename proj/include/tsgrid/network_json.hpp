#pragma once

// JSON network schema. One document with buses/branches/machines/loads
// arrays; impedances per-unit on the stated system base, loads in MW/MVAr,
// machine parameters on the machine base. The embedded 9-bus dataset uses
// the same schema.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tsgrid/network.hpp"

namespace tsgrid {

inline NetworkModel network_from_json(const nlohmann::json& j) {
  NetworkModel net;
  try {
    net.system_MVA_base = j.at("system_mva_base").get<double>();
    net.nominal_frequency = j.at("nominal_frequency_hz").get<double>();
    for (const auto& jb : j.at("buses")) {
      Bus b;
      b.id = jb.at("id").get<int>();
      std::string kind = jb.at("kind").get<std::string>();
      if (kind == "slack")
        b.kind = BusKind::Slack;
      else if (kind == "pv")
        b.kind = BusKind::PV;
      else if (kind == "pq")
        b.kind = BusKind::PQ;
      else
        throw DataError("bus " + std::to_string(b.id) + ": unknown kind '" + kind + "'");
      b.base_kV = jb.at("base_kv").get<double>();
      b.voltage_setpoint = jb.value("voltage_setpoint", 1.0);
      net.buses.push_back(b);
    }
    for (const auto& jb : j.at("branches")) {
      Branch br;
      br.id = jb.at("id").get<int>();
      br.from_bus = jb.at("from").get<int>();
      br.to_bus = jb.at("to").get<int>();
      br.series_impedance = Complex(jb.at("r").get<double>(), jb.at("x").get<double>());
      br.shunt_susceptance = jb.value("b_shunt", 0.0);
      br.in_service = jb.value("in_service", true);
      net.branches.push_back(br);
    }
    for (const auto& jm : j.at("machines")) {
      Machine m;
      m.bus = jm.at("bus").get<int>();
      m.inertia_H = jm.at("inertia_h").get<double>();
      m.damping_D = jm.value("damping", 0.0);
      m.xd_prime = jm.at("xd_prime").get<double>();
      m.mva_base = jm.at("mva_base").get<double>();
      m.p_min_MW = jm.at("p_min_mw").get<double>();
      m.p_max_MW = jm.at("p_max_mw").get<double>();
      net.machines.push_back(m);
    }
    for (const auto& jl : j.at("loads")) {
      Load l;
      l.bus = jl.at("bus").get<int>();
      l.p_MW = jl.at("p_mw").get<double>();
      l.q_MVAr = jl.at("q_mvar").get<double>();
      net.loads.push_back(l);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("network schema error: ") + e.what());
  }
  net.validate();
  return net;
}

inline NetworkModel load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open network file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("network file " + path + ": " + e.what());
  }
  return network_from_json(j);
}

inline nlohmann::json network_to_json(const NetworkModel& net) {
  nlohmann::json j;
  j["schema"] = "tsgrid-network-v1";
  j["per_unit_convention"] = "impedances pu on system base; machine H and xd' on machine base";
  j["system_mva_base"] = net.system_MVA_base;
  j["nominal_frequency_hz"] = net.nominal_frequency;
  j["buses"] = nlohmann::json::array();
  for (const auto& b : net.buses) {
    const char* kind = b.kind == BusKind::Slack ? "slack" : b.kind == BusKind::PV ? "pv" : "pq";
    j["buses"].push_back({{"id", b.id},
                          {"kind", kind},
                          {"base_kv", b.base_kV},
                          {"voltage_setpoint", b.voltage_setpoint}});
  }
  j["branches"] = nlohmann::json::array();
  for (const auto& br : net.branches)
    j["branches"].push_back({{"id", br.id},
                             {"from", br.from_bus},
                             {"to", br.to_bus},
                             {"r", br.series_impedance.real()},
                             {"x", br.series_impedance.imag()},
                             {"b_shunt", br.shunt_susceptance},
                             {"in_service", br.in_service}});
  j["machines"] = nlohmann::json::array();
  for (const auto& m : net.machines)
    j["machines"].push_back({{"bus", m.bus},
                             {"inertia_h", m.inertia_H},
                             {"damping", m.damping_D},
                             {"xd_prime", m.xd_prime},
                             {"mva_base", m.mva_base},
                             {"p_min_mw", m.p_min_MW},
                             {"p_max_mw", m.p_max_MW}});
  j["loads"] = nlohmann::json::array();
  for (const auto& l : net.loads)
    j["loads"].push_back({{"bus", l.bus}, {"p_mw", l.p_MW}, {"q_mvar", l.q_MVAr}});
  return j;
}

}  // namespace tsgrid
