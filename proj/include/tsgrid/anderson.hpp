#pragma once

// Built-in 3-machine, 9-bus test system (P. M. Anderson / WSCC 9-bus).
// Line and machine data follow Anderson & Fouad, "Power System Control and
// Stability", 9-bus example: 100 MVA system base, 60 Hz. Machine H and xd'
// are stored on the machine base (converted values on the 100 MVA base are
// the familiar 23.64/6.40/3.01 s and 0.0608/0.1198/0.1813 pu).

#include <array>
#include <utility>

#include "tsgrid/network.hpp"
#include "tsgrid/network_json.hpp"

namespace tsgrid {

inline const char* anderson_9bus_json() {
  return R"JSON({
  "schema": "tsgrid-network-v1",
  "source": "P. M. Anderson & A. A. Fouad, Power System Control and Stability, 9-bus test system (WSCC)",
  "per_unit_convention": "impedances pu on system base; machine H and xd' on machine base",
  "system_mva_base": 100.0,
  "nominal_frequency_hz": 60.0,
  "buses": [
    {"id": 1, "kind": "slack", "base_kv": 16.5,  "voltage_setpoint": 1.040},
    {"id": 2, "kind": "pv",    "base_kv": 18.0,  "voltage_setpoint": 1.025},
    {"id": 3, "kind": "pv",    "base_kv": 13.8,  "voltage_setpoint": 1.025},
    {"id": 4, "kind": "pq",    "base_kv": 230.0},
    {"id": 5, "kind": "pq",    "base_kv": 230.0},
    {"id": 6, "kind": "pq",    "base_kv": 230.0},
    {"id": 7, "kind": "pq",    "base_kv": 230.0},
    {"id": 8, "kind": "pq",    "base_kv": 230.0},
    {"id": 9, "kind": "pq",    "base_kv": 230.0}
  ],
  "branches": [
    {"id": 1, "from": 1, "to": 4, "r": 0.0,    "x": 0.0576, "b_shunt": 0.0},
    {"id": 2, "from": 2, "to": 7, "r": 0.0,    "x": 0.0625, "b_shunt": 0.0},
    {"id": 3, "from": 3, "to": 9, "r": 0.0,    "x": 0.0586, "b_shunt": 0.0},
    {"id": 4, "from": 4, "to": 5, "r": 0.0100, "x": 0.0850, "b_shunt": 0.176},
    {"id": 5, "from": 4, "to": 6, "r": 0.0170, "x": 0.0920, "b_shunt": 0.158},
    {"id": 6, "from": 5, "to": 7, "r": 0.0320, "x": 0.1610, "b_shunt": 0.306},
    {"id": 7, "from": 6, "to": 9, "r": 0.0390, "x": 0.1700, "b_shunt": 0.358},
    {"id": 8, "from": 7, "to": 8, "r": 0.0085, "x": 0.0720, "b_shunt": 0.149},
    {"id": 9, "from": 8, "to": 9, "r": 0.0119, "x": 0.1008, "b_shunt": 0.209}
  ],
  "machines": [
    {"bus": 1, "inertia_h": 9.5515151515, "damping": 0.0, "xd_prime": 0.150480, "mva_base": 247.5, "p_min_mw": 10.0, "p_max_mw": 247.5},
    {"bus": 2, "inertia_h": 3.3333333333, "damping": 0.0, "xd_prime": 0.230016, "mva_base": 192.0, "p_min_mw": 10.0, "p_max_mw": 192.0},
    {"bus": 3, "inertia_h": 2.3515625,    "damping": 0.0, "xd_prime": 0.232064, "mva_base": 128.0, "p_min_mw": 10.0, "p_max_mw": 128.0}
  ],
  "loads": [
    {"bus": 5, "p_mw": 125.0, "q_mvar": 50.0},
    {"bus": 6, "p_mw":  90.0, "q_mvar": 30.0},
    {"bus": 8, "p_mw": 100.0, "q_mvar": 35.0}
  ]
})JSON";
}

inline NetworkModel anderson_9bus() {
  return network_from_json(nlohmann::json::parse(anderson_9bus_json()));
}

// Study fault set for the built-in system: (faulted bus, tripped line as
// from-to pair), faults 1..5.
struct FaultTableEntry {
  int fault_no;
  int faulted_bus;
  int line_from;
  int line_to;
};

inline const std::array<FaultTableEntry, 5>& anderson_fault_table() {
  static const std::array<FaultTableEntry, 5> table{{
      {1, 4, 4, 6},
      {2, 5, 5, 7},
      {3, 6, 6, 9},
      {4, 7, 7, 8},
      {5, 8, 8, 9},
  }};
  return table;
}

inline int find_branch_id(const NetworkModel& net, int from, int to) {
  for (const auto& br : net.branches)
    if ((br.from_bus == from && br.to_bus == to) ||
        (br.from_bus == to && br.to_bus == from))
      return br.id;
  throw DataError("no branch between buses " + std::to_string(from) + " and " +
                  std::to_string(to));
}

}  // namespace tsgrid
