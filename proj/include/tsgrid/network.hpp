#pragma once

// Static network model: buses, branches, machines, loads, admittance
// assembly and Kron reduction. All electrical quantities are per-unit on
// the system MVA base unless noted; machine parameters are stored on the
// machine base and converted on access.

#include <algorithm>
#include <complex>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tsgrid {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

class TopologyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ReductionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class BusKind { Slack, PV, PQ };

struct Bus {
  int id = 0;
  BusKind kind = BusKind::PQ;
  double base_kV = 0.0;
  double voltage_setpoint = 1.0;  // pu, meaningful for slack/PV
};

struct Branch {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  Complex series_impedance;        // pu
  double shunt_susceptance = 0.0;  // total line charging, pu
  bool in_service = true;
};

struct Machine {
  int bus = 0;
  double inertia_H = 0.0;    // s, on machine base
  double damping_D = 0.0;    // pu torque per pu speed, system base
  double xd_prime = 0.0;     // pu, on machine base
  double mva_base = 100.0;   // MVA
  double p_min_MW = 0.0;
  double p_max_MW = 0.0;

  double xd_prime_system(double system_MVA) const {
    return xd_prime * system_MVA / mva_base;
  }
  double inertia_H_system(double system_MVA) const {
    return inertia_H * mva_base / system_MVA;
  }
};

struct Load {
  int bus = 0;
  double p_MW = 0.0;
  double q_MVAr = 0.0;
};

struct NetworkModel {
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Machine> machines;
  std::vector<Load> loads;
  double system_MVA_base = 100.0;
  double nominal_frequency = 60.0;  // Hz

  double omega_s() const { return 2.0 * M_PI * nominal_frequency; }

  int bus_index(int bus_id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
      if (buses[i].id == bus_id) return static_cast<int>(i);
    throw DataError("unknown bus id " + std::to_string(bus_id));
  }

  int slack_index() const {
    for (std::size_t i = 0; i < buses.size(); ++i)
      if (buses[i].kind == BusKind::Slack) return static_cast<int>(i);
    throw DataError("network has no slack bus");
  }

  void validate() const {
    int slack_count = 0;
    std::set<int> ids;
    for (const auto& b : buses) {
      if (b.kind == BusKind::Slack) ++slack_count;
      if (!ids.insert(b.id).second)
        throw DataError("duplicate bus id " + std::to_string(b.id));
    }
    if (slack_count != 1) throw DataError("network must have exactly one slack bus");
    for (const auto& br : branches) {
      if (br.from_bus == br.to_bus)
        throw DataError("branch " + std::to_string(br.id) + " is a self-loop");
      if (std::abs(br.series_impedance) <= 0.0)
        throw DataError("branch " + std::to_string(br.id) + " has zero impedance");
      bus_index(br.from_bus);
      bus_index(br.to_bus);
    }
    for (const auto& m : machines) {
      bus_index(m.bus);
      if (m.inertia_H <= 0.0) throw DataError("machine inertia must be positive");
      if (m.xd_prime <= 0.0) throw DataError("machine xd' must be positive");
      if (m.p_min_MW > m.p_max_MW) throw DataError("machine P limits inverted");
    }
    for (const auto& l : loads) {
      bus_index(l.bus);
      if (l.p_MW < 0.0) throw DataError("load P must be nonnegative");
    }
  }
};

namespace detail {

inline bool connected_after_removals(const NetworkModel& net,
                                     const std::set<int>& out_of_service) {
  const int n = static_cast<int>(net.buses.size());
  if (n == 0) return true;
  std::vector<std::vector<int>> adj(n);
  for (const auto& br : net.branches) {
    if (!br.in_service || out_of_service.count(br.id)) continue;
    int a = net.bus_index(br.from_bus);
    int b = net.bus_index(br.to_bus);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
  }
  return count == n;
}

}  // namespace detail

// Bolted 3-phase fault stand-in: large purely inductive shunt at the bus.
inline constexpr double kFaultShuntSusceptance = 1e6;  // pu, added as -j*1e6

inline ComplexMatrix build_ybus(const NetworkModel& net,
                                const std::set<int>& out_of_service = {},
                                std::optional<int> fault_bus = std::nullopt) {
  if (!detail::connected_after_removals(net, out_of_service))
    throw TopologyError("network disconnected after branch removals");
  const int n = static_cast<int>(net.buses.size());
  ComplexMatrix y = ComplexMatrix::Zero(n, n);
  for (const auto& br : net.branches) {
    if (!br.in_service || out_of_service.count(br.id)) continue;
    int a = net.bus_index(br.from_bus);
    int b = net.bus_index(br.to_bus);
    Complex ys = 1.0 / br.series_impedance;
    Complex ysh(0.0, br.shunt_susceptance / 2.0);
    y(a, a) += ys + ysh;
    y(b, b) += ys + ysh;
    y(a, b) -= ys;
    y(b, a) -= ys;
  }
  if (fault_bus) {
    int f = net.bus_index(*fault_bus);
    y(f, f) += Complex(0.0, -kFaultShuntSusceptance);
  }
  return y;
}

// Y_kk - Y_ke * Y_ee^-1 * Y_ek over the kept node set (indices into ybus).
inline ComplexMatrix kron_reduce(const ComplexMatrix& ybus,
                                 const std::vector<int>& keep) {
  const int n = static_cast<int>(ybus.rows());
  std::vector<char> kept(n, 0);
  for (int k : keep) kept[k] = 1;
  std::vector<int> elim;
  for (int i = 0; i < n; ++i)
    if (!kept[i]) elim.push_back(i);
  const int nk = static_cast<int>(keep.size());
  const int ne = static_cast<int>(elim.size());
  if (ne == 0) {
    ComplexMatrix out(nk, nk);
    for (int i = 0; i < nk; ++i)
      for (int j = 0; j < nk; ++j) out(i, j) = ybus(keep[i], keep[j]);
    return out;
  }
  ComplexMatrix ykk(nk, nk), yke(nk, ne), yek(ne, nk), yee(ne, ne);
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < nk; ++j) ykk(i, j) = ybus(keep[i], keep[j]);
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < ne; ++j) yke(i, j) = ybus(keep[i], elim[j]);
  for (int i = 0; i < ne; ++i)
    for (int j = 0; j < nk; ++j) yek(i, j) = ybus(elim[i], keep[j]);
  for (int i = 0; i < ne; ++i)
    for (int j = 0; j < ne; ++j) yee(i, j) = ybus(elim[i], elim[j]);
  Eigen::FullPivLU<ComplexMatrix> lu(yee);
  if (!lu.isInvertible())
    throw ReductionError("eliminated block is singular");
  return ykk - yke * lu.solve(yek);
}

}  // namespace tsgrid
