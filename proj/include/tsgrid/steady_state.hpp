#pragma once

// Pre-fault equilibrium: equal-incremental-cost dispatch, Newton-Raphson
// AC power flow, and classical-model machine initialization (EMF behind
// transient reactance).

#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "tsgrid/network.hpp"

namespace tsgrid {

class DispatchError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& msg, double mismatch)
      : std::runtime_error(msg), final_mismatch(mismatch) {}
  double final_mismatch = 0.0;
};

struct LoadingPoint {
  std::vector<double> fractions;  // one per load, each in [0.30, 1.00]

  void validate(std::size_t n_loads) const {
    if (fractions.size() != n_loads)
      throw DataError("loading point dimension mismatch");
    for (double f : fractions)
      if (f < 0.30 - 1e-12 || f > 1.00 + 1e-12)
        throw DataError("loading fraction outside [0.30, 1.00]");
  }
};

struct OperatingPoint {
  std::vector<Complex> bus_voltages;       // pu, per bus (model order)
  std::vector<double> machine_P;           // MW
  std::vector<double> machine_Q;           // MVAr
  std::vector<double> internal_EMF;        // pu magnitude, per machine
  std::vector<double> rotor_angle_0;       // rad, per machine
  std::vector<double> mech_power;          // pu on system base, per machine
  std::vector<double> load_P;              // scaled MW, per load
  std::vector<double> load_Q;              // scaled MVAr, per load
  bool converged = false;
  int iterations = 0;
  double final_mismatch = 0.0;
  std::vector<double> mismatch_history;  // max abs mismatch per iteration
};

// Identical quadratic costs make equal output the equal-incremental-cost
// optimum; clamp to P limits and re-split the excess over the rest.
inline std::vector<double> dispatch(const NetworkModel& net, const LoadingPoint& lp) {
  lp.validate(net.loads.size());
  double total = 0.0;
  for (std::size_t i = 0; i < net.loads.size(); ++i)
    total += net.loads[i].p_MW * lp.fractions[i];
  const int nm = static_cast<int>(net.machines.size());
  if (nm == 0) throw DispatchError("no machines to dispatch");
  double cap = 0.0, floor_sum = 0.0;
  for (const auto& m : net.machines) {
    cap += m.p_max_MW;
    floor_sum += m.p_min_MW;
  }
  if (total > cap) throw DispatchError("load exceeds aggregate machine capacity");
  if (total < floor_sum) throw DispatchError("load below aggregate machine minimum");

  std::vector<double> p(nm, 0.0);
  std::vector<char> fixed(nm, 0);
  double remaining = total;
  int free_count = nm;
  while (true) {
    double share = remaining / free_count;
    bool clamped = false;
    for (int i = 0; i < nm; ++i) {
      if (fixed[i]) continue;
      const auto& m = net.machines[i];
      if (share > m.p_max_MW + 1e-12) {
        p[i] = m.p_max_MW;
        fixed[i] = 1;
        remaining -= p[i];
        --free_count;
        clamped = true;
      } else if (share < m.p_min_MW - 1e-12) {
        p[i] = m.p_min_MW;
        fixed[i] = 1;
        remaining -= p[i];
        --free_count;
        clamped = true;
      }
    }
    if (!clamped) {
      for (int i = 0; i < nm; ++i)
        if (!fixed[i]) p[i] = share;
      break;
    }
    if (free_count == 0) break;
  }
  return p;
}

struct PowerFlowOptions {
  double tolerance = 1e-8;  // max abs pu mismatch
  int max_iterations = 20;
  const OperatingPoint* warm_start = nullptr;
};

namespace detail {

// Net scheduled injection per bus in pu: machine dispatch minus scaled load.
inline void scheduled_injections(const NetworkModel& net,
                                 const std::vector<double>& machine_P_MW,
                                 const LoadingPoint& lp, std::vector<double>& p,
                                 std::vector<double>& q) {
  const int n = static_cast<int>(net.buses.size());
  p.assign(n, 0.0);
  q.assign(n, 0.0);
  for (std::size_t m = 0; m < net.machines.size(); ++m)
    p[net.bus_index(net.machines[m].bus)] += machine_P_MW[m] / net.system_MVA_base;
  for (std::size_t l = 0; l < net.loads.size(); ++l) {
    int b = net.bus_index(net.loads[l].bus);
    p[b] -= net.loads[l].p_MW * lp.fractions[l] / net.system_MVA_base;
    q[b] -= net.loads[l].q_MVAr * lp.fractions[l] / net.system_MVA_base;
  }
}

}  // namespace detail

inline OperatingPoint solve_power_flow(const NetworkModel& net,
                                       const std::vector<double>& machine_P_MW,
                                       const LoadingPoint& lp,
                                       const PowerFlowOptions& opts = {}) {
  net.validate();
  lp.validate(net.loads.size());
  const int n = static_cast<int>(net.buses.size());
  const ComplexMatrix ybus = build_ybus(net);

  std::vector<double> p_sched, q_sched;
  detail::scheduled_injections(net, machine_P_MW, lp, p_sched, q_sched);

  const int slack = net.slack_index();
  std::vector<int> ang_vars;   // buses with free angle
  std::vector<int> mag_vars;   // buses with free magnitude (PQ)
  for (int i = 0; i < n; ++i) {
    if (i != slack) ang_vars.push_back(i);
    if (net.buses[i].kind == BusKind::PQ) mag_vars.push_back(i);
  }
  const int na = static_cast<int>(ang_vars.size());
  const int nv = static_cast<int>(mag_vars.size());

  std::vector<double> vm(n), va(n, 0.0);
  for (int i = 0; i < n; ++i)
    vm[i] = net.buses[i].kind == BusKind::PQ ? 1.0 : net.buses[i].voltage_setpoint;
  if (opts.warm_start && opts.warm_start->converged &&
      static_cast<int>(opts.warm_start->bus_voltages.size()) == n) {
    for (int i = 0; i < n; ++i) {
      va[i] = std::arg(opts.warm_start->bus_voltages[i]);
      if (net.buses[i].kind == BusKind::PQ)
        vm[i] = std::abs(opts.warm_start->bus_voltages[i]);
    }
  }

  auto calc_pq = [&](std::vector<double>& pc, std::vector<double>& qc) {
    pc.assign(n, 0.0);
    qc.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        double g = ybus(i, k).real(), b = ybus(i, k).imag();
        double th = va[i] - va[k];
        pc[i] += vm[i] * vm[k] * (g * std::cos(th) + b * std::sin(th));
        qc[i] += vm[i] * vm[k] * (g * std::sin(th) - b * std::cos(th));
      }
    }
  };

  std::vector<double> pc, qc;
  std::vector<double> history;
  double max_mis = 0.0;
  int iter = 0;
  bool done = false;
  for (; iter < opts.max_iterations; ++iter) {
    calc_pq(pc, qc);
    Eigen::VectorXd mis(na + nv);
    for (int a = 0; a < na; ++a) mis(a) = p_sched[ang_vars[a]] - pc[ang_vars[a]];
    for (int v = 0; v < nv; ++v) mis(na + v) = q_sched[mag_vars[v]] - qc[mag_vars[v]];
    max_mis = mis.cwiseAbs().maxCoeff();
    history.push_back(max_mis);
    if (max_mis < opts.tolerance) {
      done = true;
      break;
    }

    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(na + nv, na + nv);
    auto dP_dth = [&](int i, int k) {
      if (i == k) return -qc[i] - ybus(i, i).imag() * vm[i] * vm[i];
      double th = va[i] - va[k];
      return vm[i] * vm[k] *
             (ybus(i, k).real() * std::sin(th) - ybus(i, k).imag() * std::cos(th));
    };
    auto dP_dv = [&](int i, int k) {
      if (i == k) return pc[i] / vm[i] + ybus(i, i).real() * vm[i];
      double th = va[i] - va[k];
      return vm[i] * (ybus(i, k).real() * std::cos(th) + ybus(i, k).imag() * std::sin(th));
    };
    auto dQ_dth = [&](int i, int k) {
      if (i == k) return pc[i] - ybus(i, i).real() * vm[i] * vm[i];
      double th = va[i] - va[k];
      return -vm[i] * vm[k] *
             (ybus(i, k).real() * std::cos(th) + ybus(i, k).imag() * std::sin(th));
    };
    auto dQ_dv = [&](int i, int k) {
      if (i == k) return qc[i] / vm[i] - ybus(i, i).imag() * vm[i];
      double th = va[i] - va[k];
      return vm[i] * (ybus(i, k).real() * std::sin(th) - ybus(i, k).imag() * std::cos(th));
    };
    for (int a = 0; a < na; ++a) {
      for (int a2 = 0; a2 < na; ++a2) jac(a, a2) = dP_dth(ang_vars[a], ang_vars[a2]);
      for (int v = 0; v < nv; ++v) jac(a, na + v) = dP_dv(ang_vars[a], mag_vars[v]);
    }
    for (int v = 0; v < nv; ++v) {
      for (int a2 = 0; a2 < na; ++a2) jac(na + v, a2) = dQ_dth(mag_vars[v], ang_vars[a2]);
      for (int v2 = 0; v2 < nv; ++v2) jac(na + v, na + v2) = dQ_dv(mag_vars[v], mag_vars[v2]);
    }

    Eigen::VectorXd dx = jac.partialPivLu().solve(mis);
    for (int a = 0; a < na; ++a) va[ang_vars[a]] += dx(a);
    for (int v = 0; v < nv; ++v) vm[mag_vars[v]] += dx(na + v);
  }

  if (!done)
    throw SolverError("power flow did not converge (max mismatch " +
                          std::to_string(max_mis) + " pu)",
                      max_mis);

  calc_pq(pc, qc);
  OperatingPoint op;
  op.bus_voltages.resize(n);
  for (int i = 0; i < n; ++i) op.bus_voltages[i] = std::polar(vm[i], va[i]);
  op.machine_P.resize(net.machines.size());
  op.machine_Q.resize(net.machines.size());
  for (std::size_t m = 0; m < net.machines.size(); ++m) {
    int b = net.bus_index(net.machines[m].bus);
    // Machine output = calculated injection plus the local load draw.
    double lp_MW = 0.0, lq_MVAr = 0.0;
    for (std::size_t l = 0; l < net.loads.size(); ++l)
      if (net.bus_index(net.loads[l].bus) == b) {
        lp_MW += net.loads[l].p_MW * lp.fractions[l];
        lq_MVAr += net.loads[l].q_MVAr * lp.fractions[l];
      }
    op.machine_P[m] = pc[b] * net.system_MVA_base + lp_MW;
    op.machine_Q[m] = qc[b] * net.system_MVA_base + lq_MVAr;
  }
  op.load_P.resize(net.loads.size());
  op.load_Q.resize(net.loads.size());
  for (std::size_t l = 0; l < net.loads.size(); ++l) {
    op.load_P[l] = net.loads[l].p_MW * lp.fractions[l];
    op.load_Q[l] = net.loads[l].q_MVAr * lp.fractions[l];
  }
  op.converged = true;
  op.iterations = iter;
  op.final_mismatch = max_mis;
  op.mismatch_history = history;
  return op;
}

// E∠δ0 = V + j xd' I at each machine terminal; Pm = initial electrical power.
inline void init_machines(const NetworkModel& net, OperatingPoint& op) {
  if (!op.converged) throw SolverError("init_machines requires a converged power flow", 0.0);
  op.internal_EMF.resize(net.machines.size());
  op.rotor_angle_0.resize(net.machines.size());
  op.mech_power.resize(net.machines.size());
  for (std::size_t m = 0; m < net.machines.size(); ++m) {
    const auto& mach = net.machines[m];
    Complex v = op.bus_voltages[net.bus_index(mach.bus)];
    Complex s(op.machine_P[m] / net.system_MVA_base,
              op.machine_Q[m] / net.system_MVA_base);
    Complex i = std::conj(s / v);
    Complex e = v + Complex(0.0, mach.xd_prime_system(net.system_MVA_base)) * i;
    op.internal_EMF[m] = std::abs(e);
    op.rotor_angle_0[m] = std::arg(e);
    op.mech_power[m] = op.machine_P[m] / net.system_MVA_base;
  }
}

inline OperatingPoint solve_operating_point(const NetworkModel& net,
                                            const LoadingPoint& lp,
                                            const PowerFlowOptions& opts = {}) {
  auto disp = dispatch(net, lp);
  OperatingPoint op = solve_power_flow(net, disp, lp, opts);
  init_machines(net, op);
  return op;
}

}  // namespace tsgrid
