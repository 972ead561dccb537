#pragma once

// Classical-model time-domain simulation. Machines are constant EMFs behind
// xd', loads constant impedance at the solved pre-fault voltage, network
// Kron-reduced to the machine internal nodes per topology phase
// (pre-fault / fault-on / post-fault with the tripped line out). Swing
// dynamics integrated with fixed-step RK4.

#include <cmath>
#include <vector>

#include "tsgrid/network.hpp"
#include "tsgrid/steady_state.hpp"

namespace tsgrid {

class BracketError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct FaultScenario {
  int faulted_bus = 0;
  int tripped_line = 0;       // branch id
  double t_fault = 1.0;       // s
  double clearing_cycles = 10.0;
  double t_end = 6.0;         // s

  double clearing_time(const NetworkModel& net) const {
    return clearing_cycles / net.nominal_frequency;
  }
};

// Machine-node equivalent for one topology phase. cG/cB premultiply the EMF
// products: Pe_i = cG(i,i) + sum_j!=i [cG(i,j) cos(di-dj) + cB(i,j) sin(di-dj)].
struct ReducedSystem {
  int n = 0;
  std::vector<double> M;   // 2 H_sys / omega_s, pu power s^2/rad
  std::vector<double> D;   // pu power per rad/s
  std::vector<double> Pm;  // pu
  Eigen::MatrixXd cG, cB;

  void electrical_power(const double* delta, double* pe) const {
    for (int i = 0; i < n; ++i) pe[i] = cG(i, i);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double d = delta[i] - delta[j];
        double c = std::cos(d), s = std::sin(d);
        pe[i] += cG(i, j) * c + cB(i, j) * s;
        pe[j] += cG(j, i) * c - cB(j, i) * s;
      }
  }
};

struct Trajectory {
  double step = 0.0;
  std::vector<double> time;
  // Machine-major storage: series(m) is the full time series of machine m.
  std::vector<std::vector<double>> rotor_angle;      // rad
  std::vector<std::vector<double>> speed_deviation;  // rad/s
  std::vector<std::vector<double>> acceleration;     // rad/s^2
  std::vector<std::vector<double>> electrical_power; // pu
  std::vector<std::vector<double>> frequency;        // Hz
  bool stable = true;
  std::size_t t_fault_index = 0;
  std::size_t t_clear_index = 0;
  int n_machines = 0;

  std::size_t samples() const { return time.size(); }
};

namespace detail {

inline ComplexMatrix augmented_machine_ybus(const NetworkModel& net,
                                            const OperatingPoint& op,
                                            const std::set<int>& out_of_service,
                                            std::optional<int> fault_bus) {
  const int nb = static_cast<int>(net.buses.size());
  const int nm = static_cast<int>(net.machines.size());
  ComplexMatrix y = build_ybus(net, out_of_service, fault_bus);
  ComplexMatrix aug = ComplexMatrix::Zero(nb + nm, nb + nm);
  aug.topLeftCorner(nb, nb) = y;
  // Loads as constant shunt admittance at the solved pre-fault voltage.
  for (std::size_t l = 0; l < net.loads.size(); ++l) {
    int b = net.bus_index(net.loads[l].bus);
    Complex s(op.load_P[l] / net.system_MVA_base, op.load_Q[l] / net.system_MVA_base);
    double v2 = std::norm(op.bus_voltages[b]);
    aug(b, b) += std::conj(s) / v2;
  }
  // Machine internal nodes behind xd'.
  for (int m = 0; m < nm; ++m) {
    int b = net.bus_index(net.machines[m].bus);
    Complex ym = 1.0 / Complex(0.0, net.machines[m].xd_prime_system(net.system_MVA_base));
    aug(b, b) += ym;
    aug(nb + m, nb + m) += ym;
    aug(b, nb + m) -= ym;
    aug(nb + m, b) -= ym;
  }
  return aug;
}

}  // namespace detail

inline ReducedSystem reduce_to_machines(const NetworkModel& net,
                                        const OperatingPoint& op,
                                        const std::set<int>& out_of_service,
                                        std::optional<int> fault_bus) {
  const int nb = static_cast<int>(net.buses.size());
  const int nm = static_cast<int>(net.machines.size());
  ComplexMatrix aug = detail::augmented_machine_ybus(net, op, out_of_service, fault_bus);
  std::vector<int> keep(nm);
  for (int m = 0; m < nm; ++m) keep[m] = nb + m;
  ComplexMatrix yred = kron_reduce(aug, keep);

  ReducedSystem sys;
  sys.n = nm;
  sys.M.resize(nm);
  sys.D.resize(nm);
  sys.Pm.resize(nm);
  sys.cG.resize(nm, nm);
  sys.cB.resize(nm, nm);
  const double ws = net.omega_s();
  for (int i = 0; i < nm; ++i) {
    sys.M[i] = 2.0 * net.machines[i].inertia_H_system(net.system_MVA_base) / ws;
    sys.D[i] = net.machines[i].damping_D / ws;
    sys.Pm[i] = op.mech_power[i];
    for (int j = 0; j < nm; ++j) {
      sys.cG(i, j) = op.internal_EMF[i] * op.internal_EMF[j] * yred(i, j).real();
      sys.cB(i, j) = op.internal_EMF[i] * op.internal_EMF[j] * yred(i, j).imag();
    }
  }
  return sys;
}

struct FaultPhases {
  ReducedSystem pre, fault_on, post;
};

inline FaultPhases build_fault_phases(const NetworkModel& net, const OperatingPoint& op,
                                      const FaultScenario& sc) {
  FaultPhases ph;
  ph.pre = reduce_to_machines(net, op, {}, std::nullopt);
  ph.fault_on = reduce_to_machines(net, op, {}, sc.faulted_bus);
  ph.post = reduce_to_machines(net, op, {sc.tripped_line}, std::nullopt);
  return ph;
}

namespace detail {

struct SwingState {
  std::vector<double> delta, omega;
};

inline void swing_rhs(const ReducedSystem& sys, const double* delta,
                      const double* omega, double* ddelta, double* domega,
                      double* pe_scratch) {
  sys.electrical_power(delta, pe_scratch);
  for (int i = 0; i < sys.n; ++i) {
    ddelta[i] = omega[i];
    domega[i] = (sys.Pm[i] - pe_scratch[i] - sys.D[i] * omega[i]) / sys.M[i];
  }
}

inline void rk4_step(const ReducedSystem& sys, double h, std::vector<double>& delta,
                     std::vector<double>& omega, std::vector<double>& scratch) {
  const int n = sys.n;
  scratch.resize(static_cast<std::size_t>(n) * 11);
  double* k1d = scratch.data();
  double* k1w = k1d + n;
  double* k2d = k1w + n;
  double* k2w = k2d + n;
  double* k3d = k2w + n;
  double* k3w = k3d + n;
  double* k4d = k3w + n;
  double* k4w = k4d + n;
  double* td = k4w + n;
  double* tw = td + n;
  double* pe = tw + n;

  swing_rhs(sys, delta.data(), omega.data(), k1d, k1w, pe);
  for (int i = 0; i < n; ++i) {
    td[i] = delta[i] + 0.5 * h * k1d[i];
    tw[i] = omega[i] + 0.5 * h * k1w[i];
  }
  swing_rhs(sys, td, tw, k2d, k2w, pe);
  for (int i = 0; i < n; ++i) {
    td[i] = delta[i] + 0.5 * h * k2d[i];
    tw[i] = omega[i] + 0.5 * h * k2w[i];
  }
  swing_rhs(sys, td, tw, k3d, k3w, pe);
  for (int i = 0; i < n; ++i) {
    td[i] = delta[i] + h * k3d[i];
    tw[i] = omega[i] + h * k3w[i];
  }
  swing_rhs(sys, td, tw, k4d, k4w, pe);
  for (int i = 0; i < n; ++i) {
    delta[i] += h / 6.0 * (k1d[i] + 2.0 * k2d[i] + 2.0 * k3d[i] + k4d[i]);
    omega[i] += h / 6.0 * (k1w[i] + 2.0 * k2w[i] + 2.0 * k3w[i] + k4w[i]);
  }
}

}  // namespace detail

inline constexpr double kInstabilitySeparationRad = 2.0 * M_PI;  // 360 degrees

// Integrate an already-reduced multi-phase system. Exposed separately so
// synthetic reduced systems (e.g. lossless test configurations) can reuse
// the integrator.
inline Trajectory integrate_phases(const ReducedSystem& pre, const ReducedSystem& on,
                                   const ReducedSystem& post,
                                   const std::vector<double>& delta0,
                                   const std::vector<double>& omega0, double step,
                                   double t_fault, double t_clear, double t_end,
                                   double nominal_frequency) {
  if (step <= 0.0) throw DataError("step must be positive");
  const int n = pre.n;
  const std::size_t n_samples = static_cast<std::size_t>(std::floor(t_end / step + 1e-9)) + 1;

  Trajectory tr;
  tr.step = step;
  tr.n_machines = n;
  tr.time.reserve(n_samples);
  tr.rotor_angle.assign(n, {});
  tr.speed_deviation.assign(n, {});
  tr.acceleration.assign(n, {});
  tr.electrical_power.assign(n, {});
  tr.frequency.assign(n, {});
  for (int i = 0; i < n; ++i) {
    tr.rotor_angle[i].reserve(n_samples);
    tr.speed_deviation[i].reserve(n_samples);
    tr.acceleration[i].reserve(n_samples);
    tr.electrical_power[i].reserve(n_samples);
    tr.frequency[i].reserve(n_samples);
  }

  tr.t_fault_index = n_samples;  // past-the-end when the fault never occurs
  tr.t_clear_index = n_samples;
  std::vector<double> delta = delta0, omega = omega0, scratch;
  std::vector<double> pe(n), acc(n), dd(n);

  bool separated = false;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double t = static_cast<double>(k) * step;
    const ReducedSystem* sys;
    if (t >= t_clear - 1e-12 && t_clear <= t_end) {
      sys = &post;
      if (tr.t_clear_index == n_samples) tr.t_clear_index = k;
    } else if (t >= t_fault - 1e-12 && t_fault <= t_end) {
      sys = &on;
      if (tr.t_fault_index == n_samples) tr.t_fault_index = k;
    } else {
      sys = &pre;
    }

    // Record the sample; acceleration from the swing RHS, not differencing.
    detail::swing_rhs(*sys, delta.data(), omega.data(), dd.data(), acc.data(), pe.data());
    bool finite = true;
    for (int i = 0; i < n; ++i)
      if (!std::isfinite(delta[i]) || !std::isfinite(omega[i])) finite = false;
    if (!finite) {
      tr.stable = false;  // numerical blow-up: truncate, do not error
      break;
    }
    tr.time.push_back(t);
    for (int i = 0; i < n; ++i) {
      tr.rotor_angle[i].push_back(delta[i]);
      tr.speed_deviation[i].push_back(omega[i]);
      tr.acceleration[i].push_back(acc[i]);
      tr.electrical_power[i].push_back(pe[i]);
      tr.frequency[i].push_back(nominal_frequency + omega[i] / (2.0 * M_PI));
    }
    for (int i = 0; i < n && !separated; ++i)
      for (int j = i + 1; j < n; ++j)
        if (std::abs(delta[i] - delta[j]) > kInstabilitySeparationRad) separated = true;

    if (k + 1 < n_samples) detail::rk4_step(*sys, step, delta, omega, scratch);
  }
  if (separated) tr.stable = false;
  return tr;
}

inline Trajectory simulate(const NetworkModel& net, const OperatingPoint& op,
                           const FaultScenario& sc, double step = 1e-3) {
  if (!op.converged || op.rotor_angle_0.empty())
    throw SolverError("simulate requires an initialized operating point", 0.0);
  FaultPhases ph = build_fault_phases(net, op, sc);
  const double t_clear = sc.t_fault + sc.clearing_time(net);
  std::vector<double> omega0(ph.pre.n, 0.0);
  return integrate_phases(ph.pre, ph.fault_on, ph.post, op.rotor_angle_0, omega0,
                          step, sc.t_fault, t_clear, sc.t_end, net.nominal_frequency);
}

// Bisection on clearing time; bracket in seconds of clearing duration.
// Returns the midpoint once the bracket is narrower than `resolution`.
inline double find_cct(const NetworkModel& net, const OperatingPoint& op,
                       FaultScenario sc, double t_low, double t_high,
                       double step = 1e-3, double resolution = 2e-3) {
  if (t_low > t_high) throw BracketError("invalid bracket: low > high");
  auto stable_at = [&](double t_clear_dur) {
    sc.clearing_cycles = t_clear_dur * net.nominal_frequency;
    return simulate(net, op, sc, step).stable;
  };
  if (t_high - t_low < resolution) return 0.5 * (t_low + t_high);
  if (!stable_at(t_low)) throw BracketError("lower bracket endpoint is unstable");
  if (stable_at(t_high)) throw BracketError("upper bracket endpoint is stable");
  while (t_high - t_low >= resolution) {
    double mid = 0.5 * (t_low + t_high);
    if (stable_at(mid))
      t_low = mid;
    else
      t_high = mid;
  }
  return 0.5 * (t_low + t_high);
}

}  // namespace tsgrid
