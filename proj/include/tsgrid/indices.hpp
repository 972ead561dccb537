#pragma once

// The four transient stability indices computed from a Trajectory:
//   TSI  — rotor-angle-difference index, (360 - dmax)/(360 + dmax) * 100
//   ROMA — max |da/dt| over machines in the fault-on window
//   TKE  — sum 1/2 J dw^2 at the first sample at/after clearance
//   TPE  — pairwise integral of (dPg_i - dPg_j) * df_ij over the fault window

#include <cmath>
#include <limits>
#include <vector>

#include "tsgrid/network.hpp"
#include "tsgrid/tds.hpp"

namespace tsgrid {

struct IndexValues {
  double tsi = 0.0;
  double roma = 0.0;
  double tke = 0.0;
  double tpe = 0.0;
  bool stable = true;
};

// Max pairwise angle separation (degrees) over all samples at/after fault
// inception.
inline double max_angle_separation_deg(const Trajectory& tr) {
  const int n = tr.n_machines;
  double dmax = 0.0;
  for (std::size_t k = tr.t_fault_index; k < tr.samples(); ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double d = std::abs(tr.rotor_angle[i][k] - tr.rotor_angle[j][k]);
        if (d > dmax) dmax = d;
      }
  return dmax * 180.0 / M_PI;
}

inline double tsi(const Trajectory& tr) {
  double dmax = max_angle_separation_deg(tr);
  return (360.0 - dmax) / (360.0 + dmax) * 100.0;
}

inline double roma(const Trajectory& tr) {
  if (tr.t_clear_index <= tr.t_fault_index + 1)
    throw DataError("roma needs at least 2 samples in the fault-on window");
  const std::size_t last = std::min(tr.t_clear_index, tr.samples() - 1);
  double worst = 0.0;
  for (int i = 0; i < tr.n_machines; ++i)
    for (std::size_t k = tr.t_fault_index; k < last; ++k) {
      double da = tr.acceleration[i][k + 1] - tr.acceleration[i][k];
      double dt = tr.time[k + 1] - tr.time[k];
      double r = std::abs(da / dt);
      if (r > worst) worst = r;
    }
  return worst;
}

inline double tke(const Trajectory& tr, const NetworkModel& net) {
  if (tr.t_clear_index >= tr.samples())
    throw DataError("tke requires a clearance sample");
  const double ws = net.omega_s();
  double e = 0.0;
  for (int i = 0; i < tr.n_machines; ++i) {
    double s_pu = net.machines[i].mva_base / net.system_MVA_base;
    double j = 2.0 * net.machines[i].inertia_H * s_pu / ws;
    double dw = tr.speed_deviation[i][tr.t_clear_index];
    e += 0.5 * j * dw * dw;
  }
  return e;
}

// Synthetic-trajectory variant used where no network is in scope: J given
// directly per machine.
inline double tke(const Trajectory& tr, const std::vector<double>& J) {
  if (tr.t_clear_index >= tr.samples())
    throw DataError("tke requires a clearance sample");
  double e = 0.0;
  for (int i = 0; i < tr.n_machines; ++i) {
    double dw = tr.speed_deviation[i][tr.t_clear_index];
    e += 0.5 * J[i] * dw * dw;
  }
  return e;
}

inline double tpe(const Trajectory& tr) {
  if (tr.t_clear_index <= tr.t_fault_index ||
      tr.t_clear_index >= tr.samples())
    throw DataError("tpe needs a fault-on window with at least 2 samples");
  const int n = tr.n_machines;
  const std::size_t a = tr.t_fault_index, b = tr.t_clear_index;
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double pe0_i = tr.electrical_power[i][0];
      double pe0_j = tr.electrical_power[j][0];
      double sum = 0.0;
      auto integrand = [&](std::size_t k) {
        double dpi = tr.electrical_power[i][k] - pe0_i;
        double dpj = tr.electrical_power[j][k] - pe0_j;
        double dfij = tr.frequency[i][k] - tr.frequency[j][k];
        return (dpi - dpj) * dfij;
      };
      for (std::size_t k = a; k < b; ++k)
        sum += 0.5 * (integrand(k) + integrand(k + 1)) * (tr.time[k + 1] - tr.time[k]);
      total += sum;
    }
  return total;
}

inline IndexValues compute_indices(const Trajectory& tr, const NetworkModel& net) {
  IndexValues v;
  v.stable = tr.stable;
  v.tsi = tsi(tr);
  if (tr.t_fault_index < tr.samples() && tr.t_clear_index < tr.samples()) {
    v.roma = roma(tr);
    v.tke = tke(tr, net);
    v.tpe = tpe(tr);
  } else {
    v.roma = std::numeric_limits<double>::quiet_NaN();
    v.tke = std::numeric_limits<double>::quiet_NaN();
    v.tpe = std::numeric_limits<double>::quiet_NaN();
  }
  return v;
}

}  // namespace tsgrid
