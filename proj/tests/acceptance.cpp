// Acceptance gate: one pass/fail line per criterion, exit 0 only if all pass.
//
// The qualitative criteria (index trends and SNI/SMI rankings) compare this
// engine's classical-model results against directions reported for reference
// data produced by a different (commercial, EMT-level) simulation engine, so
// they are checked as orderings, not values.
//
// Usage: acceptance [--quick]   (--quick skips the 3-D sweep; the ranking
// criterion is then evaluated on 1-D/2-D only and marked accordingly)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tsgrid/analytics.hpp"
#include "tsgrid/anderson.hpp"
#include "tsgrid/sweep.hpp"

using namespace tsgrid;
namespace fs = std::filesystem;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int number, const std::string& name, const Result& r) {
  std::printf("[%s] criterion %d: %s — %s\n", r.pass ? "PASS" : "FAIL", number,
              name.c_str(), r.detail.c_str());
  std::fflush(stdout);
  if (!r.pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = a + (b - a) * i / (n - 1);
  return x;
}

std::vector<FaultCase> builtin_faults(const NetworkModel& net) {
  std::vector<FaultCase> out;
  for (const auto& e : anderson_fault_table())
    out.push_back({e.fault_no, e.faulted_bus, find_branch_id(net, e.line_from, e.line_to)});
  return out;
}

LoadingPoint uniform_loading(const NetworkModel& net, double f) {
  LoadingPoint lp;
  lp.fractions.assign(net.loads.size(), f);
  return lp;
}

// --- criterion 1: analytic closed forms for the surface metrics ---

Result c1_analytics() {
  auto t0 = std::chrono::steady_clock::now();
  auto x = linspace(0.0, 1.0, 36);
  std::vector<double> y(36);
  auto fill = [&](auto fn) {
    for (int i = 0; i < 36; ++i) y[i] = fn(x[i]);
  };
  struct Case {
    const char* name;
    double sni, smi;
  };
  fill([](double v) { return v; });
  Case lin{"x", sni_1d(y, x), smi_1d(y, x)};
  fill([](double v) { return v * v; });
  Case quad{"x^2", sni_1d(y, x), smi_1d(y, x)};
  fill([](double v) { return v * v * v; });
  Case cub{"x^3", sni_1d(y, x), smi_1d(y, x)};

  std::ostringstream ss;
  bool ok = true;
  auto check = [&](const char* what, double got, double want, double tol) {
    bool k = std::abs(got - want) < tol;
    ok = ok && k;
    if (!k) ss << what << " got " << got << " want " << want << "; ";
  };
  check("SNI(x)", lin.sni, 0.0, 1e-3);
  check("SMI(x) [clamped]", lin.smi, 12.0, 1e-9);
  check("SNI(x^2)", quad.sni, 0.0, 1e-3);
  check("SMI(x^2)", quad.smi, -std::log10(4.0), 1e-3);
  check("SNI(x^3)", cub.sni, 0.0, 1e-3);
  check("SMI(x^3)", cub.smi, -std::log10(12.0), 1e-3);
  double dt = seconds_since(t0);
  if (dt >= 1.0) {
    ok = false;
    ss << "runtime " << dt << " s exceeds 1 s; ";
  }
  if (ok) ss << "all six closed forms within tolerance, " << dt << " s";
  return {ok, ss.str()};
}

// --- criterion 2: equilibrium hold ---

Result c2_equilibrium(const NetworkModel& net, const OperatingPoint& op,
                      const FaultCase& fc) {
  auto t0 = std::chrono::steady_clock::now();
  FaultScenario sc;
  sc.faulted_bus = fc.faulted_bus;
  sc.tripped_line = fc.tripped_line;
  sc.t_fault = 100.0;  // never reached
  sc.t_end = 5.0;
  auto tr = simulate(net, op, sc, 1e-3);
  double drift = 0.0;
  for (int m = 0; m < tr.n_machines; ++m)
    for (double d : tr.rotor_angle[m])
      drift = std::max(drift, std::abs(d - op.rotor_angle_0[m]));
  double dt = seconds_since(t0);
  std::ostringstream ss;
  ss << "max angle drift " << drift << " rad over 5 s, " << dt << " s";
  return {tr.stable && drift < 1e-3 && dt < 1.0, ss.str()};
}

// --- criterion 3: integrator order via step halving ---

Result c3_order(const NetworkModel& net, const FaultCase& fc) {
  auto op = solve_operating_point(net, uniform_loading(net, 0.8));
  FaultScenario sc;
  sc.faulted_bus = fc.faulted_bus;
  sc.tripped_line = fc.tripped_line;
  sc.clearing_cycles = 9.0;  // 0.15 s: exact multiple of every step below
  sc.t_end = 3.0;
  auto ref = simulate(net, op, sc, 0.625e-3);  // coarse step / 8
  auto coarse = simulate(net, op, sc, 5e-3);
  auto fine = simulate(net, op, sc, 2.5e-3);
  auto err = [&](const Trajectory& tr) {
    double e = 0.0;
    std::size_t last = tr.samples() - 1, rlast = ref.samples() - 1;
    for (int m = 0; m < tr.n_machines; ++m)
      e = std::max(e, std::abs(tr.rotor_angle[m][last] - ref.rotor_angle[m][rlast]));
    return e;
  };
  double ratio = err(coarse) / err(fine);
  std::ostringstream ss;
  ss << "error ratio " << ratio << " (want 8..32 for a 4th-order method)";
  return {ratio >= 8.0 && ratio <= 32.0, ss.str()};
}

// --- criterion 4: power flow vs an independent Gauss-Seidel solution ---

std::vector<Complex> gauss_seidel(const NetworkModel& net,
                                  const std::vector<double>& machine_P_MW,
                                  const LoadingPoint& lp) {
  const int n = static_cast<int>(net.buses.size());
  ComplexMatrix y = build_ybus(net);
  std::vector<double> p(n, 0.0), q(n, 0.0);
  for (std::size_t m = 0; m < net.machines.size(); ++m)
    p[net.bus_index(net.machines[m].bus)] += machine_P_MW[m] / net.system_MVA_base;
  for (std::size_t l = 0; l < net.loads.size(); ++l) {
    int b = net.bus_index(net.loads[l].bus);
    p[b] -= net.loads[l].p_MW * lp.fractions[l] / net.system_MVA_base;
    q[b] -= net.loads[l].q_MVAr * lp.fractions[l] / net.system_MVA_base;
  }
  std::vector<Complex> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = net.buses[i].kind == BusKind::PQ ? Complex(1.0, 0.0)
                                            : Complex(net.buses[i].voltage_setpoint, 0.0);
  int slack = net.slack_index();
  for (int pass = 0; pass < 100000; ++pass) {
    double delta = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i == slack) continue;
      Complex sum = 0.0;
      for (int k = 0; k < n; ++k)
        if (k != i) sum += y(i, k) * v[k];
      double qi = q[i];
      if (net.buses[i].kind == BusKind::PV) {
        Complex inj = v[i] * std::conj(y(i, i) * v[i] + sum);
        qi = inj.imag();
      }
      Complex vn = (std::conj(Complex(p[i], qi) / v[i]) - sum) / y(i, i);
      if (net.buses[i].kind == BusKind::PV)
        vn *= net.buses[i].voltage_setpoint / std::abs(vn);
      delta = std::max(delta, std::abs(vn - v[i]));
      v[i] = vn;
    }
    if (delta < 1e-12) break;
  }
  return v;
}

Result c4_power_flow(const NetworkModel& net, const OperatingPoint& op) {
  auto lp = uniform_loading(net, 1.0);
  auto p = dispatch(net, lp);
  auto oracle = gauss_seidel(net, p, lp);
  double worst_mag = 0.0, worst_ang = 0.0;
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    worst_mag = std::max(worst_mag, std::abs(std::abs(op.bus_voltages[i]) -
                                             std::abs(oracle[i])));
    double da = std::arg(op.bus_voltages[i] * std::conj(oracle[i])) * 180.0 / M_PI;
    worst_ang = std::max(worst_ang, std::abs(da));
  }
  std::ostringstream ss;
  ss << "worst |V| gap " << worst_mag << " pu, worst angle gap " << worst_ang
     << " deg across all buses";
  return {worst_mag < 0.01 && worst_ang < 0.5, ss.str()};
}

// --- criterion 5: lattice cardinality ---

Result c5_lattice(const NetworkModel& net, const std::vector<FaultCase>& faults) {
  SweepSpec spec;
  spec.faults = faults;
  spec.varied_loads = {1};
  std::size_t n1 = enumerate_lattice(spec, net.loads.size()).size();
  spec.varied_loads = {1, 2};
  std::size_t n2 = enumerate_lattice(spec, net.loads.size()).size();
  spec.varied_loads = {1, 2, 3};
  std::size_t n3 = enumerate_lattice(spec, net.loads.size()).size();
  std::ostringstream ss;
  ss << n1 << " / " << n2 << " / " << n3 << " lattice points for 1-D/2-D/3-D";
  return {n1 == 36 && n2 == 1296 && n3 == 46656, ss.str()};
}

// --- criterion 6: index trends vs loading on the 1-D sweep ---

Result c6_trends(const ResultStore& store1d) {
  std::ostringstream ss;
  bool ok = true;
  const double tol = 1e-9;
  for (const auto& fc : store1d.spec.faults) {
    auto tsi_g = assemble_grid(store1d, "tsi", fc.id);
    auto roma_g = assemble_grid(store1d, "roma", fc.id);
    auto tke_g = assemble_grid(store1d, "tke", fc.id);
    auto tpe_g = assemble_grid(store1d, "tpe", fc.id);
    auto violations = [&](const std::vector<double>& v, bool want_increasing) {
      int bad = 0;
      for (std::size_t k = 0; k + 1 < v.size(); ++k) {
        double d = v[k + 1] - v[k];
        if (want_increasing ? d < -tol : d > tol) ++bad;
      }
      return bad;
    };
    const int limit = static_cast<int>(0.05 * (tsi_g.values.size() - 1));  // 5% of pairs
    int v_tsi = violations(tsi_g.values, false);
    int v_roma = violations(roma_g.values, true);
    int v_tke = violations(tke_g.values, true);
    bool trend_ok = v_tsi <= limit && v_roma <= limit && v_tke <= limit;
    // only TSI may increase as loading decreases (net over the sweep range)
    bool unique_ok = tsi_g.values.front() > tsi_g.values.back() &&
                     roma_g.values.front() <= roma_g.values.back() + tol &&
                     tke_g.values.front() <= tke_g.values.back() + tol &&
                     tpe_g.values.front() <= tpe_g.values.back() + tol;
    if (!(trend_ok && unique_ok)) {
      ok = false;
      ss << "fault " << fc.id << ": pair violations tsi/roma/tke = " << v_tsi << "/"
         << v_roma << "/" << v_tke << " (limit " << limit << ")"
         << (unique_ok ? "" : ", uniqueness broken") << "; ";
    }
  }
  if (ok)
    ss << "all 5 faults: TSI falls and ROMA/TKE/TPE rise with loading, "
          "adjacent-pair violations within 5%";
  return {ok, ss.str()};
}

// --- criterion 7: SNI/SMI rankings across dimensionalities ---

struct Metrics4 {
  double sni_tsi, sni_roma, sni_tke, sni_tpe;
  double smi_tsi, smi_roma, smi_tke, smi_tpe;
};

Metrics4 metrics_for(const ResultStore& store, int fault_id) {
  auto one = [&](const char* name) {
    auto g = assemble_grid(store, name, fault_id);
    if (g.has_gaps()) g = interpolate_gaps(g);
    return surface_metrics(standardize(g));
  };
  auto tsi_m = one("tsi"), roma_m = one("roma"), tke_m = one("tke"), tpe_m = one("tpe");
  return {tsi_m.sni_overall,  roma_m.sni_overall, tke_m.sni_overall,
          tpe_m.sni_overall,  tsi_m.smi_overall,  roma_m.smi_overall,
          tke_m.smi_overall,  tpe_m.smi_overall};
}

Result c7_rankings(const std::vector<const ResultStore*>& stores,
                   const std::vector<std::string>& labels, bool partial) {
  std::printf("note: ranking comparison is qualitative; reference directions come "
              "from data produced by a different simulation engine\n");
  std::ostringstream ss;
  bool ok = true;
  for (std::size_t s = 0; s < stores.size(); ++s) {
    int sni_good = 0, smi_good = 0, sni_extremes = 0, n_faults = 0;
    for (const auto& fc : stores[s]->spec.faults) {
      ++n_faults;
      Metrics4 m;
      try {
        m = metrics_for(*stores[s], fc.id);
      } catch (const std::exception& e) {
        ss << labels[s] << " fault " << fc.id << ": " << e.what() << "; ";
        continue;
      }
      if (m.sni_tke < m.sni_tpe && m.sni_tpe < m.sni_roma && m.sni_roma < m.sni_tsi)
        ++sni_good;
      if (m.sni_tke < m.sni_tpe && m.sni_tke < m.sni_roma && m.sni_tsi > m.sni_tpe &&
          m.sni_tsi > m.sni_roma)
        ++sni_extremes;
      if (m.smi_tsi > m.smi_roma && m.smi_tsi > m.smi_tke && m.smi_tsi > m.smi_tpe &&
          m.smi_roma < m.smi_tke && m.smi_roma < m.smi_tpe)
        ++smi_good;
    }
    bool dim_ok = sni_good >= 4 && smi_good >= 4;
    ok = ok && dim_ok;
    ss << labels[s] << ": SNI order TKE<TPE<ROMA<TSI on " << sni_good << "/"
       << n_faults << " faults (extremes TKE min & TSI max on " << sni_extremes
       << "), SMI extremes (TSI max, ROMA min) on " << smi_good << "/" << n_faults
       << "; ";
  }
  if (partial) ss << "3-D skipped (--quick), criterion evaluated on 1-D/2-D only; ";
  if (!ok)
    ss << "analysis: the sensitivity extremes (TKE most sensitive, TSI least) "
          "reproduce on most faults in 1-D/2-D but degrade with dimensionality, "
          "and the reference smoothness ordering does not reproduce at all: with an "
          "undamped classical-model engine the windowed angle-separation maximum "
          "hops between swing peaks (kinking the TSI surface) while ROMA, "
          "dominated by the acceleration jump at fault inception, varies smoothly "
          "with loading — inverting the reference smoothness ranking";
  return {ok, ss.str()};
}

// --- criterion 8: CCT bracket consistency and the loading-margin trend ---

Result c8_cct(const NetworkModel& net, const std::vector<FaultCase>& faults) {
  const double cap = 4.0;
  std::ostringstream ss;
  bool ok = true;
  for (const auto& fc : faults) {
    FaultScenario sc;
    sc.faulted_bus = fc.faulted_bus;
    sc.tripped_line = fc.tripped_line;
    sc.t_end = sc.t_fault + cap + 5.0;  // same post-clear window for every probe
    auto cct_at = [&](double frac, double& out) {
      auto op = solve_operating_point(net, uniform_loading(net, frac));
      try {
        out = find_cct(net, op, sc, 0.0, cap);
        return true;  // bracketed
      } catch (const BracketError&) {
        out = cap;  // stable for every clearing time up to the cap
        return false;
      }
    };
    double cct100 = 0.0, cct30 = 0.0;
    bool bracketed100 = cct_at(1.0, cct100);
    bool bracketed30 = cct_at(0.30, cct30);

    if (bracketed100) {
      auto op = solve_operating_point(net, uniform_loading(net, 1.0));
      auto stable_with = [&](double t_clear) {
        auto s = sc;
        s.clearing_cycles = t_clear * net.nominal_frequency;
        return simulate(net, op, s, 1e-3).stable;
      };
      bool bracket_ok = stable_with(cct100 - 1e-3) && !stable_with(cct100 + 1e-3);
      if (!bracket_ok) {
        ok = false;
        ss << "fault " << fc.id << ": +/-1 ms re-simulation does not straddle CCT "
           << cct100 << " s; ";
      }
    }
    if (cct30 + 1e-9 < cct100) {
      ok = false;
      ss << "fault " << fc.id << ": CCT(30%) " << cct30 << " < CCT(100%) " << cct100
         << "; ";
    }
    ss << "fault " << fc.id << ": CCT(100%) " << cct100 << " s, CCT(30%) "
       << (bracketed30 ? "" : ">= ") << cct30 << " s"
       << (bracketed30 ? "" : " (stable up to cap)") << "; ";
  }
  return {ok, ss.str()};
}

// --- criterion 9: byte-identical stores across worker counts ---

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result c9_determinism(const NetworkModel& net, const SweepSpec& spec1d,
                      const SimConfig& cfg) {
  auto s1 = run_sweep(net, spec1d, cfg, 1);
  auto s4 = run_sweep(net, spec1d, cfg, 4);
  fs::path d1 = fs::temp_directory_path() / "tsgrid_acc_w1";
  fs::path d4 = fs::temp_directory_path() / "tsgrid_acc_w4";
  fs::remove_all(d1);
  fs::remove_all(d4);
  write_store(s1, d1);
  write_store(s4, d4);
  bool ok = slurp(d1 / "manifest.json") == slurp(d4 / "manifest.json");
  for (const auto& fc : spec1d.faults)
    ok = ok && slurp(d1 / store_csv_name(fc.id)) == slurp(d4 / store_csv_name(fc.id));
  fs::remove_all(d1);
  fs::remove_all(d4);
  return {ok, ok ? "1-worker and 4-worker stores byte-identical"
                 : "store files differ between 1 and 4 workers"};
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--quick") == 0) quick = true;

  auto net = anderson_9bus();
  auto faults = builtin_faults(net);
  auto op100 = solve_operating_point(net, uniform_loading(net, 1.0));
  SimConfig cfg;

  report(1, "surface-metric closed forms", c1_analytics());
  report(2, "equilibrium hold", c2_equilibrium(net, op100, faults[0]));
  report(3, "integrator order", c3_order(net, faults[0]));
  report(4, "power flow vs independent solution", c4_power_flow(net, op100));
  report(5, "lattice cardinality", c5_lattice(net, faults));

  SweepSpec spec1d;
  spec1d.varied_loads = {1};
  spec1d.faults = faults;

  auto t1d = std::chrono::steady_clock::now();
  auto store1d = run_sweep(net, spec1d, cfg, 1);
  for (const auto& fc : faults) (void)metrics_for(store1d, fc.id);
  double t_1d_suite = seconds_since(t1d);
  report(6, "index trends vs loading", c6_trends(store1d));

  SweepSpec spec2d = spec1d;
  spec2d.varied_loads = {1, 2};
  std::fprintf(stderr, "running 2-D sweep (6480 scenarios)...\n");
  auto store2d = run_sweep(net, spec2d, cfg, 1);

  ResultStore store3d;
  double t_3d = 0.0;
  if (!quick) {
    SweepSpec spec3d = spec1d;
    spec3d.varied_loads = {1, 2, 3};
    std::fprintf(stderr, "running 3-D sweep (233280 scenarios)...\n");
    auto t0 = std::chrono::steady_clock::now();
    store3d = run_sweep(net, spec3d, cfg, 1);
    t_3d = seconds_since(t0);
  }

  std::vector<const ResultStore*> stores = {&store1d, &store2d};
  std::vector<std::string> labels = {"1-D", "2-D"};
  if (!quick) {
    stores.push_back(&store3d);
    labels.push_back("3-D");
  }
  report(7, "sensitivity/smoothness rankings", c7_rankings(stores, labels, quick));

  report(8, "critical clearing time consistency", c8_cct(net, faults));
  report(9, "parallel determinism", c9_determinism(net, spec1d, cfg));

  {
    std::ostringstream ss;
    bool ok = t_1d_suite < 120.0;
    ss << "1-D suite (180 simulations + analytics) " << t_1d_suite << " s (< 120 s)";
    if (!quick) {
      ss << "; 3-D suite " << t_3d << " s (informational, < 7200 s)";
      ok = ok && t_3d < 7200.0;
    } else {
      ss << "; 3-D skipped (--quick)";
    }
    report(10, "desk-scale runtime", {ok, ss.str()});
  }

  std::printf("%d/10 criteria passed\n", 10 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
