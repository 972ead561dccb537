#pragma once

// Load-lattice sweep harness: lattice enumeration, (dispatch -> power flow
// -> simulate -> indices) per scenario, deterministic parallel execution,
// and a CSV-per-fault result store with a JSON manifest.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tsgrid/grid.hpp"
#include "tsgrid/indices.hpp"
#include "tsgrid/network.hpp"
#include "tsgrid/steady_state.hpp"
#include "tsgrid/tds.hpp"

namespace tsgrid {

class StoreError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  double step = 1e-3;            // s
  double t_fault = 1.0;          // s
  double sim_after_fault = 5.0;  // s of post-inception horizon
  double clearing_cycles = 10.0;
};

struct FaultCase {
  int id = 0;  // fault number (Table-style numbering, 1-based)
  int faulted_bus = 0;
  int tripped_line = 0;  // branch id

  FaultScenario scenario(const SimConfig& cfg) const {
    FaultScenario sc;
    sc.faulted_bus = faulted_bus;
    sc.tripped_line = tripped_line;
    sc.t_fault = cfg.t_fault;
    sc.clearing_cycles = cfg.clearing_cycles;
    sc.t_end = cfg.t_fault + cfg.sim_after_fault;
    return sc;
  }
};

struct SweepSpec {
  std::vector<int> varied_loads;          // 1-based load ids, 1..3 of them
  std::map<int, double> fixed_fractions;  // load id -> fraction, default 1.0
  double lo = 0.30;
  double hi = 1.00;
  double step = 0.02;
  std::vector<FaultCase> faults;

  int points_per_axis() const {
    return static_cast<int>(std::llround((hi - lo) / step)) + 1;
  }

  std::vector<int> sorted_axes() const {
    auto axes = varied_loads;
    std::sort(axes.begin(), axes.end());
    return axes;
  }

  void validate(std::size_t n_loads) const {
    if (varied_loads.empty() || varied_loads.size() > 3)
      throw DataError("sweep must vary 1 to 3 loads");
    for (int id : varied_loads)
      if (id < 1 || id > static_cast<int>(n_loads))
        throw DataError("varied load id out of range: " + std::to_string(id));
    auto axes = sorted_axes();
    if (std::adjacent_find(axes.begin(), axes.end()) != axes.end())
      throw DataError("duplicate varied load id");
    if (step <= 0.0 || hi <= lo) throw DataError("invalid sweep range/step");
  }

  std::vector<double> axis_fractions() const {
    const int n = points_per_axis();
    std::vector<double> f(n);
    for (int k = 0; k < n; ++k) f[k] = lo + step * k;
    f.back() = hi;  // avoid accumulation error at the top end
    return f;
  }
};

inline std::vector<LoadingPoint> enumerate_lattice(const SweepSpec& spec,
                                                   std::size_t n_loads) {
  spec.validate(n_loads);
  const auto axes = spec.sorted_axes();
  const auto fracs = spec.axis_fractions();
  const int per_axis = static_cast<int>(fracs.size());
  std::size_t total = 1;
  for (std::size_t d = 0; d < axes.size(); ++d) total *= per_axis;

  LoadingPoint base;
  base.fractions.assign(n_loads, 1.0);
  for (const auto& [id, f] : spec.fixed_fractions) {
    if (id < 1 || id > static_cast<int>(n_loads))
      throw DataError("fixed fraction for unknown load id");
    base.fractions[id - 1] = f;
  }

  std::vector<LoadingPoint> out;
  out.reserve(total);
  std::vector<int> coord(axes.size(), 0);
  for (std::size_t p = 0; p < total; ++p) {
    LoadingPoint lp = base;
    std::size_t rem = p;
    for (std::size_t d = axes.size(); d-- > 0;) {
      coord[d] = static_cast<int>(rem % per_axis);
      rem /= per_axis;
    }
    for (std::size_t d = 0; d < axes.size(); ++d)
      lp.fractions[axes[d] - 1] = fracs[coord[d]];
    out.push_back(std::move(lp));
  }
  return out;
}

struct ResultRecord {
  long scenario_id = 0;
  std::size_t point_index = 0;
  std::vector<double> fractions;  // all loads, model order
  int fault_id = 0;
  IndexValues indices;
  bool converged = false;
  bool stable = false;
  double wall_time_s = 0.0;  // informational, never persisted
};

struct ResultStore {
  SweepSpec spec;
  SimConfig config;
  std::size_t n_loads = 0;
  std::vector<ResultRecord> records;  // ordered by scenario_id
};

using ProgressFn = std::function<void(long scenario_id, const char* status)>;

inline ResultStore run_sweep(const NetworkModel& net, const SweepSpec& spec,
                             const SimConfig& cfg, int workers = 1,
                             const ProgressFn& progress = nullptr) {
  spec.validate(net.loads.size());
  if (spec.faults.empty()) throw DataError("sweep needs at least one fault");
  const auto points = enumerate_lattice(spec, net.loads.size());
  const std::size_t n_points = points.size();
  const std::size_t n_faults = spec.faults.size();

  ResultStore store;
  store.spec = spec;
  store.config = cfg;
  store.n_loads = net.loads.size();
  store.records.resize(n_points * n_faults);

  std::mutex progress_mutex;
  auto worker_fn = [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      OperatingPoint op;
      bool op_ok = false;
      try {
        op = solve_operating_point(net, points[p]);
        op_ok = true;
      } catch (const std::exception&) {
        op_ok = false;  // recorded in-band per scenario below
      }
      for (std::size_t f = 0; f < n_faults; ++f) {
        auto t0 = std::chrono::steady_clock::now();
        ResultRecord rec;
        rec.scenario_id = static_cast<long>(p * n_faults + f);
        rec.point_index = p;
        rec.fractions = points[p].fractions;
        rec.fault_id = spec.faults[f].id;
        rec.converged = op_ok;
        if (op_ok) {
          try {
            Trajectory tr = simulate(net, op, spec.faults[f].scenario(cfg), cfg.step);
            rec.indices = compute_indices(tr, net);
            rec.stable = tr.stable;
          } catch (const std::exception&) {
            rec.converged = false;
          }
        }
        if (!rec.converged) {
          rec.indices.tsi = rec.indices.roma = rec.indices.tke = rec.indices.tpe =
              std::numeric_limits<double>::quiet_NaN();
          rec.indices.stable = false;
        }
        rec.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        store.records[rec.scenario_id] = std::move(rec);
        if (progress) {
          std::lock_guard<std::mutex> lk(progress_mutex);
          progress(static_cast<long>(p * n_faults + f),
                   store.records[p * n_faults + f].converged ? "ok" : "failed");
        }
      }
    }
  };

  workers = std::max(1, workers);
  if (workers == 1 || n_points < 2) {
    worker_fn(0, n_points);
  } else {
    // static block partition over lattice points; slots are disjoint
    std::vector<std::thread> pool;
    std::size_t chunk = (n_points + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      std::size_t b = std::min(n_points, static_cast<std::size_t>(w) * chunk);
      std::size_t e = std::min(n_points, b + chunk);
      if (b < e) pool.emplace_back(worker_fn, b, e);
    }
    for (auto& t : pool) t.join();
  }
  return store;
}

// --- persistence ---

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline nlohmann::json spec_to_json(const SweepSpec& spec, const SimConfig& cfg) {
  nlohmann::json j;
  j["varied_loads"] = spec.varied_loads;
  j["fixed_fractions"] = nlohmann::json::object();
  for (const auto& [id, f] : spec.fixed_fractions)
    j["fixed_fractions"][std::to_string(id)] = f;
  j["range"] = {spec.lo, spec.hi};
  j["step"] = spec.step;
  j["faults"] = nlohmann::json::array();
  for (const auto& fc : spec.faults)
    j["faults"].push_back(
        {{"id", fc.id}, {"bus", fc.faulted_bus}, {"line", fc.tripped_line}});
  j["sim"] = {{"step", cfg.step},
              {"t_fault", cfg.t_fault},
              {"sim_after_fault", cfg.sim_after_fault},
              {"clearing_cycles", cfg.clearing_cycles}};
  return j;
}

}  // namespace detail

inline std::string store_csv_name(int fault_id) {
  return "results_fault" + std::to_string(fault_id) + ".csv";
}

inline void write_store(const ResultStore& store, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw StoreError("cannot create output directory: " + dir.string());

  std::vector<long> missing;
  std::map<int, std::ofstream> files;
  for (const auto& fc : store.spec.faults) {
    auto path = dir / store_csv_name(fc.id);
    auto& out = files[fc.id];
    out.open(path);
    if (!out) throw StoreError("cannot open " + path.string());
    out << "scenario";
    for (std::size_t l = 1; l <= store.n_loads; ++l) out << ",frac" << l;
    out << ",fault,tsi,roma,tke,tpe,stable,converged\n";
  }
  for (const auto& rec : store.records) {
    if (!rec.converged) missing.push_back(rec.scenario_id);
    auto& out = files[rec.fault_id];
    out << rec.scenario_id;
    for (double f : rec.fractions) out << ',' << detail::fmt_double(f);
    out << ',' << rec.fault_id << ',' << detail::fmt_double(rec.indices.tsi) << ','
        << detail::fmt_double(rec.indices.roma) << ','
        << detail::fmt_double(rec.indices.tke) << ','
        << detail::fmt_double(rec.indices.tpe) << ',' << (rec.stable ? 1 : 0) << ','
        << (rec.converged ? 1 : 0) << '\n';
  }
  for (auto& [id, out] : files) {
    out.flush();
    if (!out) throw StoreError("I/O failure while writing result CSVs");
  }

  nlohmann::json manifest;
  manifest["schema"] = "tsgrid-store-v1";
  manifest["spec"] = detail::spec_to_json(store.spec, store.config);
  manifest["n_loads"] = store.n_loads;
  manifest["record_count"] = store.records.size();
  manifest["failed_scenarios"] = missing;
  manifest["files"] = nlohmann::json::array();
  for (const auto& fc : store.spec.faults) manifest["files"].push_back(store_csv_name(fc.id));
  manifest["config_hash"] =
      std::to_string(std::hash<std::string>{}(manifest["spec"].dump()));
  std::ofstream mf(dir / "manifest.json");
  mf << manifest.dump(2) << '\n';
  if (!mf) throw StoreError("I/O failure while writing manifest");
}

inline ResultStore read_store(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw StoreError("no manifest.json in " + dir.string());
  nlohmann::json manifest;
  try {
    mf >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw StoreError(std::string("bad manifest: ") + e.what());
  }

  ResultStore store;
  const auto& js = manifest.at("spec");
  store.spec.varied_loads = js.at("varied_loads").get<std::vector<int>>();
  for (const auto& [k, v] : js.at("fixed_fractions").items())
    store.spec.fixed_fractions[std::stoi(k)] = v.get<double>();
  store.spec.lo = js.at("range")[0].get<double>();
  store.spec.hi = js.at("range")[1].get<double>();
  store.spec.step = js.at("step").get<double>();
  for (const auto& jf : js.at("faults")) {
    FaultCase fc;
    fc.id = jf.at("id").get<int>();
    fc.faulted_bus = jf.at("bus").get<int>();
    fc.tripped_line = jf.at("line").get<int>();
    store.spec.faults.push_back(fc);
  }
  store.config.step = js.at("sim").at("step").get<double>();
  store.config.t_fault = js.at("sim").at("t_fault").get<double>();
  store.config.sim_after_fault = js.at("sim").at("sim_after_fault").get<double>();
  store.config.clearing_cycles = js.at("sim").at("clearing_cycles").get<double>();
  store.n_loads = manifest.at("n_loads").get<std::size_t>();

  store.records.resize(manifest.at("record_count").get<std::size_t>());
  std::vector<char> seen(store.records.size(), 0);
  for (const auto& fc : store.spec.faults) {
    auto path = dir / store_csv_name(fc.id);
    std::ifstream in(path);
    if (!in) throw StoreError("missing result file " + path.string());
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      ResultRecord rec;
      std::getline(ss, cell, ',');
      rec.scenario_id = std::stol(cell);
      rec.fractions.resize(store.n_loads);
      for (std::size_t l = 0; l < store.n_loads; ++l) {
        std::getline(ss, cell, ',');
        rec.fractions[l] = std::strtod(cell.c_str(), nullptr);
      }
      std::getline(ss, cell, ',');
      rec.fault_id = std::stoi(cell);
      std::getline(ss, cell, ',');
      rec.indices.tsi = std::strtod(cell.c_str(), nullptr);
      std::getline(ss, cell, ',');
      rec.indices.roma = std::strtod(cell.c_str(), nullptr);
      std::getline(ss, cell, ',');
      rec.indices.tke = std::strtod(cell.c_str(), nullptr);
      std::getline(ss, cell, ',');
      rec.indices.tpe = std::strtod(cell.c_str(), nullptr);
      std::getline(ss, cell, ',');
      rec.stable = rec.indices.stable = cell == "1";
      std::getline(ss, cell, ',');
      rec.converged = cell == "1";
      rec.point_index = static_cast<std::size_t>(rec.scenario_id) / store.spec.faults.size();
      if (rec.scenario_id < 0 || rec.scenario_id >= static_cast<long>(store.records.size()))
        throw StoreError("scenario id out of range in " + path.string());
      seen[rec.scenario_id] = 1;
      store.records[rec.scenario_id] = std::move(rec);
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw StoreError("store incomplete: missing scenario " + std::to_string(i));
  return store;
}

inline IndexGrid assemble_grid(const ResultStore& store, const std::string& index_name,
                               int fault_id) {
  const auto axes = store.spec.sorted_axes();
  const auto fracs = store.spec.axis_fractions();
  IndexGrid g;
  g.index_name = index_name;
  g.fault_id = fault_id;
  g.axis_load_ids = axes;
  g.axis_coords.assign(axes.size(), fracs);
  g.values.assign(g.size(), std::numeric_limits<double>::quiet_NaN());

  std::size_t fault_pos = store.spec.faults.size();
  for (std::size_t f = 0; f < store.spec.faults.size(); ++f)
    if (store.spec.faults[f].id == fault_id) fault_pos = f;
  if (fault_pos == store.spec.faults.size())
    throw StoreError("fault id not present in store: " + std::to_string(fault_id));

  std::size_t filled = 0;
  for (const auto& rec : store.records) {
    if (rec.fault_id != fault_id) continue;
    double v;
    if (index_name == "tsi")
      v = rec.indices.tsi;
    else if (index_name == "roma")
      v = rec.indices.roma;
    else if (index_name == "tke")
      v = rec.indices.tke;
    else if (index_name == "tpe")
      v = rec.indices.tpe;
    else
      throw StoreError("unknown index name: " + index_name);
    if (rec.point_index >= g.size())
      throw StoreError("record outside lattice bounds");
    g.values[rec.point_index] = rec.converged ? v : std::numeric_limits<double>::quiet_NaN();
    ++filled;
  }
  if (filled != g.size()) {
    std::string msg = "store incomplete for (" + index_name + ", fault " +
                      std::to_string(fault_id) + "): " +
                      std::to_string(g.size() - filled) + " scenarios missing";
    throw StoreError(msg);
  }
  return g;
}

}  // namespace tsgrid
