#include "mobilsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "mobilsim/io.hpp"

namespace mobilsim {

GridSpec GridSpec::defaults() {
  GridSpec g;
  for (int i = 1; i <= 9; ++i) g.p_values.push_back(i / 10.0);
  for (int i = 1; i <= 11; ++i) g.th_values.push_back(i * 0.2);
  return g;
}

namespace {

SweepCell run_cell(const Scenario& scenario, double p, double th) {
  Scenario local = scenario;
  MobilParams probe = local.config.default_mobil;
  probe.p = p;
  probe.delta_a_th = th;
  local.config.probe_mobil = probe;

  const SimulationOutput out = run_scenario(local);

  SweepCell cell;
  cell.p = p;
  cell.th = th;
  cell.collisions = static_cast<int>(out.collisions.size());

  std::vector<const VehicleRecord*> probes;
  for (const VehicleRecord& rec : out.vehicles) {
    if (rec.probe) probes.push_back(&rec);
  }
  cell.probe_travel_times.assign(scenario.probes.size(), std::nullopt);
  double ff_sum = 0, cg_sum = 0;
  int ff_n = 0, cg_n = 0;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    cell.probe_ids.push_back(probes[k]->id);
    const auto tt = travel_time(*probes[k]);
    if (k < cell.probe_travel_times.size()) cell.probe_travel_times[k] = tt;
    if (!tt) continue;
    if (classify_regime(probes[k]->entry_time, out.config.congestion_onset) ==
        Regime::kFreeFlow) {
      ff_sum += *tt;
      ++ff_n;
    } else {
      cg_sum += *tt;
      ++cg_n;
    }
  }
  if (ff_n) cell.freeflow_avg = ff_sum / ff_n;
  if (cg_n) cell.congested_avg = cg_sum / cg_n;
  return cell;
}

int thread_cap() {
  if (const char* env = std::getenv("MOBILSIM_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) return cap;
  }
  return std::numeric_limits<int>::max();
}

}  // namespace

SweepGrid run_sweep(const Scenario& scenario, const GridSpec& grid, int jobs) {
  if (grid.p_values.empty() || grid.th_values.empty()) {
    throw std::invalid_argument("run_sweep: empty grid");
  }
  SweepGrid out;
  out.p_values = grid.p_values;
  out.th_values = grid.th_values;
  out.probe_count = scenario.probes.size();
  const std::size_t n = grid.p_values.size() * grid.th_values.size();
  out.cells.resize(n);

  jobs = std::clamp(jobs, 1, static_cast<int>(n));
  jobs = std::min(jobs, thread_cap());

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n) return;
      const std::size_t pi = k / grid.th_values.size();
      const std::size_t ti = k % grid.th_values.size();
      try {
        out.cells[k] = run_cell(scenario, grid.p_values[pi], grid.th_values[ti]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

void write_grid_csv(const SweepGrid& grid, const CellValue& value, std::ostream& os) {
  os << "p\\th";
  for (const double th : grid.th_values) os << ',' << io::format_g6(th);
  os << '\n';
  for (std::size_t pi = 0; pi < grid.p_values.size(); ++pi) {
    os << io::format_g6(grid.p_values[pi]);
    for (std::size_t ti = 0; ti < grid.th_values.size(); ++ti) {
      const auto v = value(grid.cell(pi, ti));
      os << ',' << (v ? io::format_g6(*v) : "NA");
    }
    os << '\n';
  }
}

void write_sweep_outputs(const SweepGrid& grid, const std::filesystem::path& dir,
                         bool heatmaps) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  auto emit = [&](const std::string& name, const CellValue& value) {
    std::ofstream os(dir / (name + ".csv"), std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    write_grid_csv(grid, value, os);
    if (heatmaps) {
      io::write_heatmap_ppm(
          static_cast<int>(grid.p_values.size()), static_cast<int>(grid.th_values.size()),
          [&](int i, int j) { return value(grid.cell(i, j)); },
          dir / (name + ".ppm"));
    }
  };

  for (std::size_t k = 0; k < grid.probe_count; ++k) {
    emit("probe_" + std::to_string(k) + "_travel_time",
         [k](const SweepCell& c) { return c.probe_travel_times[k]; });
  }
  emit("avg_travel_time_freeflow", [](const SweepCell& c) { return c.freeflow_avg; });
  emit("avg_travel_time_congested", [](const SweepCell& c) { return c.congested_avg; });

  nlohmann::ordered_json summary;
  summary["p_values"] = grid.p_values;
  summary["th_values"] = grid.th_values;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (std::size_t pi = 0; pi < grid.p_values.size(); ++pi) {
    for (std::size_t ti = 0; ti < grid.th_values.size(); ++ti) {
      const SweepCell& c = grid.cell(pi, ti);
      nlohmann::ordered_json jc;
      jc["p"] = c.p;
      jc["th"] = c.th;
      jc["probe_ids"] = c.probe_ids;
      nlohmann::ordered_json times = nlohmann::ordered_json::array();
      for (const auto& t : c.probe_travel_times) {
        if (t) {
          times.push_back(*t);
        } else {
          times.push_back(nullptr);
        }
      }
      jc["probe_travel_times"] = std::move(times);
      jc["freeflow_avg"] = c.freeflow_avg ? nlohmann::ordered_json(*c.freeflow_avg)
                                          : nlohmann::ordered_json(nullptr);
      jc["congested_avg"] = c.congested_avg ? nlohmann::ordered_json(*c.congested_avg)
                                            : nlohmann::ordered_json(nullptr);
      jc["collisions"] = c.collisions;
      cells.push_back(std::move(jc));
    }
  }
  summary["cells"] = std::move(cells);

  std::ofstream os(dir / "summary.json", std::ios::binary);
  if (!os) throw std::runtime_error("cannot write summary.json");
  os << summary.dump(2) << '\n';
}

}  // namespace mobilsim
