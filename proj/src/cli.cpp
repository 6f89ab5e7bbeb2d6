#include "mobilsim/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mobilsim/io.hpp"
#include "mobilsim/metrics.hpp"
#include "mobilsim/scenario.hpp"
#include "mobilsim/sweep.hpp"

namespace mobilsim::cli {

namespace fs = std::filesystem;

namespace {

std::optional<Scenario> load_checked(const std::string& path) {
  if (!fs::exists(path)) {
    std::cerr << "error: scenario file not found: " << path << "\n";
    return std::nullopt;
  }
  try {
    return load_scenario(path);
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return std::nullopt;
  }
}

std::optional<std::vector<double>> parse_range(const std::string& spec) {
  double start = 0, end = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> start >> c1 >> end >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0) {
    return std::nullopt;
  }
  std::vector<double> values;
  for (int k = 0;; ++k) {
    const double v = start + k * step;
    if (v > end + 1e-9) break;
    values.push_back(v);
  }
  if (values.empty()) return std::nullopt;
  return values;
}

bool write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    std::cerr << "error: cannot write " << path.string() << "\n";
    return false;
  }
  body(os);
  return true;
}

void print_regime_mean(const SimulationOutput& out, Regime regime, const char* label) {
  try {
    const double avg =
        average_travel_time(out.vehicles, regime, out.config.congestion_onset);
    std::cout << "  mean travel time (" << label << "): " << io::format_g6(avg) << " s\n";
  } catch (const std::invalid_argument&) {
    std::cout << "  mean travel time (" << label << "): n/a\n";
  }
}

}  // namespace

int cmd_run(const RunOptions& opt) {
  auto scenario = load_checked(opt.scenario_path);
  if (!scenario) return 2;
  if (opt.dt) scenario->config.dt = *opt.dt;
  if (opt.duration) scenario->config.duration = *opt.duration;
  if (opt.seed) scenario->config.seed = *opt.seed;
  if (opt.probe_p || opt.probe_th) {
    MobilParams probe = scenario->config.probe_mobil.value_or(scenario->config.default_mobil);
    if (opt.probe_p) probe.p = *opt.probe_p;
    if (opt.probe_th) probe.delta_a_th = *opt.probe_th;
    scenario->config.probe_mobil = probe;
  }

  TrajectoryLog log = TrajectoryLog::kNone;
  if (opt.trajectories == "probes") {
    log = TrajectoryLog::kProbes;
  } else if (opt.trajectories == "all") {
    log = TrajectoryLog::kAll;
  } else if (opt.trajectories != "none") {
    std::cerr << "error: --trajectories must be none, probes or all\n";
    return 2;
  }

  SimulationOutput out;
  try {
    out = run_scenario(*scenario, log);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);
  if (!write_file(dir / "travel_times.csv",
                  [&](std::ostream& os) { io::write_travel_times_csv(out, os); })) {
    return 2;
  }
  if (!write_file(dir / "probe_log.csv",
                  [&](std::ostream& os) { io::write_probe_log_csv(out, os); })) {
    return 2;
  }
  if (log != TrajectoryLog::kNone) {
    if (!write_file(dir / "trajectory.csv",
                    [&](std::ostream& os) { io::write_trajectory_csv(out, os); })) {
      return 2;
    }
  }

  std::uint64_t live = out.spawned - out.despawned;
  std::cout << "vehicles: " << out.spawned << " entered, " << out.despawned
            << " completed, " << live << " still present, " << out.entry_queue_remaining
            << " queued at entry\n";
  print_regime_mean(out, Regime::kFreeFlow, "free-flow");
  print_regime_mean(out, Regime::kCongested, "congested");
  if (!out.incomplete_probes.empty() || out.probes_never_entered > 0) {
    std::cout << "  probes not finished: " << out.incomplete_probes.size()
              << ", never entered: " << out.probes_never_entered << "\n";
  }
  std::cout << "collisions: " << out.collisions.size() << "\n";
  return out.collisions.empty() ? 0 : 1;
}

int cmd_sweep(const SweepOptions& opt) {
  auto scenario = load_checked(opt.scenario_path);
  if (!scenario) return 2;
  if (opt.seed) scenario->config.seed = *opt.seed;

  GridSpec grid;
  const auto p_values = parse_range(opt.p_spec);
  const auto th_values = parse_range(opt.th_spec);
  if (!p_values || !th_values) {
    std::cerr << "error: grid specs must be start:end:step with step > 0\n";
    return 2;
  }
  grid.p_values = *p_values;
  grid.th_values = *th_values;
  if (opt.jobs < 1) {
    std::cerr << "error: --jobs must be >= 1\n";
    return 2;
  }

  SweepGrid result;
  try {
    result = run_sweep(*scenario, grid, opt.jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    write_sweep_outputs(result, opt.out_dir, opt.heatmaps);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::cout << "grid " << result.p_values.size() << " x " << result.th_values.size()
            << " (" << result.cells.size() << " runs)\n";
  std::cout << "free-flow average travel time:\n";
  write_grid_csv(result, [](const SweepCell& c) { return c.freeflow_avg; }, std::cout);
  std::cout << "congested average travel time:\n";
  write_grid_csv(result, [](const SweepCell& c) { return c.congested_avg; }, std::cout);

  int collisions = 0;
  for (const SweepCell& c : result.cells) collisions += c.collisions;
  if (collisions > 0) {
    std::cout << "collisions across cells: " << collisions << "\n";
    return 1;
  }
  return 0;
}

int cmd_field(const FieldOptions& opt) {
  if (opt.dx <= 0 || opt.dt <= 0) {
    std::cerr << "error: dx and dt must be > 0\n";
    return 2;
  }
  if (!fs::exists(opt.log_path)) {
    std::cerr << "error: trajectory log not found: " << opt.log_path << "\n";
    return 2;
  }
  std::vector<TrajectorySample> log;
  {
    std::ifstream in(opt.log_path, std::ios::binary);
    try {
      log = io::read_trajectory_csv(in);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }

  double x_max = 0, t_max = 0;
  int lane_max = 0;
  for (const TrajectorySample& s : log) {
    x_max = std::max(x_max, s.x);
    t_max = std::max(t_max, s.t);
    lane_max = std::max(lane_max, s.lane);
  }
  const int lanes = opt.lanes.value_or(log.empty() ? 0 : lane_max + 1);
  const double x_extent =
      opt.length.value_or((std::floor(x_max / opt.dx) + 1) * opt.dx);
  const double t_extent =
      opt.duration.value_or((std::floor(t_max / opt.dt) + 1) * opt.dt);

  std::vector<SpeedField> fields;
  try {
    fields = speed_field(log, opt.dx, opt.dt, lanes, x_extent, t_extent);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  fs::create_directories(opt.out_dir);
  for (std::size_t lane = 0; lane < fields.size(); ++lane) {
    const fs::path path = fs::path(opt.out_dir) /
                          ("speed_field_lane" + std::to_string(lane) + ".csv");
    if (!write_file(path,
                    [&](std::ostream& os) { io::write_speed_field_csv(fields[lane], os); })) {
      return 2;
    }
    if (opt.heatmaps) {
      const SpeedField& f = fields[lane];
      io::write_heatmap_ppm(
          f.nx, f.nt, [&](int i, int j) { return f.mean(i, j); },
          fs::path(opt.out_dir) / ("speed_field_lane" + std::to_string(lane) + ".ppm"),
          4);
    }
  }
  std::cout << "wrote " << fields.size() << " lane fields ("
            << (fields.empty() ? 0 : fields[0].nx) << " x "
            << (fields.empty() ? 0 : fields[0].nt) << " cells)\n";
  return 0;
}

}  // namespace mobilsim::cli
