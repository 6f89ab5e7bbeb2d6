#include <CLI11.hpp>

#include "mobilsim/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mobilsim - multi-lane motorway microsimulation (IDM + MOBIL)"};
  app.require_subcommand(1);

  mobilsim::cli::RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "run one scenario");
  run->add_option("scenario", run_opt.scenario_path, "scenario JSON file")->required();
  run->add_option("-o,--out", run_opt.out_dir, "output directory");
  run->add_option("--dt", run_opt.dt, "override time step [s]");
  run->add_option("--duration", run_opt.duration, "override duration [s]");
  run->add_option("--seed", run_opt.seed, "override RNG seed");
  run->add_option("--probe-p", run_opt.probe_p, "override probe politeness");
  run->add_option("--probe-th", run_opt.probe_th, "override probe threshold [m/s^2]");
  run->add_option("--trajectories", run_opt.trajectories,
                  "trajectory log: none, probes or all");

  mobilsim::cli::SweepOptions sweep_opt;
  CLI::App* sweep = app.add_subcommand("sweep", "sweep the probe (p, threshold) grid");
  sweep->add_option("scenario", sweep_opt.scenario_path, "scenario JSON file")->required();
  sweep->add_option("-o,--out", sweep_opt.out_dir, "output directory");
  sweep->add_option("--p", sweep_opt.p_spec, "politeness range start:end:step");
  sweep->add_option("--th", sweep_opt.th_spec, "threshold range start:end:step");
  sweep->add_option("-j,--jobs", sweep_opt.jobs, "parallel cell jobs");
  sweep->add_option("--seed", sweep_opt.seed, "override RNG seed");
  sweep->add_flag("--heatmaps", sweep_opt.heatmaps, "also write PPM heatmaps");

  mobilsim::cli::FieldOptions field_opt;
  CLI::App* field = app.add_subcommand("field", "space-time speed field from a trajectory log");
  field->add_option("log", field_opt.log_path, "trajectory CSV")->required();
  field->add_option("-o,--out", field_opt.out_dir, "output directory");
  field->add_option("--dx", field_opt.dx, "space cell size [m]")->required();
  field->add_option("--dt", field_opt.dt, "time cell size [s]")->required();
  field->add_option("--length", field_opt.length, "road extent [m] (default: from data)");
  field->add_option("--duration", field_opt.duration, "time extent [s] (default: from data)");
  field->add_option("--lanes", field_opt.lanes, "lane count (default: from data)");
  field->add_flag("--heatmaps", field_opt.heatmaps, "also write PPM heatmaps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) return mobilsim::cli::cmd_run(run_opt);
  if (sweep->parsed()) return mobilsim::cli::cmd_sweep(sweep_opt);
  if (field->parsed()) return mobilsim::cli::cmd_field(field_opt);
  return 2;
}
