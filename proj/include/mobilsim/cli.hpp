#pragma once

#include <optional>
#include <string>

namespace mobilsim::cli {

struct RunOptions {
  std::string scenario_path;
  std::string out_dir = "out";
  std::optional<double> dt;
  std::optional<double> duration;
  std::optional<std::uint64_t> seed;
  std::optional<double> probe_p;
  std::optional<double> probe_th;
  std::string trajectories = "none";  // none | probes | all
};

struct SweepOptions {
  std::string scenario_path;
  std::string out_dir = "sweep";
  std::string p_spec = "0.1:0.9:0.1";   // start:end:step
  std::string th_spec = "0.2:2.2:0.2";
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool heatmaps = false;
};

struct FieldOptions {
  std::string log_path;
  std::string out_dir = "field";
  double dx = 0;
  double dt = 0;
  std::optional<double> length;    // x extent; defaults to covering the data
  std::optional<double> duration;  // t extent; defaults to covering the data
  std::optional<int> lanes;
  bool heatmaps = false;
};

// Exit codes: 0 success, 1 completed with collision events, 2 bad input.
int cmd_run(const RunOptions& opt);
int cmd_sweep(const SweepOptions& opt);
int cmd_field(const FieldOptions& opt);

}  // namespace mobilsim::cli
