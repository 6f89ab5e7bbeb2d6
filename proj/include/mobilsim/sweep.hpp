#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "mobilsim/scenario.hpp"

namespace mobilsim {

struct GridSpec {
  std::vector<double> p_values;
  std::vector<double> th_values;

  // p in 0.1..0.9 step 0.1, threshold in 0.2..2.2 step 0.2 (9 x 11 cells).
  static GridSpec defaults();
};

// One (p, delta_a_th) cell: the probes' travel times (nullopt where a probe
// never finished) and the regime-averaged means over completed probes.
struct SweepCell {
  double p = 0;
  double th = 0;
  std::vector<VehicleId> probe_ids;
  std::vector<std::optional<double>> probe_travel_times;  // per probe-plan slot
  std::optional<double> freeflow_avg;
  std::optional<double> congested_avg;
  int collisions = 0;

  bool complete() const {
    for (const auto& t : probe_travel_times) {
      if (!t) return false;
    }
    return true;
  }
};

struct SweepGrid {
  std::vector<double> p_values;
  std::vector<double> th_values;
  std::vector<SweepCell> cells;  // row-major: p index * |th| + th index
  std::size_t probe_count = 0;

  const SweepCell& cell(std::size_t pi, std::size_t ti) const {
    return cells[pi * th_values.size() + ti];
  }
};

// Runs the scenario once per grid cell with the probes' MobilParams set to
// that cell's (p, th); background traffic and the seed are identical across
// cells, so differences are attributable to the probe parameters. Cells are
// independent jobs; the result is invariant to scheduling. The environment
// variable MOBILSIM_THREADS caps jobs.
SweepGrid run_sweep(const Scenario& scenario, const GridSpec& grid, int jobs = 1);

using CellValue = std::function<std::optional<double>(const SweepCell&)>;

// CSV matrix, rows = p ascending, columns = th ascending, with a header row
// and column carrying the parameter values; empty cells read NA.
void write_grid_csv(const SweepGrid& grid, const CellValue& value, std::ostream& out);

// Writes per-probe matrices, the regime-average matrices and summary.json
// into dir. Re-emission is byte-identical.
void write_sweep_outputs(const SweepGrid& grid, const std::filesystem::path& dir,
                         bool heatmaps = false);

}  // namespace mobilsim
