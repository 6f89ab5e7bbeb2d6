#pragma once

#include <filesystem>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mobilsim/engine.hpp"
#include "mobilsim/metrics.hpp"

namespace mobilsim::io {

// Deterministic 6-significant-digit formatting shared by every CSV writer.
std::string format_g6(double v);

// id,entry,exit,travel_time,regime,probe — completed vehicles only.
void write_travel_times_csv(const SimulationOutput& out, std::ostream& os);

// t,id,lane,inc_left,inc_right,threshold,decision
void write_probe_log_csv(const SimulationOutput& out, std::ostream& os);

// t,id,lane,x,v,a
void write_trajectory_csv(const SimulationOutput& out, std::ostream& os);
std::vector<TrajectorySample> read_trajectory_csv(std::istream& is);

// Pure matrix, rows = space cells, columns = time cells, NA when empty.
void write_speed_field_csv(const SpeedField& field, std::ostream& os);

// Simple linear-gradient heatmap; cells without a value render gray.
void write_heatmap_ppm(int rows, int cols,
                       const std::function<std::optional<double>(int, int)>& value,
                       const std::filesystem::path& path, int cell_px = 24);

std::string decision_token(LaneChange change, bool forced);

}  // namespace mobilsim::io
