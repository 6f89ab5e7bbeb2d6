#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobilsim/engine.hpp"
#include "mobilsim/network.hpp"

namespace mobilsim {

// A complete simulation setup as described by one scenario file.
struct Scenario {
  RoadNetwork network;
  SimConfig config;
  std::vector<DemandProfile> demand;
  std::vector<ProbeSpec> probes;
  std::vector<Vehicle> initial;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses the JSON scenario format (sections: network, defaults, sim,
// demand, probes, initial). Flows are veh/h, everything else SI.
// Throws ScenarioError with field diagnostics.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

SimulationOutput run_scenario(const Scenario& sc, TrajectoryLog log = TrajectoryLog::kNone);

}  // namespace mobilsim
