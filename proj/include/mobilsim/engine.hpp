#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <vector>

#include "mobilsim/core.hpp"
#include "mobilsim/metrics.hpp"
#include "mobilsim/mobil.hpp"
#include "mobilsim/network.hpp"

namespace mobilsim {

inline constexpr int kMainlineOrigin = -1;

// Destination split of one demand interval. Fractions must sum to 1.
struct DemandInterval {
  double start = 0;  // [s]
  double end = 0;    // [s]
  double flow_vph = 0;
  double mainline_fraction = 1.0;
  std::vector<double> off_ramp_fractions;  // aligned with RoadNetwork::off_ramps()
};

struct DemandProfile {
  int origin_ramp = kMainlineOrigin;  // index into network.ramps (an on-ramp)
  std::vector<DemandInterval> intervals;
  std::optional<double> spawn_speed_cap;  // e.g. ramp entry speed limit [m/s]
};

// One instrumented vehicle of the probe plan; probes enter one at a time.
struct ProbeSpec {
  double entry_time = 0;  // [s]
  int lane = 0;
};

struct SimConfig {
  double dt = 0.4;
  double duration = 14400.0;
  std::uint64_t seed = 1;
  IdmParams default_idm;
  MobilParams default_mobil;
  std::optional<MobilParams> probe_mobil;  // probes fall back to default_mobil
  double vehicle_length = 5.0;
  double congestion_onset = 5400.0;        // regime classification boundary [s]
  double mandatory_window = 500.0;  // forced-merge window before a lane end / exit [m]
  double exit_prepare_window = 2000.0;  // start forcing exit traffic right this far out [m]
  double relax_zone = 200.0;        // b_safe relaxation zone before a hard stop [m]
  double b_safe_relaxed = 6.0;      // b_safe at the stop point itself
};

enum class TrajectoryLog { kNone, kProbes, kAll };

struct ProbeLogEntry {
  double t = 0;
  VehicleId id = 0;
  int lane = 0;
  std::optional<double> inc_left;
  std::optional<double> inc_right;
  double threshold = 0;
  LaneChange decision = LaneChange::kStay;
  bool forced = false;
};

struct CollisionEvent {
  double t = 0;
  VehicleId follower = 0;
  VehicleId leader = 0;
  int lane = 0;
  double gap = 0;
};

struct SimulationOutput {
  SimConfig config;
  std::vector<VehicleRecord> vehicles;  // everyone ever spawned, id order
  std::vector<ProbeLogEntry> probe_log;
  std::vector<DetectorPassage> detector_passages;
  std::vector<TrajectorySample> trajectory;
  std::vector<CollisionEvent> collisions;
  std::uint64_t spawned = 0;
  std::uint64_t despawned = 0;
  std::uint64_t entry_queue_remaining = 0;
  std::vector<VehicleId> incomplete_probes;  // spawned but never despawned
  int probes_never_entered = 0;
};

// Deterministic time-stepped simulation. One instance is single-threaded;
// independent instances may run concurrently.
class Simulation {
 public:
  Simulation(RoadNetwork network, SimConfig config, std::vector<DemandProfile> demand,
             std::vector<ProbeSpec> probe_plan = {}, std::vector<Vehicle> initial = {});

  void set_trajectory_logging(TrajectoryLog mode) { trajectory_mode_ = mode; }

  // Phases, in fixed order: snapshot, accelerations (with virtual standing
  // leaders at lane ends and before missed exits), lane-change decisions,
  // id-ordered execution with safety re-validation, ballistic integration,
  // collision scan, despawn, injection.
  void step();

  SimulationOutput run();    // duration/dt steps, then finish()
  SimulationOutput finish();

  double time() const { return t_; }
  const std::vector<Vehicle>& vehicles() const { return veh_; }
  std::uint64_t spawned() const { return spawned_; }
  std::uint64_t despawned() const { return despawned_; }
  std::uint64_t arrivals_generated() const { return arrivals_generated_; }
  std::uint64_t entry_queue() const;

 private:
  struct PendingArrival {
    int lane = 0;
    int destination = kMainlineExit;
  };
  struct OriginState {
    int profile = 0;
    std::mt19937_64 rng;
    double next_arrival = 0;
    bool exhausted = false;
    // mainline keeps one queue per spawn lane, ramps a single queue
    std::vector<std::deque<PendingArrival>> queues;
    std::vector<int> spawn_lanes;
    std::optional<double> spawn_speed_cap;
  };
  struct PlannedChange {
    int slot;
    int target_lane;
    double b_safe;
    bool forced;
  };

  double uniform(std::mt19937_64& rng);
  void schedule_next_arrival(OriginState& o);
  void generate_arrivals(OriginState& o, double until);
  bool try_spawn(int lane, double spawn_x, int destination, bool probe,
                 std::optional<double> speed_cap);
  void inject(double t_now);

  NeighborView effective_view(const Vehicle& veh, int lane) const;
  std::optional<LeaderView> infrastructure_wall(const Vehicle& veh, int lane) const;
  double longitudinal_accel(const Vehicle& veh) const;
  Decision plan_lane_change(int slot, std::optional<PlannedChange>& planned);
  double relaxed_b_safe(double base, double distance_to_stop) const;
  void complete_vehicle(int slot, double t_exit);
  mobil::ChangeContext make_context(const Vehicle& veh, int target_lane) const;

  RoadNetwork net_;
  SimConfig cfg_;
  std::vector<DemandProfile> demand_;
  std::vector<ProbeSpec> probe_plan_;

  std::vector<Vehicle> veh_;
  std::vector<bool> dead_;
  std::vector<double> accel_;
  PopulationIndex index_;
  std::vector<std::int32_t> slot_of_id_;
  mobil::IdmEvaluator evaluator_;
  std::vector<int> off_ramp_ramps_;  // off-ramp ordinal -> index into net_.ramps

  std::vector<OriginState> origins_;
  std::size_t probe_cursor_ = 0;
  bool probe_live_ = false;

  DetectorBank detector_bank_;
  SimulationOutput out_;
  TrajectoryLog trajectory_mode_ = TrajectoryLog::kNone;

  std::vector<PlannedChange> changes_;
  std::vector<int> scratch_;

  double t_ = 0;
  VehicleId next_id_ = 1;
  std::uint64_t spawned_ = 0;
  std::uint64_t despawned_ = 0;
  std::uint64_t arrivals_generated_ = 0;
  bool finished_ = false;
};

SimulationOutput run_simulation(RoadNetwork network, SimConfig config,
                                std::vector<DemandProfile> demand,
                                std::vector<ProbeSpec> probe_plan = {},
                                std::vector<Vehicle> initial = {},
                                TrajectoryLog log = TrajectoryLog::kNone);

}  // namespace mobilsim
