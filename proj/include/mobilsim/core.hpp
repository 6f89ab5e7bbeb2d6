#pragma once

#include <cstdint>
#include <optional>

namespace mobilsim {

using VehicleId = std::int64_t;

// Sentinel leader id for infrastructure obstacles (lane ends, exit-ramp
// stop points). Never refers to a live vehicle and is never evaluated.
inline constexpr VehicleId kObstacleId = -1;

// Destination marker: leave at the downstream end of the mainline.
inline constexpr int kMainlineExit = -1;

// Finite stand-in for a missing leader: far enough that the interaction
// term of the car-following model is negligible.
inline constexpr double kNoLeaderGap = 10000.0;

// Longitudinal driver/vehicle parameters.
struct IdmParams {
  double v0 = 33.33;   // desired speed [m/s]
  double T = 1.5;      // safe time gap [s]
  double s0 = 2.0;     // minimum bumper-to-bumper gap [m]
  double a = 1.4;      // maximum acceleration [m/s^2]
  double b = 2.0;      // comfortable deceleration, positive [m/s^2]
  double delta = 4.0;  // acceleration exponent

  bool valid() const {
    return v0 > 0 && T > 0 && s0 >= 0 && a > 0 && b > 0 && delta >= 1;
  }
};

// Lateral decision parameters.
struct MobilParams {
  double p = 0.5;           // politeness factor
  double delta_a_th = 0.3;  // switching threshold [m/s^2]
  double b_safe = 4.0;      // max braking imposable on the new follower [m/s^2]

  bool valid() const { return p >= 0 && delta_a_th >= 0 && b_safe > 0; }
};

// One driver-vehicle unit. x is the front-bumper arc-length position,
// increasing in driving direction.
struct Vehicle {
  VehicleId id = 0;
  int lane = 0;  // 0 = leftmost
  double x = 0;
  double v = 0;
  double length = 5.0;
  IdmParams idm;
  MobilParams mobil;
  double entry_time = 0;
  std::optional<double> exit_time;
  int destination = kMainlineExit;  // off-ramp index, or kMainlineExit
  bool probe = false;
};

struct LeaderView {
  double gap = 0;  // bumper-to-bumper, may be negative on overlap
  double v = 0;
  VehicleId id = 0;
};

struct FollowerView {
  double gap = 0;  // bumper-to-bumper behind the subject
  double v = 0;
  VehicleId id = 0;
};

struct NeighborView {
  std::optional<LeaderView> leader;
  std::optional<FollowerView> follower;
};

enum class LaneChange { kStay, kLeft, kRight };

// Outcome of one lane-change evaluation. Incentives are absent where no
// target lane exists; forced marks a mandatory (lane-end or exit) merge.
struct Decision {
  LaneChange change = LaneChange::kStay;
  std::optional<double> incentive_left;
  std::optional<double> incentive_right;
  bool forced = false;
};

// Bumper-to-bumper gap; negative signals an overlap, callers decide.
constexpr double gap(double leader_x, double leader_length, double follower_x) {
  return leader_x - leader_length - follower_x;
}

// Approaching rate dv = v - v_leader.
constexpr double approach_rate(double v, double v_leader) {
  return v - v_leader;
}

}  // namespace mobilsim
