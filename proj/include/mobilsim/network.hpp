#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mobilsim/core.hpp"

namespace mobilsim {

// One lane's longitudinal extent. end_x < total length encodes a lane that
// terminates (a lane drop, or an on-ramp acceleration lane).
struct LaneSpec {
  int index = 0;
  double start_x = 0;
  double end_x = 0;
  std::optional<int> merge_into;  // adjacent lane a terminating lane pours into
  bool auxiliary = false;         // on-ramp acceleration lane
};

struct RampSpec {
  enum class Kind { kOn, kOff };
  Kind kind = Kind::kOn;
  int attach_lane = 0;   // exit lane for off-ramps, acceleration lane for on-ramps
  double position_x = 0;
  int segment = 0;       // 1-based detector segment
};

// Static road topology. Adjacency is index-based: lane i borders i-1 and
// i+1 where both exist at the given x, with auxiliary lanes attached to the
// right of their merge_into lane. A terminating lane therefore has to sit at
// an edge of the cross-section for adjacency to stay physical; the bundled
// network keeps the drop on the leftmost lane.
struct RoadNetwork {
  double total_length = 0;
  std::vector<LaneSpec> lanes;
  std::vector<RampSpec> ramps;
  std::vector<double> detectors;
  int segment_count = 0;

  int lane_count() const { return static_cast<int>(lanes.size()); }
  bool lane_exists_at(int lane, double x) const;
  std::optional<int> left_of(int lane, double x) const;
  std::optional<int> right_of(int lane, double x) const;

  // end_x - x for terminating lanes, nullopt for full-length lanes.
  // Throws std::logic_error if x is already past end_x (engine bug).
  std::optional<double> distance_to_lane_end(int lane, double x) const;

  std::vector<int> on_ramps() const;   // indices into ramps
  std::vector<int> off_ramps() const;

  // Throws std::invalid_argument on a malformed topology.
  void validate() const;
};

// The bundled motorway: 9 km, four mainline lanes of which drop_lane ends at
// 3.6 km, 24 detectors delimiting 23 segments, off-ramps in segments 8 and
// 15, on-ramps (300 m acceleration lanes) in segments 11 and 18.
RoadNetwork build_default_network(int drop_lane = 0);

// Per-lane position-sorted index over a vehicle population. Rebuilt per
// simulation step; queries are O(log n).
class PopulationIndex {
 public:
  void rebuild(std::span<const Vehicle> vehicles, int lane_count);
  void move(std::span<const Vehicle> vehicles, int slot, int from_lane, int to_lane);
  void insert(std::span<const Vehicle> vehicles, int slot);
  void erase(std::span<const Vehicle> vehicles, int slot);

  NeighborView neighbors(std::span<const Vehicle> vehicles, int lane, double x,
                         double subject_length, VehicleId exclude) const;

  // Nearest slots around x (ahead by front bumper strictly > x, behind
  // strictly < x); -1 when absent.
  struct Around {
    int leader_slot = -1;
    int follower_slot = -1;
  };
  Around around(std::span<const Vehicle> vehicles, int lane, double x,
                VehicleId exclude) const;

  const std::vector<int>& lane_slots(int lane) const { return by_lane_[lane]; }

 private:
  std::vector<std::vector<int>> by_lane_;
};

// One-shot query without an index; the O(n) path the index must agree with.
NeighborView neighbors(std::span<const Vehicle> vehicles, int lane, double x,
                       double subject_length, VehicleId exclude);

}  // namespace mobilsim
