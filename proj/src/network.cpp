#include "mobilsim/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mobilsim {

bool RoadNetwork::lane_exists_at(int lane, double x) const {
  if (lane < 0 || lane >= lane_count()) return false;
  const LaneSpec& l = lanes[lane];
  return x >= l.start_x && x <= l.end_x;
}

std::optional<int> RoadNetwork::left_of(int lane, double x) const {
  const LaneSpec& l = lanes[lane];
  if (l.auxiliary) {
    if (l.merge_into && lane_exists_at(*l.merge_into, x)) return l.merge_into;
    return std::nullopt;
  }
  const int cand = lane - 1;
  if (cand >= 0 && !lanes[cand].auxiliary && lane_exists_at(cand, x)) return cand;
  return std::nullopt;
}

std::optional<int> RoadNetwork::right_of(int lane, double x) const {
  if (lanes[lane].auxiliary) return std::nullopt;
  const int cand = lane + 1;
  if (cand < lane_count() && !lanes[cand].auxiliary && lane_exists_at(cand, x)) {
    return cand;
  }
  for (const LaneSpec& aux : lanes) {
    if (aux.auxiliary && aux.merge_into == lane && lane_exists_at(aux.index, x)) {
      return aux.index;
    }
  }
  return std::nullopt;
}

std::optional<double> RoadNetwork::distance_to_lane_end(int lane, double x) const {
  const LaneSpec& l = lanes[lane];
  if (l.end_x >= total_length) return std::nullopt;
  if (x > l.end_x) {
    throw std::logic_error("vehicle past the end of lane " + std::to_string(lane));
  }
  return l.end_x - x;
}

std::vector<int> RoadNetwork::on_ramps() const {
  std::vector<int> r;
  for (int i = 0; i < static_cast<int>(ramps.size()); ++i) {
    if (ramps[i].kind == RampSpec::Kind::kOn) r.push_back(i);
  }
  return r;
}

std::vector<int> RoadNetwork::off_ramps() const {
  std::vector<int> r;
  for (int i = 0; i < static_cast<int>(ramps.size()); ++i) {
    if (ramps[i].kind == RampSpec::Kind::kOff) r.push_back(i);
  }
  return r;
}

void RoadNetwork::validate() const {
  if (total_length <= 0) throw std::invalid_argument("network: total_length must be > 0");
  if (lanes.empty()) throw std::invalid_argument("network: no lanes");
  bool any_full = false;
  for (int i = 0; i < lane_count(); ++i) {
    const LaneSpec& l = lanes[i];
    if (l.index != i) throw std::invalid_argument("network: lane indices must be contiguous from 0");
    if (!(l.start_x < l.end_x)) throw std::invalid_argument("network: lane start_x must be < end_x");
    if (l.end_x >= total_length && !l.auxiliary) any_full = true;
    if (l.end_x < total_length) {
      if (!l.merge_into) {
        throw std::invalid_argument("network: terminating lane " + std::to_string(i) +
                                    " needs a merge_into lane");
      }
      const int m = *l.merge_into;
      if (m < 0 || m >= lane_count() || m == i) {
        throw std::invalid_argument("network: bad merge_into for lane " + std::to_string(i));
      }
      if (!lane_exists_at(m, l.end_x)) {
        throw std::invalid_argument("network: merge target does not cover lane end");
      }
    }
  }
  if (!any_full) throw std::invalid_argument("network: at least one lane must span the full length");
  for (std::size_t i = 1; i < detectors.size(); ++i) {
    if (!(detectors[i] > detectors[i - 1])) {
      throw std::invalid_argument("network: detectors must be strictly increasing");
    }
  }
  for (const RampSpec& r : ramps) {
    if (r.attach_lane < 0 || r.attach_lane >= lane_count()) {
      throw std::invalid_argument("network: ramp references a missing lane");
    }
    if (r.position_x < 0 || r.position_x > total_length) {
      throw std::invalid_argument("network: ramp position outside the road");
    }
  }
}

RoadNetwork build_default_network(int drop_lane) {
  constexpr double kLength = 9000.0;
  constexpr int kMainLanes = 4;       // one of them drops at 3.6 km
  constexpr double kDropAt = 3600.0;
  constexpr int kSegments = 23;
  constexpr double kAuxLength = 300.0;

  if (drop_lane < 0 || drop_lane >= kMainLanes) {
    throw std::invalid_argument("build_default_network: drop_lane out of range");
  }

  RoadNetwork net;
  net.total_length = kLength;
  net.segment_count = kSegments;

  for (int i = 0; i < kMainLanes; ++i) {
    LaneSpec l;
    l.index = i;
    l.start_x = 0.0;
    l.end_x = kLength;
    if (i == drop_lane) {
      l.end_x = kDropAt;
      l.merge_into = drop_lane == 0 ? 1 : drop_lane - 1;
    }
    net.lanes.push_back(l);
  }

  const double seg = kLength / kSegments;
  for (int k = 0; k <= kSegments; ++k) {
    net.detectors.push_back(k * seg);
  }

  auto segment_mid = [&](int s) { return (s - 0.5) * seg; };
  const int rightmost = kMainLanes - 1;

  for (int s : {8, 15}) {
    RampSpec r;
    r.kind = RampSpec::Kind::kOff;
    r.attach_lane = rightmost;
    r.position_x = segment_mid(s);
    r.segment = s;
    net.ramps.push_back(r);
  }
  for (int s : {11, 18}) {
    LaneSpec aux;
    aux.index = net.lane_count();
    aux.start_x = segment_mid(s);
    aux.end_x = aux.start_x + kAuxLength;
    aux.merge_into = rightmost;
    aux.auxiliary = true;
    net.lanes.push_back(aux);

    RampSpec r;
    r.kind = RampSpec::Kind::kOn;
    r.attach_lane = aux.index;
    r.position_x = aux.start_x;
    r.segment = s;
    net.ramps.push_back(r);
  }

  net.validate();
  return net;
}

void PopulationIndex::rebuild(std::span<const Vehicle> vehicles, int lane_count) {
  by_lane_.assign(lane_count, {});
  for (int i = 0; i < static_cast<int>(vehicles.size()); ++i) {
    by_lane_[vehicles[i].lane].push_back(i);
  }
  for (auto& lane : by_lane_) {
    std::sort(lane.begin(), lane.end(), [&](int a, int b) {
      if (vehicles[a].x != vehicles[b].x) return vehicles[a].x < vehicles[b].x;
      return vehicles[a].id < vehicles[b].id;
    });
  }
}

void PopulationIndex::insert(std::span<const Vehicle> vehicles, int slot) {
  auto& lane = by_lane_[vehicles[slot].lane];
  auto it = std::lower_bound(lane.begin(), lane.end(), slot, [&](int s, int n) {
    if (vehicles[s].x != vehicles[n].x) return vehicles[s].x < vehicles[n].x;
    return vehicles[s].id < vehicles[n].id;
  });
  lane.insert(it, slot);
}

void PopulationIndex::erase(std::span<const Vehicle> vehicles, int slot) {
  auto& lane = by_lane_[vehicles[slot].lane];
  auto it = std::find(lane.begin(), lane.end(), slot);
  if (it != lane.end()) lane.erase(it);
}

void PopulationIndex::move(std::span<const Vehicle> vehicles, int slot, int from_lane,
                           int to_lane) {
  auto& src = by_lane_[from_lane];
  auto it = std::find(src.begin(), src.end(), slot);
  if (it != src.end()) src.erase(it);
  auto& dst = by_lane_[to_lane];
  auto pos = std::lower_bound(dst.begin(), dst.end(), slot, [&](int s, int n) {
    if (vehicles[s].x != vehicles[n].x) return vehicles[s].x < vehicles[n].x;
    return vehicles[s].id < vehicles[n].id;
  });
  dst.insert(pos, slot);
}

PopulationIndex::Around PopulationIndex::around(std::span<const Vehicle> vehicles,
                                                int lane, double x,
                                                VehicleId exclude) const {
  // A vehicle exactly at x counts as a leader, so hypothetical queries in an
  // adjacent lane cannot overlook a side-by-side vehicle.
  Around out;
  if (lane < 0 || lane >= static_cast<int>(by_lane_.size())) return out;
  const auto& slots = by_lane_[lane];
  auto it = std::lower_bound(slots.begin(), slots.end(), x,
                             [&](int s, double pos) { return vehicles[s].x < pos; });
  for (auto f = it; f != slots.end(); ++f) {
    if (vehicles[*f].id != exclude) {
      out.leader_slot = *f;
      break;
    }
  }
  for (auto r = std::make_reverse_iterator(it); r != slots.rend(); ++r) {
    if (vehicles[*r].id != exclude && vehicles[*r].x < x) {
      out.follower_slot = *r;
      break;
    }
  }
  return out;
}

NeighborView PopulationIndex::neighbors(std::span<const Vehicle> vehicles, int lane,
                                        double x, double subject_length,
                                        VehicleId exclude) const {
  const Around a = around(vehicles, lane, x, exclude);
  NeighborView view;
  if (a.leader_slot >= 0) {
    const Vehicle& l = vehicles[a.leader_slot];
    view.leader = LeaderView{gap(l.x, l.length, x), l.v, l.id};
  }
  if (a.follower_slot >= 0) {
    const Vehicle& f = vehicles[a.follower_slot];
    view.follower = FollowerView{gap(x, subject_length, f.x), f.v, f.id};
  }
  return view;
}

NeighborView neighbors(std::span<const Vehicle> vehicles, int lane, double x,
                       double subject_length, VehicleId exclude) {
  NeighborView view;
  const Vehicle* best_leader = nullptr;
  const Vehicle* best_follower = nullptr;
  for (const Vehicle& veh : vehicles) {
    if (veh.lane != lane || veh.id == exclude) continue;
    if (veh.x >= x) {
      if (!best_leader || veh.x < best_leader->x ||
          (veh.x == best_leader->x && veh.id < best_leader->id)) {
        best_leader = &veh;
      }
    } else {
      if (!best_follower || veh.x > best_follower->x ||
          (veh.x == best_follower->x && veh.id < best_follower->id)) {
        best_follower = &veh;
      }
    }
  }
  if (best_leader) {
    view.leader = LeaderView{gap(best_leader->x, best_leader->length, x),
                             best_leader->v, best_leader->id};
  }
  if (best_follower) {
    view.follower =
        FollowerView{gap(x, subject_length, best_follower->x), best_follower->v,
                     best_follower->id};
  }
  return view;
}

}  // namespace mobilsim
