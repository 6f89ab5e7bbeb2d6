#include "mobilsim/engine.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mobilsim/idm.hpp"

namespace mobilsim {

namespace {

// Overlapping gaps (a collision already on record) are clamped so the
// evaluation stays finite and the run can continue.
constexpr double kMinEvalGap = 1e-3;

// The equilibrium-gap entry rule diverges as the spawn speed approaches v0;
// cap it at the capacity point so free-flow demand can actually enter.
constexpr double kEntryGapSpeedCap = 0.75;

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Simulation::Simulation(RoadNetwork network, SimConfig config,
                       std::vector<DemandProfile> demand,
                       std::vector<ProbeSpec> probe_plan, std::vector<Vehicle> initial)
    : net_(std::move(network)),
      cfg_(config),
      demand_(std::move(demand)),
      probe_plan_(std::move(probe_plan)),
      detector_bank_(net_.detectors) {
  net_.validate();
  if (cfg_.dt <= 0) throw std::invalid_argument("sim: dt must be > 0");
  if (cfg_.duration < 0) throw std::invalid_argument("sim: duration must be >= 0");
  const double steps = cfg_.duration / cfg_.dt;
  if (std::abs(steps - std::llround(steps)) > 1e-6) {
    throw std::invalid_argument("sim: duration must be a multiple of dt");
  }
  if (!cfg_.default_idm.valid()) throw std::invalid_argument("sim: invalid default IDM params");
  if (!cfg_.default_mobil.valid()) throw std::invalid_argument("sim: invalid default MOBIL params");
  if (cfg_.probe_mobil && !cfg_.probe_mobil->valid()) {
    throw std::invalid_argument("sim: invalid probe MOBIL params");
  }

  off_ramp_ramps_ = net_.off_ramps();
  const auto& off_ramps = off_ramp_ramps_;

  std::sort(probe_plan_.begin(), probe_plan_.end(),
            [](const ProbeSpec& a, const ProbeSpec& b) { return a.entry_time < b.entry_time; });
  for (const ProbeSpec& p : probe_plan_) {
    if (p.lane < 0 || p.lane >= net_.lane_count() ||
        !net_.lane_exists_at(p.lane, net_.lanes[p.lane].start_x)) {
      throw std::invalid_argument("sim: probe entry lane does not exist");
    }
  }

  std::uint64_t mix = cfg_.seed;
  for (std::size_t oi = 0; oi < demand_.size(); ++oi) {
    const DemandProfile& pr = demand_[oi];
    OriginState o;
    o.profile = static_cast<int>(oi);
    o.rng.seed(splitmix64(mix));
    o.spawn_speed_cap = pr.spawn_speed_cap;

    double origin_x = 0;
    if (pr.origin_ramp == kMainlineOrigin) {
      for (const LaneSpec& l : net_.lanes) {
        if (!l.auxiliary && l.start_x == 0.0) o.spawn_lanes.push_back(l.index);
      }
      if (o.spawn_lanes.empty()) throw std::invalid_argument("sim: no mainline spawn lanes");
    } else {
      if (pr.origin_ramp < 0 || pr.origin_ramp >= static_cast<int>(net_.ramps.size()) ||
          net_.ramps[pr.origin_ramp].kind != RampSpec::Kind::kOn) {
        throw std::invalid_argument("sim: demand origin is not an on-ramp");
      }
      o.spawn_lanes.push_back(net_.ramps[pr.origin_ramp].attach_lane);
      origin_x = net_.lanes[o.spawn_lanes[0]].start_x;
    }
    o.queues.resize(o.spawn_lanes.size());

    double prev_end = -1;
    for (const DemandInterval& iv : pr.intervals) {
      if (iv.end <= iv.start) throw std::invalid_argument("demand: interval end must be > start");
      if (iv.start < prev_end) throw std::invalid_argument("demand: overlapping intervals");
      prev_end = iv.end;
      if (iv.flow_vph < 0) throw std::invalid_argument("demand: negative flow");
      if (iv.off_ramp_fractions.size() > off_ramps.size()) {
        throw std::invalid_argument("demand: more destination fractions than off-ramps");
      }
      double sum = iv.mainline_fraction;
      for (std::size_t k = 0; k < iv.off_ramp_fractions.size(); ++k) {
        const double f = iv.off_ramp_fractions[k];
        if (f < 0) throw std::invalid_argument("demand: negative destination fraction");
        if (f > 0 && net_.ramps[off_ramps[k]].position_x <= origin_x) {
          throw std::invalid_argument("demand: off-ramp upstream of the origin");
        }
        sum += f;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("demand: destination fractions must sum to 1");
      }
    }
    o.next_arrival = 0;
    schedule_next_arrival(o);
    origins_.push_back(std::move(o));
  }

  slot_of_id_.assign(1, -1);
  for (Vehicle veh : initial) {
    if (!net_.lane_exists_at(veh.lane, veh.x)) {
      throw std::invalid_argument("sim: initial vehicle outside its lane");
    }
    if (veh.destination != kMainlineExit &&
        (veh.destination < 0 || veh.destination >= static_cast<int>(off_ramps.size()))) {
      throw std::invalid_argument("sim: initial vehicle has an unknown off-ramp");
    }
    veh.id = next_id_++;
    veh.entry_time = 0;
    veh.exit_time.reset();
    veh_.push_back(veh);
    slot_of_id_.push_back(static_cast<std::int32_t>(veh_.size() - 1));
    VehicleRecord rec;
    rec.id = veh.id;
    rec.entry_time = 0;
    rec.entry_lane = veh.lane;
    rec.destination = veh.destination;
    rec.probe = veh.probe;
    out_.vehicles.push_back(rec);
    ++spawned_;
  }
  dead_.assign(veh_.size(), false);
  accel_.assign(veh_.size(), 0.0);

  evaluator_ = [this](VehicleId id, double s, double v, double v_leader) {
    const IdmParams& p = veh_[slot_of_id_[id]].idm;
    return idm::acceleration(std::max(s, kMinEvalGap), v, v_leader, p);
  };
}

double Simulation::uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void Simulation::schedule_next_arrival(OriginState& o) {
  const DemandProfile& pr = demand_[o.profile];
  double tau = o.next_arrival;
  for (;;) {
    const DemandInterval* iv = nullptr;
    for (const DemandInterval& cand : pr.intervals) {
      if (cand.end > tau) {
        iv = &cand;
        break;
      }
    }
    if (!iv) {
      o.exhausted = true;
      return;
    }
    if (tau < iv->start) tau = iv->start;
    if (iv->flow_vph <= 0) {
      tau = iv->end;
      continue;
    }
    const double lambda = iv->flow_vph / 3600.0;
    const double headway = -std::log1p(-uniform(o.rng)) / lambda;
    if (tau + headway <= iv->end) {
      o.next_arrival = tau + headway;
      return;
    }
    tau = iv->end;  // memoryless restart at the interval boundary
  }
}

void Simulation::generate_arrivals(OriginState& o, double until) {
  const DemandProfile& pr = demand_[o.profile];
  while (!o.exhausted && o.next_arrival <= until) {
    const DemandInterval* iv = nullptr;
    for (const DemandInterval& cand : pr.intervals) {
      if (o.next_arrival >= cand.start && o.next_arrival <= cand.end) {
        iv = &cand;
        break;
      }
    }
    assert(iv != nullptr);

    PendingArrival arrival;
    const double u = uniform(o.rng);
    double acc = iv->mainline_fraction;
    arrival.destination = kMainlineExit;
    if (u >= acc) {
      for (std::size_t k = 0; k < iv->off_ramp_fractions.size(); ++k) {
        acc += iv->off_ramp_fractions[k];
        if (u < acc) {
          arrival.destination = static_cast<int>(k);
          break;
        }
      }
    }
    std::size_t queue = 0;
    if (pr.origin_ramp == kMainlineOrigin) {
      const double ul = uniform(o.rng);
      queue = std::min(static_cast<std::size_t>(ul * o.spawn_lanes.size()),
                       o.spawn_lanes.size() - 1);
    }
    arrival.lane = o.spawn_lanes[queue];
    o.queues[queue].push_back(arrival);
    ++arrivals_generated_;
    schedule_next_arrival(o);
  }
}

bool Simulation::try_spawn(int lane, double spawn_x, int destination, bool probe,
                           std::optional<double> speed_cap) {
  double spawn_v = cfg_.default_idm.v0;
  double entry_gap = std::numeric_limits<double>::infinity();
  const auto a = index_.around(veh_, lane, spawn_x, /*exclude=*/0);
  if (a.leader_slot >= 0) {
    const Vehicle& l = veh_[a.leader_slot];
    entry_gap = gap(l.x, l.length, spawn_x);
    spawn_v = std::min(spawn_v, l.v);
  }
  if (speed_cap) spawn_v = std::min(spawn_v, *speed_cap);

  const double v_rule = std::min(spawn_v, kEntryGapSpeedCap * cfg_.default_idm.v0);
  const double required = idm::equilibrium_gap(v_rule, cfg_.default_idm);
  if (!(entry_gap > required)) return false;

  Vehicle nv;
  nv.id = next_id_++;
  nv.lane = lane;
  nv.x = spawn_x;
  nv.v = spawn_v;
  nv.length = cfg_.vehicle_length;
  nv.idm = cfg_.default_idm;
  nv.mobil = probe ? cfg_.probe_mobil.value_or(cfg_.default_mobil) : cfg_.default_mobil;
  nv.entry_time = t_;
  nv.destination = destination;
  nv.probe = probe;

  veh_.push_back(nv);
  dead_.push_back(false);
  accel_.push_back(0.0);
  const int slot = static_cast<int>(veh_.size() - 1);
  slot_of_id_.push_back(slot);
  index_.insert(veh_, slot);

  VehicleRecord rec;
  rec.id = nv.id;
  rec.entry_time = nv.entry_time;
  rec.entry_lane = lane;
  rec.destination = destination;
  rec.probe = probe;
  out_.vehicles.push_back(rec);
  ++spawned_;

  if (trajectory_mode_ == TrajectoryLog::kAll ||
      (trajectory_mode_ == TrajectoryLog::kProbes && probe)) {
    out_.trajectory.push_back({t_, nv.id, lane, nv.x, nv.v, 0.0});
  }
  return true;
}

void Simulation::inject(double t_now) {
  if (!probe_live_ && probe_cursor_ < probe_plan_.size() &&
      t_now >= probe_plan_[probe_cursor_].entry_time) {
    const ProbeSpec& ps = probe_plan_[probe_cursor_];
    if (try_spawn(ps.lane, net_.lanes[ps.lane].start_x, kMainlineExit, true,
                  std::nullopt)) {
      probe_live_ = true;
      ++probe_cursor_;
    }
  }
  for (OriginState& o : origins_) {
    generate_arrivals(o, t_now);
    for (std::size_t qi = 0; qi < o.queues.size(); ++qi) {
      auto& q = o.queues[qi];
      const int lane = o.spawn_lanes[qi];
      const double spawn_x = net_.lanes[lane].start_x;
      while (!q.empty()) {
        const PendingArrival& next = q.front();
        if (!try_spawn(lane, spawn_x, next.destination, false, o.spawn_speed_cap)) break;
        q.pop_front();
      }
    }
  }
}

std::optional<LeaderView> Simulation::infrastructure_wall(const Vehicle& veh,
                                                          int lane) const {
  std::optional<LeaderView> wall;
  if (const auto d = net_.distance_to_lane_end(lane, veh.x)) {
    wall = LeaderView{*d, 0.0, kObstacleId};
  }
  if (veh.destination != kMainlineExit) {
    const RampSpec& ramp = net_.ramps[off_ramp_ramps_[veh.destination]];
    if (lane != ramp.attach_lane) {
      const double dist = ramp.position_x - veh.x;
      if (dist >= 0 && dist <= cfg_.mandatory_window &&
          (!wall || dist < wall->gap)) {
        wall = LeaderView{dist, 0.0, kObstacleId};
      }
    }
  }
  return wall;
}

NeighborView Simulation::effective_view(const Vehicle& veh, int lane) const {
  NeighborView view = index_.neighbors(veh_, lane, veh.x, veh.length, veh.id);
  if (const auto wall = infrastructure_wall(veh, lane)) {
    if (!view.leader || wall->gap < view.leader->gap) view.leader = wall;
  }
  return view;
}

double Simulation::longitudinal_accel(const Vehicle& veh) const {
  const NeighborView view = effective_view(veh, veh.lane);
  double s = kNoLeaderGap;
  double v_leader = veh.v;
  if (view.leader) {
    s = std::max(view.leader->gap, kMinEvalGap);
    v_leader = view.leader->v;
  }
  return idm::acceleration(s, veh.v, v_leader, veh.idm);
}

mobil::ChangeContext Simulation::make_context(const Vehicle& veh, int target_lane) const {
  mobil::ChangeContext ctx;
  ctx.subject = veh;
  ctx.current = effective_view(veh, veh.lane);
  ctx.target = effective_view(veh, target_lane);
  return ctx;
}

double Simulation::relaxed_b_safe(double base, double distance_to_stop) const {
  if (distance_to_stop >= cfg_.relax_zone) return base;
  const double f = 1.0 - distance_to_stop / cfg_.relax_zone;
  return base + f * (cfg_.b_safe_relaxed - base);
}

Decision Simulation::plan_lane_change(int slot, std::optional<PlannedChange>& planned) {
  const Vehicle& veh = veh_[slot];

  std::optional<int> forced_target;
  bool hold_lane = false;
  double b_eff = veh.mobil.b_safe;
  if (const auto d = net_.distance_to_lane_end(veh.lane, veh.x)) {
    if (*d <= cfg_.mandatory_window) {
      forced_target = net_.lanes[veh.lane].merge_into;
      b_eff = relaxed_b_safe(veh.mobil.b_safe, *d);
    }
  } else if (veh.destination != kMainlineExit) {
    const RampSpec& ramp = net_.ramps[off_ramp_ramps_[veh.destination]];
    const double dist = ramp.position_x - veh.x;
    if (dist >= 0 && dist <= cfg_.exit_prepare_window) {
      if (veh.lane != ramp.attach_lane) {
        forced_target = veh.lane < ramp.attach_lane ? net_.right_of(veh.lane, veh.x)
                                                    : net_.left_of(veh.lane, veh.x);
        if (dist <= cfg_.mandatory_window) {
          b_eff = relaxed_b_safe(veh.mobil.b_safe, dist);
        }
      } else {
        hold_lane = true;  // already on the exit lane, keep it
      }
    }
  }

  if (forced_target || hold_lane) {
    Decision d;
    d.forced = true;
    if (forced_target) {
      const mobil::ChangeContext ctx = make_context(veh, *forced_target);
      if (mobil::is_safe(ctx, evaluator_, b_eff)) {
        d.change = *forced_target < veh.lane ? LaneChange::kLeft : LaneChange::kRight;
        planned = PlannedChange{slot, *forced_target, b_eff, true};
      }
    }
    if (veh.probe) {
      // keep the incentive trace complete while the merge is forced
      if (const auto l = net_.left_of(veh.lane, veh.x)) {
        d.incentive_left = mobil::incentive(make_context(veh, *l), evaluator_);
      }
      if (const auto r = net_.right_of(veh.lane, veh.x)) {
        d.incentive_right = mobil::incentive(make_context(veh, *r), evaluator_);
      }
    }
    return d;
  }

  const auto left = net_.left_of(veh.lane, veh.x);
  const auto right = net_.right_of(veh.lane, veh.x);
  std::optional<mobil::ChangeContext> lctx, rctx;
  if (left) lctx = make_context(veh, *left);
  if (right) rctx = make_context(veh, *right);
  const Decision d = mobil::decide(veh, lctx, rctx, evaluator_);
  if (d.change == LaneChange::kLeft) {
    planned = PlannedChange{slot, *left, veh.mobil.b_safe, false};
  } else if (d.change == LaneChange::kRight) {
    planned = PlannedChange{slot, *right, veh.mobil.b_safe, false};
  }
  return d;
}

void Simulation::complete_vehicle(int slot, double t_exit) {
  Vehicle& veh = veh_[slot];
  veh.exit_time = t_exit;
  out_.vehicles[veh.id - 1].exit_time = t_exit;
  dead_[slot] = true;
  index_.erase(veh_, slot);
  ++despawned_;
  if (veh.probe) probe_live_ = false;
}

void Simulation::step() {
  const double t0 = t_;
  const double t1 = t_ + cfg_.dt;

  // (1) compact and snapshot
  if (despawned_ > 0) {
    std::size_t w = 0;
    for (std::size_t r = 0; r < veh_.size(); ++r) {
      if (!dead_[r]) {
        if (w != r) veh_[w] = std::move(veh_[r]);
        ++w;
      }
    }
    veh_.resize(w);
    dead_.assign(w, false);
    accel_.resize(w);
  }
  slot_of_id_.assign(static_cast<std::size_t>(next_id_), -1);
  for (std::size_t i = 0; i < veh_.size(); ++i) {
    slot_of_id_[veh_[i].id] = static_cast<std::int32_t>(i);
  }
  index_.rebuild(veh_, net_.lane_count());

  // (2) longitudinal accelerations from the snapshot
  for (std::size_t i = 0; i < veh_.size(); ++i) {
    accel_[i] = longitudinal_accel(veh_[i]);
  }

  // (3) lane-change decisions from the same snapshot
  changes_.clear();
  for (std::size_t i = 0; i < veh_.size(); ++i) {
    std::optional<PlannedChange> planned;
    const Decision d = plan_lane_change(static_cast<int>(i), planned);
    if (planned) changes_.push_back(*planned);
    if (veh_[i].probe) {
      out_.probe_log.push_back({t0, veh_[i].id, veh_[i].lane, d.incentive_left,
                                d.incentive_right, veh_[i].mobil.delta_a_th, d.change,
                                d.forced});
    }
  }

  // (4) execute in ascending id order, re-validating against the
  //     partially updated population; failures are skipped, not queued
  std::sort(changes_.begin(), changes_.end(), [&](const PlannedChange& a,
                                                  const PlannedChange& b) {
    return veh_[a.slot].id < veh_[b.slot].id;
  });
  for (const PlannedChange& pc : changes_) {
    Vehicle& veh = veh_[pc.slot];
    const mobil::ChangeContext ctx = make_context(veh, pc.target_lane);
    if (!mobil::is_safe(ctx, evaluator_, pc.b_safe)) continue;
    index_.move(veh_, pc.slot, veh.lane, pc.target_lane);
    veh.lane = pc.target_lane;
  }

  // (5) ballistic update; a_eff clamped so v never goes negative
  for (std::size_t i = 0; i < veh_.size(); ++i) {
    Vehicle& veh = veh_[i];
    double a = accel_[i];
    if (veh.v + a * cfg_.dt < 0) a = -veh.v / cfg_.dt;
    const double x0 = veh.x;
    const double v0 = veh.v;
    veh.x += veh.v * cfg_.dt + 0.5 * a * cfg_.dt * cfg_.dt;
    veh.v = std::max(0.0, veh.v + a * cfg_.dt);
    accel_[i] = a;
    detector_bank_.observe(t0, t1, veh.id, x0, veh.x, v0, veh.v);
  }

  // negative-gap scan on the post-update state
  for (int lane = 0; lane < net_.lane_count(); ++lane) {
    scratch_ = index_.lane_slots(lane);
    std::sort(scratch_.begin(), scratch_.end(),
              [&](int a, int b) { return veh_[a].x < veh_[b].x; });
    for (std::size_t k = 1; k < scratch_.size(); ++k) {
      const Vehicle& back = veh_[scratch_[k - 1]];
      const Vehicle& front = veh_[scratch_[k]];
      const double g = gap(front.x, front.length, back.x);
      if (g < 0) out_.collisions.push_back({t1, back.id, front.id, lane, g});
    }
  }

  // (6) despawn
  for (std::size_t i = 0; i < veh_.size(); ++i) {
    const Vehicle& veh = veh_[i];
    if (dead_[i]) continue;
    bool leave = veh.x >= net_.total_length;
    if (!leave && veh.destination != kMainlineExit) {
      const RampSpec& ramp = net_.ramps[off_ramp_ramps_[veh.destination]];
      leave = veh.lane == ramp.attach_lane && veh.x >= ramp.position_x;
    }
    if (leave) complete_vehicle(static_cast<int>(i), t1);
  }

  if (trajectory_mode_ != TrajectoryLog::kNone) {
    for (std::size_t i = 0; i < veh_.size(); ++i) {
      if (dead_[i]) continue;
      if (trajectory_mode_ == TrajectoryLog::kProbes && !veh_[i].probe) continue;
      out_.trajectory.push_back(
          {t1, veh_[i].id, veh_[i].lane, veh_[i].x, veh_[i].v, accel_[i]});
    }
  }

  // (7) inject new vehicles
  t_ = t1;
  inject(t1);
}

std::uint64_t Simulation::entry_queue() const {
  std::uint64_t n = 0;
  for (const OriginState& o : origins_) {
    for (const auto& q : o.queues) n += q.size();
  }
  return n;
}

SimulationOutput Simulation::run() {
  const auto steps = static_cast<long long>(std::llround(cfg_.duration / cfg_.dt));
  for (long long k = 0; k < steps; ++k) step();
  return finish();
}

SimulationOutput Simulation::finish() {
  if (finished_) throw std::logic_error("Simulation::finish called twice");
  finished_ = true;
  out_.config = cfg_;
  out_.spawned = spawned_;
  out_.despawned = despawned_;
  out_.entry_queue_remaining = entry_queue();
  out_.probes_never_entered = static_cast<int>(probe_plan_.size() - probe_cursor_);
  for (const VehicleRecord& rec : out_.vehicles) {
    if (rec.probe && !rec.exit_time) out_.incomplete_probes.push_back(rec.id);
  }
  out_.detector_passages = detector_bank_.take();
  std::sort(out_.detector_passages.begin(), out_.detector_passages.end(),
            [](const DetectorPassage& a, const DetectorPassage& b) {
              if (a.t != b.t) return a.t < b.t;
              if (a.id != b.id) return a.id < b.id;
              return a.detector < b.detector;
            });
  return std::move(out_);
}

SimulationOutput run_simulation(RoadNetwork network, SimConfig config,
                                std::vector<DemandProfile> demand,
                                std::vector<ProbeSpec> probe_plan,
                                std::vector<Vehicle> initial, TrajectoryLog log) {
  Simulation sim(std::move(network), config, std::move(demand), std::move(probe_plan),
                 std::move(initial));
  sim.set_trajectory_logging(log);
  return sim.run();
}

}  // namespace mobilsim
