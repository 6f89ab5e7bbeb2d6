#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mobilsim/engine.hpp"
#include "mobilsim/idm.hpp"
#include "mobilsim/metrics.hpp"
#include "mobilsim/mobil.hpp"
#include "mobilsim/network.hpp"
#include "mobilsim/scenario.hpp"
#include "mobilsim/sweep.hpp"

namespace py = pybind11;
using namespace mobilsim;

namespace {

// Evaluator resolving per-vehicle IDM parameters: the subject's own, then an
// explicit override map, then the shared defaults.
mobil::IdmEvaluator make_evaluator(const Vehicle& subject,
                                   const std::map<VehicleId, IdmParams>& overrides,
                                   const IdmParams& fallback) {
  return [subject, overrides, fallback](VehicleId id, double s, double v, double v_l) {
    const IdmParams* p = &fallback;
    if (id == subject.id) {
      p = &subject.idm;
    } else if (auto it = overrides.find(id); it != overrides.end()) {
      p = &it->second;
    }
    return idm::acceleration(std::max(s, 1e-3), v, v_l, *p);
  };
}

std::string regime_name(Regime r) {
  return r == Regime::kFreeFlow ? "free-flow" : "congested";
}

std::optional<Regime> regime_from_name(const std::optional<std::string>& name) {
  if (!name) return std::nullopt;
  if (*name == "free-flow" || *name == "freeflow") return Regime::kFreeFlow;
  if (*name == "congested") return Regime::kCongested;
  throw std::invalid_argument("regime must be 'free-flow' or 'congested'");
}

}  // namespace

PYBIND11_MODULE(_mobilsim, m) {
  m.doc() = "Multi-lane motorway microsimulation: IDM car following, MOBIL lane "
            "changing, travel-time parameter sweeps.";

  py::class_<IdmParams>(m, "IdmParams")
      .def(py::init<>())
      .def(py::init([](double v0, double T, double s0, double a, double b, double delta) {
             return IdmParams{v0, T, s0, a, b, delta};
           }),
           py::arg("v0") = 33.33, py::arg("T") = 1.5, py::arg("s0") = 2.0,
           py::arg("a") = 1.4, py::arg("b") = 2.0, py::arg("delta") = 4.0)
      .def_readwrite("v0", &IdmParams::v0)
      .def_readwrite("T", &IdmParams::T)
      .def_readwrite("s0", &IdmParams::s0)
      .def_readwrite("a", &IdmParams::a)
      .def_readwrite("b", &IdmParams::b)
      .def_readwrite("delta", &IdmParams::delta)
      .def("valid", &IdmParams::valid);

  py::class_<MobilParams>(m, "MobilParams")
      .def(py::init<>())
      .def(py::init([](double p, double th, double b_safe) {
             return MobilParams{p, th, b_safe};
           }),
           py::arg("p") = 0.5, py::arg("delta_a_th") = 0.3, py::arg("b_safe") = 4.0)
      .def_readwrite("p", &MobilParams::p)
      .def_readwrite("delta_a_th", &MobilParams::delta_a_th)
      .def_readwrite("b_safe", &MobilParams::b_safe)
      .def("valid", &MobilParams::valid);

  py::class_<Vehicle>(m, "Vehicle")
      .def(py::init<>())
      .def_readwrite("id", &Vehicle::id)
      .def_readwrite("lane", &Vehicle::lane)
      .def_readwrite("x", &Vehicle::x)
      .def_readwrite("v", &Vehicle::v)
      .def_readwrite("length", &Vehicle::length)
      .def_readwrite("idm", &Vehicle::idm)
      .def_readwrite("mobil", &Vehicle::mobil)
      .def_readwrite("entry_time", &Vehicle::entry_time)
      .def_readwrite("exit_time", &Vehicle::exit_time)
      .def_readwrite("destination", &Vehicle::destination)
      .def_readwrite("probe", &Vehicle::probe);

  py::class_<LeaderView>(m, "LeaderView")
      .def(py::init([](double gap, double v, VehicleId id) {
             return LeaderView{gap, v, id};
           }),
           py::arg("gap"), py::arg("v"), py::arg("id") = 0)
      .def_readwrite("gap", &LeaderView::gap)
      .def_readwrite("v", &LeaderView::v)
      .def_readwrite("id", &LeaderView::id);

  py::class_<FollowerView>(m, "FollowerView")
      .def(py::init([](double gap, double v, VehicleId id) {
             return FollowerView{gap, v, id};
           }),
           py::arg("gap"), py::arg("v"), py::arg("id") = 0)
      .def_readwrite("gap", &FollowerView::gap)
      .def_readwrite("v", &FollowerView::v)
      .def_readwrite("id", &FollowerView::id);

  py::class_<NeighborView>(m, "NeighborView")
      .def(py::init<>())
      .def_readwrite("leader", &NeighborView::leader)
      .def_readwrite("follower", &NeighborView::follower);

  py::enum_<LaneChange>(m, "LaneChange")
      .value("STAY", LaneChange::kStay)
      .value("LEFT", LaneChange::kLeft)
      .value("RIGHT", LaneChange::kRight);

  py::class_<Decision>(m, "Decision")
      .def_readonly("change", &Decision::change)
      .def_readonly("incentive_left", &Decision::incentive_left)
      .def_readonly("incentive_right", &Decision::incentive_right)
      .def_readonly("forced", &Decision::forced);

  py::class_<mobil::ChangeContext>(m, "ChangeContext")
      .def(py::init<>())
      .def_readwrite("subject", &mobil::ChangeContext::subject)
      .def_readwrite("current", &mobil::ChangeContext::current)
      .def_readwrite("target", &mobil::ChangeContext::target);

  m.def("gap", &gap, py::arg("leader_x"), py::arg("leader_length"), py::arg("follower_x"));
  m.def("approach_rate", &approach_rate, py::arg("v"), py::arg("v_leader"));

  m.def("desired_gap", &idm::desired_gap, py::arg("v"), py::arg("dv"), py::arg("params"));
  m.def("acceleration", &idm::acceleration, py::arg("s"), py::arg("v"),
        py::arg("v_leader"), py::arg("params"));
  m.def("free_acceleration", &idm::free_acceleration, py::arg("v"), py::arg("params"));
  m.def("equilibrium_gap", &idm::equilibrium_gap, py::arg("v"), py::arg("params"));

  m.def(
      "incentive",
      [](const mobil::ChangeContext& ctx, const std::map<VehicleId, IdmParams>& params,
         const IdmParams& defaults) {
        return mobil::incentive(ctx, make_evaluator(ctx.subject, params, defaults));
      },
      py::arg("ctx"), py::arg("params_by_id") = std::map<VehicleId, IdmParams>{},
      py::arg("default_idm") = IdmParams{});
  m.def(
      "is_safe",
      [](const mobil::ChangeContext& ctx, double b_safe,
         const std::map<VehicleId, IdmParams>& params, const IdmParams& defaults) {
        return mobil::is_safe(ctx, make_evaluator(ctx.subject, params, defaults), b_safe);
      },
      py::arg("ctx"), py::arg("b_safe") = 4.0,
      py::arg("params_by_id") = std::map<VehicleId, IdmParams>{},
      py::arg("default_idm") = IdmParams{});
  m.def(
      "decide",
      [](const Vehicle& subject, const std::optional<mobil::ChangeContext>& left,
         const std::optional<mobil::ChangeContext>& right,
         const std::map<VehicleId, IdmParams>& params, const IdmParams& defaults) {
        return mobil::decide(subject, left, right,
                             make_evaluator(subject, params, defaults));
      },
      py::arg("subject"), py::arg("left") = std::nullopt, py::arg("right") = std::nullopt,
      py::arg("params_by_id") = std::map<VehicleId, IdmParams>{},
      py::arg("default_idm") = IdmParams{});

  py::class_<LaneSpec>(m, "LaneSpec")
      .def_readonly("index", &LaneSpec::index)
      .def_readonly("start_x", &LaneSpec::start_x)
      .def_readonly("end_x", &LaneSpec::end_x)
      .def_readonly("merge_into", &LaneSpec::merge_into)
      .def_readonly("auxiliary", &LaneSpec::auxiliary);

  py::class_<RampSpec> ramp(m, "RampSpec");
  py::enum_<RampSpec::Kind>(ramp, "Kind")
      .value("ON", RampSpec::Kind::kOn)
      .value("OFF", RampSpec::Kind::kOff);
  ramp.def_readonly("kind", &RampSpec::kind)
      .def_readonly("attach_lane", &RampSpec::attach_lane)
      .def_readonly("position_x", &RampSpec::position_x)
      .def_readonly("segment", &RampSpec::segment);

  py::class_<RoadNetwork>(m, "RoadNetwork")
      .def_readonly("total_length", &RoadNetwork::total_length)
      .def_readonly("lanes", &RoadNetwork::lanes)
      .def_readonly("ramps", &RoadNetwork::ramps)
      .def_readonly("detectors", &RoadNetwork::detectors)
      .def_readonly("segment_count", &RoadNetwork::segment_count)
      .def("lane_exists_at", &RoadNetwork::lane_exists_at)
      .def("left_of", &RoadNetwork::left_of)
      .def("right_of", &RoadNetwork::right_of)
      .def("distance_to_lane_end", &RoadNetwork::distance_to_lane_end);

  m.def("build_default_network", &build_default_network, py::arg("drop_lane") = 0);
  m.def(
      "neighbors",
      [](const std::vector<Vehicle>& vehicles, int lane, double x, double subject_length,
         VehicleId exclude) {
        return neighbors(vehicles, lane, x, subject_length, exclude);
      },
      py::arg("vehicles"), py::arg("lane"), py::arg("x"), py::arg("subject_length") = 5.0,
      py::arg("exclude") = 0);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("duration", &SimConfig::duration)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("default_idm", &SimConfig::default_idm)
      .def_readwrite("default_mobil", &SimConfig::default_mobil)
      .def_readwrite("probe_mobil", &SimConfig::probe_mobil)
      .def_readwrite("vehicle_length", &SimConfig::vehicle_length)
      .def_readwrite("congestion_onset", &SimConfig::congestion_onset)
      .def_readwrite("mandatory_window", &SimConfig::mandatory_window)
      .def_readwrite("relax_zone", &SimConfig::relax_zone)
      .def_readwrite("b_safe_relaxed", &SimConfig::b_safe_relaxed);

  py::class_<VehicleRecord>(m, "VehicleRecord")
      .def_readonly("id", &VehicleRecord::id)
      .def_readonly("entry_time", &VehicleRecord::entry_time)
      .def_readonly("exit_time", &VehicleRecord::exit_time)
      .def_readonly("entry_lane", &VehicleRecord::entry_lane)
      .def_readonly("destination", &VehicleRecord::destination)
      .def_readonly("probe", &VehicleRecord::probe);

  py::class_<TrajectorySample>(m, "TrajectorySample")
      .def_readonly("t", &TrajectorySample::t)
      .def_readonly("id", &TrajectorySample::id)
      .def_readonly("lane", &TrajectorySample::lane)
      .def_readonly("x", &TrajectorySample::x)
      .def_readonly("v", &TrajectorySample::v)
      .def_readonly("a", &TrajectorySample::a);

  py::class_<DetectorPassage>(m, "DetectorPassage")
      .def_readonly("id", &DetectorPassage::id)
      .def_readonly("detector", &DetectorPassage::detector)
      .def_readonly("t", &DetectorPassage::t)
      .def_readonly("v", &DetectorPassage::v);

  py::class_<ProbeLogEntry>(m, "ProbeLogEntry")
      .def_readonly("t", &ProbeLogEntry::t)
      .def_readonly("id", &ProbeLogEntry::id)
      .def_readonly("lane", &ProbeLogEntry::lane)
      .def_readonly("inc_left", &ProbeLogEntry::inc_left)
      .def_readonly("inc_right", &ProbeLogEntry::inc_right)
      .def_readonly("threshold", &ProbeLogEntry::threshold)
      .def_readonly("decision", &ProbeLogEntry::decision)
      .def_readonly("forced", &ProbeLogEntry::forced);

  py::class_<CollisionEvent>(m, "CollisionEvent")
      .def_readonly("t", &CollisionEvent::t)
      .def_readonly("follower", &CollisionEvent::follower)
      .def_readonly("leader", &CollisionEvent::leader)
      .def_readonly("lane", &CollisionEvent::lane)
      .def_readonly("gap", &CollisionEvent::gap);

  py::class_<SimulationOutput>(m, "SimulationOutput")
      .def_readonly("config", &SimulationOutput::config)
      .def_readonly("vehicles", &SimulationOutput::vehicles)
      .def_readonly("probe_log", &SimulationOutput::probe_log)
      .def_readonly("detector_passages", &SimulationOutput::detector_passages)
      .def_readonly("trajectory", &SimulationOutput::trajectory)
      .def_readonly("collisions", &SimulationOutput::collisions)
      .def_readonly("spawned", &SimulationOutput::spawned)
      .def_readonly("despawned", &SimulationOutput::despawned)
      .def_readonly("entry_queue_remaining", &SimulationOutput::entry_queue_remaining)
      .def_readonly("incomplete_probes", &SimulationOutput::incomplete_probes)
      .def_readonly("probes_never_entered", &SimulationOutput::probes_never_entered);

  py::class_<Scenario>(m, "Scenario")
      .def_readwrite("network", &Scenario::network)
      .def_readwrite("config", &Scenario::config)
      .def_readonly("probes", &Scenario::probes);

  m.def("load_scenario", [](const std::filesystem::path& p) { return load_scenario(p); },
        py::arg("path"));
  m.def("parse_scenario", &parse_scenario, py::arg("text"));
  m.def(
      "run_scenario",
      [](const Scenario& sc, const std::string& trajectories) {
        TrajectoryLog log = TrajectoryLog::kNone;
        if (trajectories == "probes") {
          log = TrajectoryLog::kProbes;
        } else if (trajectories == "all") {
          log = TrajectoryLog::kAll;
        } else if (trajectories != "none") {
          throw std::invalid_argument("trajectories must be none, probes or all");
        }
        py::gil_scoped_release release;
        return run_scenario(sc, log);
      },
      py::arg("scenario"), py::arg("trajectories") = "none");

  m.def("travel_time", &travel_time, py::arg("record"));
  m.def(
      "classify_regime",
      [](double entry, double onset) { return regime_name(classify_regime(entry, onset)); },
      py::arg("entry_time"), py::arg("congestion_onset"));
  m.def(
      "average_travel_time",
      [](const std::vector<VehicleRecord>& records, const std::optional<std::string>& regime,
         double onset) {
        return average_travel_time(records, regime_from_name(regime), onset);
      },
      py::arg("records"), py::arg("regime") = std::nullopt,
      py::arg("congestion_onset") = 5400.0);
  m.def(
      "speed_field",
      [](const std::vector<TrajectorySample>& log, double dx, double dt, int lane_count,
         double x_extent, double t_extent) {
        const auto fields = speed_field(log, dx, dt, lane_count, x_extent, t_extent);
        std::vector<std::vector<std::vector<std::optional<double>>>> out;
        for (const SpeedField& f : fields) {
          std::vector<std::vector<std::optional<double>>> lane(f.nx);
          for (int i = 0; i < f.nx; ++i) {
            lane[i].resize(f.nt);
            for (int j = 0; j < f.nt; ++j) lane[i][j] = f.mean(i, j);
          }
          out.push_back(std::move(lane));
        }
        return out;
      },
      py::arg("log"), py::arg("dx"), py::arg("dt"), py::arg("lane_count"),
      py::arg("x_extent"), py::arg("t_extent"));
  m.def(
      "detector_passages",
      [](const std::vector<TrajectorySample>& log, const std::vector<double>& positions) {
        return detector_passages(log, positions);
      },
      py::arg("log"), py::arg("positions"));

  py::class_<SweepCell>(m, "SweepCell")
      .def_readonly("p", &SweepCell::p)
      .def_readonly("th", &SweepCell::th)
      .def_readonly("probe_ids", &SweepCell::probe_ids)
      .def_readonly("probe_travel_times", &SweepCell::probe_travel_times)
      .def_readonly("freeflow_avg", &SweepCell::freeflow_avg)
      .def_readonly("congested_avg", &SweepCell::congested_avg)
      .def_readonly("collisions", &SweepCell::collisions)
      .def("complete", &SweepCell::complete);

  py::class_<SweepGrid>(m, "SweepGrid")
      .def_readonly("p_values", &SweepGrid::p_values)
      .def_readonly("th_values", &SweepGrid::th_values)
      .def_readonly("probe_count", &SweepGrid::probe_count)
      .def("cell", &SweepGrid::cell, py::return_value_policy::reference_internal);

  m.def(
      "run_sweep",
      [](const Scenario& sc, const std::vector<double>& p_values,
         const std::vector<double>& th_values, int jobs) {
        GridSpec grid;
        grid.p_values = p_values;
        grid.th_values = th_values;
        py::gil_scoped_release release;
        return run_sweep(sc, grid, jobs);
      },
      py::arg("scenario"), py::arg("p_values"), py::arg("th_values"), py::arg("jobs") = 1);
  m.def("default_grid", [] {
    const GridSpec g = GridSpec::defaults();
    return std::make_pair(g.p_values, g.th_values);
  });
}
