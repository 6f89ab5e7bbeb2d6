#include "mobilsim/scenario.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mobilsim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ScenarioError(where + ": " + what);
}

const json& require(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& j, const char* key, const std::string& where, double fallback,
              bool required = false) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required) fail(where, std::string("missing field '") + key + "'");
    return fallback;
  }
  if (!it->is_number()) fail(where + "." + key, "expected a number");
  return it->get<double>();
}

IdmParams parse_idm(const json& j, const IdmParams& base, const std::string& where) {
  IdmParams p = base;
  p.v0 = number(j, "v0", where, p.v0);
  p.T = number(j, "T", where, p.T);
  p.s0 = number(j, "s0", where, p.s0);
  p.a = number(j, "a", where, p.a);
  p.b = number(j, "b", where, p.b);
  p.delta = number(j, "delta", where, p.delta);
  if (!p.valid()) fail(where, "invalid IDM parameters");
  return p;
}

MobilParams parse_mobil(const json& j, const MobilParams& base, const std::string& where) {
  MobilParams p = base;
  p.p = number(j, "p", where, p.p);
  p.delta_a_th = number(j, "delta_a_th", where, p.delta_a_th);
  p.b_safe = number(j, "b_safe", where, p.b_safe);
  if (!p.valid()) fail(where, "invalid MOBIL parameters");
  return p;
}

RoadNetwork parse_network(const json& j) {
  if (j.contains("preset")) {
    const std::string preset = j.at("preset").get<std::string>();
    if (preset != "a20_like") fail("network.preset", "unknown preset '" + preset + "'");
    const int drop = static_cast<int>(number(j, "drop_lane", "network", 0));
    return build_default_network(drop);
  }
  RoadNetwork net;
  net.total_length = number(j, "total_length", "network", 0, true);
  const json& lanes = require(j, "lanes", "network");
  int idx = 0;
  for (const json& lj : lanes) {
    const std::string where = "network.lanes[" + std::to_string(idx) + "]";
    LaneSpec l;
    l.index = idx++;
    l.start_x = number(lj, "start_x", where, 0);
    l.end_x = number(lj, "end_x", where, net.total_length);
    if (lj.contains("merge_into")) l.merge_into = lj.at("merge_into").get<int>();
    l.auxiliary = lj.value("auxiliary", false);
    net.lanes.push_back(l);
  }
  if (j.contains("ramps")) {
    int ri = 0;
    for (const json& rj : j.at("ramps")) {
      const std::string where = "network.ramps[" + std::to_string(ri++) + "]";
      RampSpec r;
      const std::string kind = require(rj, "kind", where).get<std::string>();
      if (kind == "on") {
        r.kind = RampSpec::Kind::kOn;
      } else if (kind == "off") {
        r.kind = RampSpec::Kind::kOff;
      } else {
        fail(where + ".kind", "expected 'on' or 'off'");
      }
      r.attach_lane = static_cast<int>(number(rj, "attach_lane", where, 0, true));
      r.position_x = number(rj, "position_x", where, 0, true);
      r.segment = static_cast<int>(number(rj, "segment", where, 0));
      net.ramps.push_back(r);
    }
  }
  if (j.contains("detectors")) {
    for (const json& d : j.at("detectors")) net.detectors.push_back(d.get<double>());
  }
  net.segment_count = static_cast<int>(number(
      j, "segment_count", "network",
      net.detectors.empty() ? 0 : static_cast<double>(net.detectors.size() - 1)));
  try {
    net.validate();
  } catch (const std::invalid_argument& e) {
    fail("network", e.what());
  }
  return net;
}

std::vector<DemandProfile> parse_demand(const json& j, const RoadNetwork& net) {
  std::vector<DemandProfile> demand;
  const auto on_ramps = net.on_ramps();
  const auto off_ramps = net.off_ramps();
  int di = 0;
  for (const json& dj : j) {
    const std::string where = "demand[" + std::to_string(di++) + "]";
    DemandProfile prof;
    const std::string origin = require(dj, "origin", where).get<std::string>();
    if (origin == "mainline") {
      prof.origin_ramp = kMainlineOrigin;
    } else if (origin.rfind("on_ramp_", 0) == 0) {
      const int k = std::stoi(origin.substr(8));
      if (k < 0 || k >= static_cast<int>(on_ramps.size())) {
        fail(where + ".origin", "no such on-ramp '" + origin + "'");
      }
      prof.origin_ramp = on_ramps[k];
    } else {
      fail(where + ".origin", "expected 'mainline' or 'on_ramp_<k>'");
    }
    if (dj.contains("spawn_speed")) {
      prof.spawn_speed_cap = dj.at("spawn_speed").get<double>();
    }
    int ii = 0;
    for (const json& ij : require(dj, "intervals", where)) {
      const std::string iw = where + ".intervals[" + std::to_string(ii++) + "]";
      DemandInterval iv;
      iv.start = number(ij, "start", iw, 0, true);
      iv.end = number(ij, "end", iw, 0, true);
      iv.flow_vph = number(ij, "flow_vph", iw, 0, true);
      iv.mainline_fraction = 1.0;
      iv.off_ramp_fractions.assign(off_ramps.size(), 0.0);
      if (ij.contains("destinations")) {
        const json& dd = ij.at("destinations");
        iv.mainline_fraction = number(dd, "mainline", iw + ".destinations", 1.0);
        if (dd.contains("off_ramps")) {
          const json& fr = dd.at("off_ramps");
          if (fr.size() > off_ramps.size()) {
            fail(iw + ".destinations.off_ramps", "more fractions than off-ramps");
          }
          for (std::size_t k = 0; k < fr.size(); ++k) {
            iv.off_ramp_fractions[k] = fr[k].get<double>();
          }
        }
      }
      prof.intervals.push_back(iv);
    }
    demand.push_back(std::move(prof));
  }
  return demand;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }

  Scenario sc;
  sc.network = parse_network(require(j, "network", "scenario"));

  IdmParams idm_defaults;
  MobilParams mobil_defaults;
  double vehicle_length = 5.0;
  if (j.contains("defaults")) {
    const json& d = j.at("defaults");
    if (d.contains("idm")) idm_defaults = parse_idm(d.at("idm"), idm_defaults, "defaults.idm");
    if (d.contains("mobil")) {
      mobil_defaults = parse_mobil(d.at("mobil"), mobil_defaults, "defaults.mobil");
    }
    vehicle_length = number(d, "vehicle_length", "defaults", vehicle_length);
    if (vehicle_length <= 0) fail("defaults.vehicle_length", "must be > 0");
  }

  const json& sim = require(j, "sim", "scenario");
  sc.config.dt = number(sim, "dt", "sim", 0.4);
  sc.config.duration = number(sim, "duration", "sim", 14400.0);
  sc.config.congestion_onset = number(sim, "congestion_onset", "sim", 5400.0);
  sc.config.mandatory_window = number(sim, "mandatory_window", "sim", 500.0);
  sc.config.exit_prepare_window = number(sim, "exit_prepare_window", "sim", 2000.0);
  sc.config.relax_zone = number(sim, "relax_zone", "sim", 200.0);
  sc.config.b_safe_relaxed = number(sim, "b_safe_relaxed", "sim", 6.0);
  if (sim.contains("seed")) sc.config.seed = sim.at("seed").get<std::uint64_t>();
  if (sc.config.dt <= 0) fail("sim.dt", "must be > 0");
  if (sc.config.duration < 0) fail("sim.duration", "must be >= 0");
  sc.config.default_idm = idm_defaults;
  sc.config.default_mobil = mobil_defaults;
  sc.config.vehicle_length = vehicle_length;
  if (j.contains("probe_mobil")) {
    sc.config.probe_mobil = parse_mobil(j.at("probe_mobil"), mobil_defaults, "probe_mobil");
  }

  if (j.contains("demand")) sc.demand = parse_demand(j.at("demand"), sc.network);

  if (j.contains("probes")) {
    int pi = 0;
    for (const json& pj : j.at("probes")) {
      const std::string where = "probes[" + std::to_string(pi++) + "]";
      ProbeSpec p;
      p.entry_time = number(pj, "entry_time", where, 0, true);
      p.lane = static_cast<int>(number(pj, "lane", where, 0, true));
      if (p.lane < 0 || p.lane >= sc.network.lane_count()) {
        fail(where + ".lane", "lane does not exist");
      }
      sc.probes.push_back(p);
    }
  }

  if (j.contains("initial")) {
    int vi = 0;
    const auto off_ramps = sc.network.off_ramps();
    for (const json& vj : j.at("initial")) {
      const std::string where = "initial[" + std::to_string(vi++) + "]";
      Vehicle v;
      v.lane = static_cast<int>(number(vj, "lane", where, 0, true));
      v.x = number(vj, "x", where, 0, true);
      v.v = number(vj, "v", where, 0, true);
      v.length = number(vj, "length", where, vehicle_length);
      v.idm = idm_defaults;
      v.mobil = mobil_defaults;
      if (vj.contains("idm")) v.idm = parse_idm(vj.at("idm"), idm_defaults, where + ".idm");
      if (vj.contains("mobil")) {
        v.mobil = parse_mobil(vj.at("mobil"), mobil_defaults, where + ".mobil");
      }
      if (vj.contains("destination")) {
        const json& dst = vj.at("destination");
        if (dst.is_string() && dst.get<std::string>() == "mainline") {
          v.destination = kMainlineExit;
        } else if (dst.is_number_integer()) {
          v.destination = dst.get<int>();
          if (v.destination < 0 || v.destination >= static_cast<int>(off_ramps.size())) {
            fail(where + ".destination", "no such off-ramp");
          }
        } else {
          fail(where + ".destination", "expected 'mainline' or an off-ramp index");
        }
      }
      v.probe = vj.value("probe", false);
      if (v.v < 0) fail(where + ".v", "must be >= 0");
      if (!sc.network.lane_exists_at(v.lane, v.x)) {
        fail(where, "position outside the lane extent");
      }
      sc.initial.push_back(v);
    }
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

SimulationOutput run_scenario(const Scenario& sc, TrajectoryLog log) {
  return run_simulation(sc.network, sc.config, sc.demand, sc.probes, sc.initial, log);
}

}  // namespace mobilsim
