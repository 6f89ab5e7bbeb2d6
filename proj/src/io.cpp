#include "mobilsim/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mobilsim::io {

std::string format_g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string decision_token(LaneChange change, bool forced) {
  std::string tok;
  switch (change) {
    case LaneChange::kStay:
      tok = "stay";
      break;
    case LaneChange::kLeft:
      tok = "left";
      break;
    case LaneChange::kRight:
      tok = "right";
      break;
  }
  if (forced && change != LaneChange::kStay) tok += "_forced";
  return tok;
}

void write_travel_times_csv(const SimulationOutput& out, std::ostream& os) {
  os << "id,entry,exit,travel_time,regime,probe\n";
  for (const VehicleRecord& rec : out.vehicles) {
    const auto tt = travel_time(rec);
    if (!tt) continue;
    const Regime regime = classify_regime(rec.entry_time, out.config.congestion_onset);
    os << rec.id << ',' << format_g6(rec.entry_time) << ',' << format_g6(*rec.exit_time)
       << ',' << format_g6(*tt) << ','
       << (regime == Regime::kFreeFlow ? "free-flow" : "congested") << ','
       << (rec.probe ? 1 : 0) << '\n';
  }
}

void write_probe_log_csv(const SimulationOutput& out, std::ostream& os) {
  os << "t,id,lane,inc_left,inc_right,threshold,decision\n";
  for (const ProbeLogEntry& e : out.probe_log) {
    os << format_g6(e.t) << ',' << e.id << ',' << e.lane << ',';
    if (e.inc_left) os << format_g6(*e.inc_left);
    os << ',';
    if (e.inc_right) os << format_g6(*e.inc_right);
    os << ',' << format_g6(e.threshold) << ',' << decision_token(e.decision, e.forced)
       << '\n';
  }
}

void write_trajectory_csv(const SimulationOutput& out, std::ostream& os) {
  os << "t,id,lane,x,v,a\n";
  for (const TrajectorySample& s : out.trajectory) {
    os << format_g6(s.t) << ',' << s.id << ',' << s.lane << ',' << format_g6(s.x) << ','
       << format_g6(s.v) << ',' << format_g6(s.a) << '\n';
  }
}

std::vector<TrajectorySample> read_trajectory_csv(std::istream& is) {
  std::vector<TrajectorySample> log;
  std::string line;
  if (!std::getline(is, line)) return log;
  if (line != "t,id,lane,x,v,a") {
    throw std::runtime_error("trajectory log: unexpected header '" + line + "'");
  }
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    TrajectorySample s;
    std::istringstream row(line);
    std::string field;
    try {
      auto next = [&]() {
        if (!std::getline(row, field, ',')) throw std::runtime_error("missing field");
        return field;
      };
      s.t = std::stod(next());
      s.id = std::stoll(next());
      s.lane = std::stoi(next());
      s.x = std::stod(next());
      s.v = std::stod(next());
      s.a = std::stod(next());
    } catch (const std::exception& e) {
      throw std::runtime_error("trajectory log line " + std::to_string(lineno) + ": " +
                               e.what());
    }
    log.push_back(s);
  }
  return log;
}

void write_speed_field_csv(const SpeedField& field, std::ostream& os) {
  for (int i = 0; i < field.nx; ++i) {
    for (int j = 0; j < field.nt; ++j) {
      if (j) os << ',';
      const auto m = field.mean(i, j);
      os << (m ? format_g6(*m) : "NA");
    }
    os << '\n';
  }
}

void write_heatmap_ppm(int rows, int cols,
                       const std::function<std::optional<double>(int, int)>& value,
                       const std::filesystem::path& path, int cell_px) {
  double lo = 0, hi = 0;
  bool any = false;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (const auto v = value(i, j)) {
        if (!any || *v < lo) lo = *v;
        if (!any || *v > hi) hi = *v;
        any = true;
      }
    }
  }
  if (hi <= lo) hi = lo + 1;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const int W = cols * cell_px, H = rows * cell_px;
  out << "P6\n" << W << ' ' << H << "\n255\n";
  // blue -> green -> red over the value range
  auto shade = [&](std::optional<double> v, unsigned char px[3]) {
    if (!v) {
      px[0] = px[1] = px[2] = 160;
      return;
    }
    const double t = (*v - lo) / (hi - lo);
    const double r = std::clamp(2 * t - 0.5, 0.0, 1.0);
    const double g = 1.0 - std::abs(2 * t - 1.0);
    const double b = std::clamp(1.5 - 2 * t, 0.0, 1.0);
    px[0] = static_cast<unsigned char>(255 * r);
    px[1] = static_cast<unsigned char>(255 * g);
    px[2] = static_cast<unsigned char>(255 * b);
  };
  std::vector<unsigned char> rowbuf(static_cast<std::size_t>(W) * 3);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      unsigned char px[3];
      shade(value(i, j), px);
      for (int k = 0; k < cell_px; ++k) {
        const std::size_t at = (static_cast<std::size_t>(j) * cell_px + k) * 3;
        rowbuf[at] = px[0];
        rowbuf[at + 1] = px[1];
        rowbuf[at + 2] = px[2];
      }
    }
    for (int k = 0; k < cell_px; ++k) {
      out.write(reinterpret_cast<const char*>(rowbuf.data()), rowbuf.size());
    }
  }
}

}  // namespace mobilsim::io
