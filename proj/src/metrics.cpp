#include "mobilsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace mobilsim {

std::optional<double> travel_time(const VehicleRecord& rec) {
  if (!rec.exit_time) return std::nullopt;
  return *rec.exit_time - rec.entry_time;
}

Regime classify_regime(double entry_time, double congestion_onset) {
  return entry_time < congestion_onset ? Regime::kFreeFlow : Regime::kCongested;
}

double average_travel_time(std::span<const VehicleRecord> records,
                           std::optional<Regime> filter, double congestion_onset) {
  double sum = 0;
  int n = 0;
  for (const VehicleRecord& rec : records) {
    const auto tt = travel_time(rec);
    if (!tt) continue;
    if (filter && classify_regime(rec.entry_time, congestion_onset) != *filter) continue;
    sum += *tt;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("average_travel_time: no matching records");
  return sum / n;
}

std::vector<SpeedField> speed_field(std::span<const TrajectorySample> log, double dx,
                                    double dt_agg, int lane_count, double x_extent,
                                    double t_extent) {
  if (dx <= 0 || dt_agg <= 0) {
    throw std::invalid_argument("speed_field: dx and dt must be > 0");
  }
  const int nx = static_cast<int>(std::floor(x_extent / dx + 1e-9));
  const int nt = static_cast<int>(std::floor(t_extent / dt_agg + 1e-9));

  std::vector<SpeedField> fields(std::max(lane_count, 0));
  for (SpeedField& f : fields) {
    f.nx = nx;
    f.nt = nt;
    f.dx = dx;
    f.dt = dt_agg;
    f.sum.assign(static_cast<std::size_t>(nx) * nt, 0.0);
    f.count.assign(static_cast<std::size_t>(nx) * nt, 0);
  }
  for (const TrajectorySample& s : log) {
    if (s.lane < 0 || s.lane >= lane_count) continue;
    if (s.x < 0 || s.t < 0) continue;
    const int i = static_cast<int>(std::floor(s.x / dx));
    const int j = static_cast<int>(std::floor(s.t / dt_agg));
    if (i >= nx || j >= nt) continue;
    SpeedField& f = fields[s.lane];
    f.sum[static_cast<std::size_t>(i) * nt + j] += s.v;
    f.count[static_cast<std::size_t>(i) * nt + j] += 1;
  }
  return fields;
}

DetectorBank::DetectorBank(std::vector<double> positions)
    : positions_(std::move(positions)) {}

void DetectorBank::observe(double t0, double t1, VehicleId id, double x0, double x1,
                           double v0, double v1) {
  if (!(x1 > x0)) return;
  auto first = std::lower_bound(positions_.begin(), positions_.end(), x0);
  for (auto it = first; it != positions_.end() && *it < x1; ++it) {
    const double frac = (*it - x0) / (x1 - x0);
    DetectorPassage p;
    p.id = id;
    p.detector = static_cast<int>(it - positions_.begin());
    p.t = t0 + frac * (t1 - t0);
    p.v = v0 + frac * (v1 - v0);
    passages_.push_back(p);
  }
}

std::vector<DetectorPassage> detector_passages(std::span<const TrajectorySample> log,
                                               std::span<const double> positions) {
  DetectorBank bank(std::vector<double>(positions.begin(), positions.end()));
  std::unordered_map<VehicleId, TrajectorySample> last;
  for (const TrajectorySample& s : log) {
    auto it = last.find(s.id);
    if (it != last.end()) {
      bank.observe(it->second.t, s.t, s.id, it->second.x, s.x, it->second.v, s.v);
      it->second = s;
    } else {
      last.emplace(s.id, s);
    }
  }
  auto out = bank.take();
  std::sort(out.begin(), out.end(), [](const DetectorPassage& a, const DetectorPassage& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.id != b.id) return a.id < b.id;
    return a.detector < b.detector;
  });
  return out;
}

}  // namespace mobilsim
