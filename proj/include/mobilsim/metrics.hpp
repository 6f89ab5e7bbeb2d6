#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mobilsim/core.hpp"

namespace mobilsim {

// Travel-time record of one vehicle; exit_time is absent while it is still
// in the network.
struct VehicleRecord {
  VehicleId id = 0;
  double entry_time = 0;
  std::optional<double> exit_time;
  int entry_lane = 0;
  int destination = kMainlineExit;
  bool probe = false;
};

struct TrajectorySample {
  double t = 0;
  VehicleId id = 0;
  int lane = 0;
  double x = 0;
  double v = 0;
  double a = 0;
};

struct DetectorPassage {
  VehicleId id = 0;
  int detector = 0;
  double t = 0;
  double v = 0;
};

enum class Regime { kFreeFlow, kCongested };

// exit - entry; absent while the vehicle is still present.
std::optional<double> travel_time(const VehicleRecord& rec);

// Free-flow iff entry_time < congestion_onset; the boundary itself counts
// as congested.
Regime classify_regime(double entry_time, double congestion_onset);

// Arithmetic mean over completed vehicles, optionally restricted to one
// regime. Throws std::invalid_argument when no record matches.
double average_travel_time(std::span<const VehicleRecord> records,
                           std::optional<Regime> filter, double congestion_onset);

// Space-time mean-speed field of one lane. Cell (i, j) covers
// x in [i*dx, (i+1)*dx) and t in [j*dt, (j+1)*dt); empty cells read nullopt.
struct SpeedField {
  int nx = 0;
  int nt = 0;
  double dx = 0;
  double dt = 0;
  std::vector<double> sum;
  std::vector<int> count;

  std::optional<double> mean(int i, int j) const {
    const int c = count[static_cast<std::size_t>(i) * nt + j];
    if (c == 0) return std::nullopt;
    return sum[static_cast<std::size_t>(i) * nt + j] / c;
  }
};

// One field per lane over [0, x_extent) x [0, t_extent); the grid has
// floor(extent/step) cells per axis and samples beyond it are dropped.
// Throws std::invalid_argument for nonpositive dx or dt_agg.
std::vector<SpeedField> speed_field(std::span<const TrajectorySample> log, double dx,
                                    double dt_agg, int lane_count, double x_extent,
                                    double t_extent);

// Streaming detector emulation: feed consecutive position pairs of each
// vehicle; a crossing is recorded when pos lies in [x0, x1), with time and
// speed linearly interpolated.
class DetectorBank {
 public:
  DetectorBank() = default;
  explicit DetectorBank(std::vector<double> positions);

  void observe(double t0, double t1, VehicleId id, double x0, double x1, double v0,
               double v1);

  const std::vector<DetectorPassage>& passages() const { return passages_; }
  std::vector<DetectorPassage> take() { return std::move(passages_); }

 private:
  std::vector<double> positions_;
  std::vector<DetectorPassage> passages_;
};

// Batch version over a stored trajectory log, sorted by (t, id, detector).
std::vector<DetectorPassage> detector_passages(std::span<const TrajectorySample> log,
                                               std::span<const double> positions);

}  // namespace mobilsim
