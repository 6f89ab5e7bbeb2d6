#pragma once

#include <functional>
#include <optional>

#include "mobilsim/core.hpp"

namespace mobilsim::mobil {

// Scene around a subject weighing a change into one candidate lane. Both
// views are taken at the subject's x; all gaps are bumper-to-bumper.
struct ChangeContext {
  Vehicle subject;
  NeighborView current;
  NeighborView target;
};

// Acceleration evaluator (id, gap, speed, leader speed) -> m/s^2. The id is
// the vehicle whose acceleration is computed, so callers can bind that
// vehicle's own longitudinal parameters.
using IdmEvaluator =
    std::function<double(VehicleId, double s, double v, double v_leader)>;

// Incentive of the candidate change:
//   (a~_c - a_c) + p * ((a~_n - a_n) + (a~_o - a_o))
// Missing neighbors enter via the no-leader stand-in; a missing follower
// contributes zero to its difference term. Returns -inf when a hypothetical
// gap (subject -> target leader, or target follower -> subject) is
// nonpositive: the direction is unsafe, not merely unattractive.
double incentive(const ChangeContext& ctx, const IdmEvaluator& eval);

// True iff both hypothetical gaps are strictly positive and the new
// follower would not have to brake harder than b_safe.
bool is_safe(const ChangeContext& ctx, const IdmEvaluator& eval, double b_safe);

// Discretionary decision: a direction qualifies iff it is safe and its
// incentive strictly exceeds the subject's delta_a_th; among two qualifying
// directions the larger incentive wins, an exact tie goes right.
Decision decide(const Vehicle& subject, const std::optional<ChangeContext>& left,
                const std::optional<ChangeContext>& right, const IdmEvaluator& eval);

}  // namespace mobilsim::mobil
