#pragma once

#include "mobilsim/core.hpp"

namespace mobilsim::idm {

// Desired gap s*(v, dv) = s0 + max(0, v*T + v*dv / (2*sqrt(a*b))).
double desired_gap(double v, double dv, const IdmParams& p);

// IDM acceleration a*[1 - (v/v0)^delta - (s*/s)^2].
// Throws std::domain_error for s <= 0 (a collision already happened).
double acceleration(double s, double v, double v_leader, const IdmParams& p);

// Free-road term a*[1 - (v/v0)^delta]; the s -> inf limit of acceleration.
double free_acceleration(double v, const IdmParams& p);

// Gap at which acceleration(s, v, v) = 0, i.e. (s0 + v*T)/sqrt(1-(v/v0)^delta).
// Throws std::domain_error unless 0 <= v < v0.
double equilibrium_gap(double v, const IdmParams& p);

}  // namespace mobilsim::idm
