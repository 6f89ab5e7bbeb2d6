#include "mobilsim/idm.hpp"

#include <cmath>
#include <stdexcept>

namespace mobilsim::idm {

double desired_gap(double v, double dv, const IdmParams& p) {
  const double dynamical = v * p.T + v * dv / (2.0 * std::sqrt(p.a * p.b));
  return p.s0 + std::max(0.0, dynamical);
}

double acceleration(double s, double v, double v_leader, const IdmParams& p) {
  if (s <= 0.0) {
    throw std::domain_error("idm::acceleration: nonpositive gap");
  }
  const double s_star = desired_gap(v, approach_rate(v, v_leader), p);
  return p.a * (1.0 - std::pow(v / p.v0, p.delta) - (s_star / s) * (s_star / s));
}

double free_acceleration(double v, const IdmParams& p) {
  return p.a * (1.0 - std::pow(v / p.v0, p.delta));
}

double equilibrium_gap(double v, const IdmParams& p) {
  if (v < 0.0 || v >= p.v0) {
    throw std::domain_error("idm::equilibrium_gap: requires 0 <= v < v0");
  }
  return (p.s0 + v * p.T) / std::sqrt(1.0 - std::pow(v / p.v0, p.delta));
}

}  // namespace mobilsim::idm
