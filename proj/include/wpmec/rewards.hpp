#pragma once

#include "wpmec/config.hpp"
#include "wpmec/env.hpp"

namespace wpmec {

// High-level reward: negative total provision, minus a flat penalty when
// the slot's demand is missed.
inline double high_reward(double psi, bool demand_met, double omega_d) {
  return -psi - (demand_met ? 0.0 : omega_d);
}

// Low-level reward: offset u minus the cost-weighted energy the WD spent,
// plus the HAP-side processing cost when it offloaded. Zero when it did
// not process (u keeps processing rewards nonnegative, so processing is
// always preferred to dropping).
inline double low_reward(Mode mode, double spent, double bits, double ac,
                         double u, const NetworkConfig& cfg) {
  if (mode == Mode::Local) return u - ac * spent;
  if (mode == Mode::Edge)
    return u - (ac * spent + cfg.hap_energy_per_bit * bits);
  return 0.0;
}

}  // namespace wpmec
