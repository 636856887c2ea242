#pragma once

#include <vector>

#include "wpmec/config.hpp"

namespace wpmec {

// Local computing plan for one WD and one slot: stretching the computation
// over the whole slot minimizes k*f^3*tau subject to finishing in time, so
// tau = T and f = C*D/T. freq_ok is false when that frequency exceeds f_max,
// i.e. the data cannot be computed locally at all.
struct LocalPlan {
  double tau = 0.0;
  double freq = 0.0;
  double energy = 0.0;
  bool freq_ok = true;
};
LocalPlan lemma2_local(double bits, const NetworkConfig& cfg);

// Minimal offload airtime for one WD: the rate constraint is tight, so
// tau = v*D / (B*log2(1 + P_n*h/N_0)) and energy = (P_n + P_c)*tau.
struct OffloadPlan {
  double tau = 0.0;
  double energy = 0.0;
};
OffloadPlan lemma3_offload(double bits, double gain, const NetworkConfig& cfg);

// Upper bound u on any single WD's slot penalty: worst-case HAP transmit
// energy plus worst-case per-WD processing energy at the mean arrival size.
// mean_bits < 0 selects arrival_rate * packet_bits.
double compute_u(const NetworkConfig& cfg, double mean_bits = -1.0);

// Minimal-WPT-energy covering program. Decision variables q_m = alpha*P_h_m
// (joules radiated by HAP m); constraints mu * sum_m q_m h_{n,m} >= need_n
// for every active WD and 0 <= q_m <= alpha_ub * P_max. alpha is pinned at
// alpha_ub: the box is largest there and the objective depends on q only.
struct WptRequirement {
  std::vector<double> need;   // per active WD, joules, each > 0
  std::vector<double> gains;  // active x m_haps, row-major
  double alpha_ub = 0.0;      // seconds of WPT window available
};
struct WptSolution {
  bool feasible = false;
  double alpha = 0.0;
  std::vector<double> hap_power;  // P_h_m = q_m / alpha (0 when alpha == 0)
  std::vector<double> q;          // joules per HAP
  double total = 0.0;             // sum of q
};
// Exact vertex enumeration; m_haps <= 8.
WptSolution min_wpt_energy(const WptRequirement& req, const NetworkConfig& cfg);
// Scan cross check (m_haps <= 3): the last coordinate is closed-form and each
// outer coordinate runs a refining 1-D grid over its convex partial
// minimization. Agrees with the vertex solution within ~1e-7 relative on
// feasible instances.
WptSolution min_wpt_energy_grid(const WptRequirement& req,
                                const NetworkConfig& cfg, int rounds = 40,
                                int pts = 17);

}  // namespace wpmec
