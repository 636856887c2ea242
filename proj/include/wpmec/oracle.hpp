#pragma once

#include <span>

#include "wpmec/closed_form.hpp"
#include "wpmec/config.hpp"
#include "wpmec/env.hpp"

namespace wpmec {

// A frozen single-slot problem: minimize the HAPs' energy provision over
// WPT power/duration and per-WD assignments, subject to the slot's demand,
// time, energy, and frequency constraints.
struct SlotInstance {
  SlotState state;
  NetworkConfig cfg;
  Topology topo;
};

struct OracleSolution {
  bool feasible = false;
  double psi = 0.0;
  SlotDecision decision;  // all-dropped zeros when infeasible
  long long assignments_examined = 0;
};

// Exact solver by exhaustive assignment enumeration with the per-assignment
// minimal-WPT covering program. Enumeration budget: n_wds <= 8, m_haps <= 3.
// prune=false disables the provably-safe cut (a WD whose local plan runs on
// battery alone never offloads in an optimum) for cross-checking.
OracleSolution solve_slot(const SlotInstance& inst, bool prune = true);

struct GapStats {
  double mean = 0.0;
  double max = 0.0;
  int count = 0;
};

// Relative suboptimality of a policy against oracle optima, elementwise
// (psi_policy - psi_oracle) / max(psi_oracle, 1e-9).
GapStats oracle_gap(std::span<const double> policy_psi,
                    std::span<const double> oracle_psi);

}  // namespace wpmec
