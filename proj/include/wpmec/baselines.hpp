#pragma once

#include <span>
#include <string>

#include "wpmec/config.hpp"
#include "wpmec/env.hpp"
#include "wpmec/rng.hpp"
#include "wpmec/topology.hpp"

namespace wpmec {

// How the per-WD (low-level) choice is produced. The learned scheme and the
// forced rules share the whole remaining pipeline: the high-level agent,
// the feasible set, the closed-form fills, and the environment.
enum class Scheme { Tmado, Lc, Rec, Random, Greedy, Oracle };

Scheme scheme_from_string(const std::string& name);
const char* scheme_name(Scheme s);

// Inputs a forced rule may consult for one WD in one slot.
struct LowContext {
  int wd = 0;
  double bits = 0.0;
  double available = 0.0;  // energy budget after this slot's harvest
  double alpha = 0.0;
  std::span<const double> gains;  // this WD's row, one gain per HAP
  const Topology* topo = nullptr;
  const NetworkConfig* cfg = nullptr;
};

// Choices use the low-level action encoding: 0 = local, 1+m = HAP m,
// -1 = do not process.

// Local whenever the one-slot local plan is feasible, else drop.
int lc_choice(const LowContext& ctx);

// A uniformly random HAP among all of them; zones are ignored by
// definition, so this pairs with a topology whose zones are all open.
int rec_choice(const LowContext& ctx, Rng& rng);

// Uniform over local plus the in-zone HAPs.
int random_choice(const LowContext& ctx, Rng& rng);

// Local vs the best in-zone HAP by comparing WD spend plus the HAP-side
// processing cost; drop when neither plan is feasible.
int greedy_choice(const LowContext& ctx);

}  // namespace wpmec
