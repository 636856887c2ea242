#include "wpmec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wpmec {

namespace {

struct WdOption {
  Mode mode = Mode::Dropped;
  int hap = -1;
  double tau = 0.0;
  double freq = 0.0;
  double need = 0.0;    // WPT energy the covering program must deliver
  double energy = 0.0;  // full E_l or E_o for the plan
};

}  // namespace

OracleSolution solve_slot(const SlotInstance& inst, bool prune) {
  const NetworkConfig& cfg = inst.cfg;
  const int N = cfg.n_wds;
  const int M = cfg.m_haps;
  if (N > 8 || M > 3)
    throw std::invalid_argument(
        "solve_slot: instance exceeds the enumeration budget (n_wds <= 8, "
        "m_haps <= 3); use a heuristic policy instead");
  const SlotState& st = inst.state;
  if (st.gains.size() != static_cast<std::size_t>(N) * M ||
      st.bits.size() != static_cast<std::size_t>(N) ||
      st.battery.size() != static_cast<std::size_t>(N))
    throw std::invalid_argument("solve_slot: state shape mismatch");

  // Per-WD candidate plans. Plans that no amount of WPT could afford
  // (energy above the battery cap) or that cannot fit a slot are left out.
  std::vector<std::vector<WdOption>> options(N);
  for (int n = 0; n < N; ++n) {
    options[n].push_back(WdOption{});
    const double bits = st.bits[n];
    if (bits <= 0.0) continue;
    bool local_on_battery = false;
    const LocalPlan lp = lemma2_local(bits, cfg);
    if (lp.freq_ok && lp.energy <= cfg.battery_capacity) {
      WdOption o;
      o.mode = Mode::Local;
      o.freq = lp.freq;
      o.energy = lp.energy;
      o.need = std::max(0.0, lp.energy - st.battery[n]);
      local_on_battery = o.need == 0.0;
      options[n].push_back(o);
    }
    // A WD whose local plan is already paid for by its battery adds no
    // covering row and no processing cost as a local node; assigning it to
    // any HAP can only raise the optimum, so those branches are cut.
    if (prune && local_on_battery) continue;
    for (int m = 0; m < M; ++m) {
      if (!inst.topo.in_zone(n, m)) continue;
      const OffloadPlan op =
          lemma3_offload(bits, st.gains[static_cast<std::size_t>(n) * M + m],
                         cfg);
      if (op.tau > cfg.slot_duration) continue;
      if (op.energy > cfg.battery_capacity) continue;
      WdOption o;
      o.mode = Mode::Edge;
      o.hap = m;
      o.tau = op.tau;
      o.energy = op.energy;
      o.need = std::max(0.0, op.energy - st.battery[n]);
      options[n].push_back(o);
    }
  }

  OracleSolution best;
  best.decision.alpha = 0.0;
  best.decision.hap_power.assign(M, 0.0);
  best.decision.wd.assign(N, WdAssign{});
  double best_psi = std::numeric_limits<double>::infinity();

  std::vector<int> idx(N, 0);
  std::vector<const WdOption*> pick(N);
  std::vector<double> need;
  std::vector<double> gains;
  std::vector<double> hap_time(M);
  while (true) {
    for (int n = 0; n < N; ++n) pick[n] = &options[n][idx[n]];
    ++best.assignments_examined;

    double served = 0.0;
    double edge_cost = 0.0;
    std::fill(hap_time.begin(), hap_time.end(), 0.0);
    bool ok = true;
    for (int n = 0; n < N; ++n) {
      const WdOption& o = *pick[n];
      if (o.mode == Mode::Dropped) continue;
      served += st.bits[n];
      if (o.mode == Mode::Edge) {
        edge_cost += cfg.hap_energy_per_bit * st.bits[n];
        hap_time[o.hap] += o.tau;
        if (hap_time[o.hap] > cfg.slot_duration) ok = false;
      }
    }
    if (ok && served >= cfg.data_demand) {
      double alpha_ub = cfg.slot_duration;
      for (int m = 0; m < M; ++m)
        alpha_ub = std::min(alpha_ub, cfg.slot_duration - hap_time[m]);
      need.clear();
      gains.clear();
      for (int n = 0; n < N; ++n) {
        if (pick[n]->mode == Mode::Dropped || pick[n]->need <= 0.0) continue;
        need.push_back(pick[n]->need);
        for (int m = 0; m < M; ++m)
          gains.push_back(st.gains[static_cast<std::size_t>(n) * M + m]);
      }
      double psi = edge_cost;
      WptSolution wpt;
      if (need.empty()) {
        wpt.feasible = true;
        wpt.alpha = 0.0;
        wpt.hap_power.assign(M, 0.0);
      } else if (alpha_ub > 0.0) {
        WptRequirement req;
        req.need = need;
        req.gains = gains;
        req.alpha_ub = alpha_ub;
        wpt = min_wpt_energy(req, cfg);
        psi += wpt.total;
      } else {
        wpt.feasible = false;
      }
      if (wpt.feasible && psi < best_psi) {
        best_psi = psi;
        best.decision.alpha = wpt.alpha;
        best.decision.hap_power = wpt.hap_power;
        for (int n = 0; n < N; ++n) {
          const WdOption& o = *pick[n];
          best.decision.wd[n] =
              WdAssign{o.mode, o.hap, o.tau, o.freq};
        }
      }
    }

    int n = 0;
    while (n < N && ++idx[n] == static_cast<int>(options[n].size()))
      idx[n++] = 0;
    if (n == N) break;
  }

  if (std::isfinite(best_psi)) {
    best.feasible = true;
    best.psi = best_psi;
  }
  return best;
}

GapStats oracle_gap(std::span<const double> policy_psi,
                    std::span<const double> oracle_psi) {
  if (policy_psi.size() != oracle_psi.size() || policy_psi.empty())
    throw std::invalid_argument("oracle_gap: mismatched or empty inputs");
  GapStats g;
  g.count = static_cast<int>(policy_psi.size());
  g.max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < policy_psi.size(); ++i) {
    const double gap =
        (policy_psi[i] - oracle_psi[i]) / std::max(oracle_psi[i], 1e-9);
    g.mean += gap;
    g.max = std::max(g.max, gap);
  }
  g.mean /= g.count;
  return g;
}

}  // namespace wpmec
