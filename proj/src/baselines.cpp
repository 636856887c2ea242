#include "wpmec/baselines.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

#include "wpmec/closed_form.hpp"

namespace wpmec {

Scheme scheme_from_string(const std::string& name) {
  if (name == "tmado") return Scheme::Tmado;
  if (name == "lc") return Scheme::Lc;
  if (name == "rec") return Scheme::Rec;
  if (name == "random") return Scheme::Random;
  if (name == "greedy") return Scheme::Greedy;
  if (name == "oracle") return Scheme::Oracle;
  throw std::invalid_argument("unknown policy: " + name);
}

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Tmado: return "tmado";
    case Scheme::Lc: return "lc";
    case Scheme::Rec: return "rec";
    case Scheme::Random: return "random";
    case Scheme::Greedy: return "greedy";
    case Scheme::Oracle: return "oracle";
  }
  return "unknown";
}

namespace {

constexpr double kEnergyTol = 1e-12;

bool local_feasible(const LowContext& ctx, const LocalPlan& plan) {
  return plan.freq_ok && plan.energy <= ctx.available + kEnergyTol;
}

}  // namespace

int lc_choice(const LowContext& ctx) {
  if (ctx.bits <= 0.0) return -1;
  const LocalPlan plan = lemma2_local(ctx.bits, *ctx.cfg);
  return local_feasible(ctx, plan) ? 0 : -1;
}

int rec_choice(const LowContext& ctx, Rng& rng) {
  if (ctx.bits <= 0.0) return -1;
  return 1 + static_cast<int>(rng.uniform_int(
                 static_cast<std::uint32_t>(ctx.cfg->m_haps)));
}

int random_choice(const LowContext& ctx, Rng& rng) {
  if (ctx.bits <= 0.0) return -1;
  std::vector<int> pool;
  pool.push_back(0);
  for (int m = 0; m < ctx.cfg->m_haps; ++m)
    if (ctx.topo->in_zone(ctx.wd, m)) pool.push_back(1 + m);
  return pool[rng.uniform_int(static_cast<std::uint32_t>(pool.size()))];
}

int greedy_choice(const LowContext& ctx) {
  if (ctx.bits <= 0.0) return -1;
  const NetworkConfig& cfg = *ctx.cfg;
  double local_cost = std::numeric_limits<double>::infinity();
  const LocalPlan lp = lemma2_local(ctx.bits, cfg);
  if (local_feasible(ctx, lp)) local_cost = lp.energy;

  double edge_cost = std::numeric_limits<double>::infinity();
  int edge_hap = -1;
  for (int m = 0; m < cfg.m_haps; ++m) {
    if (!ctx.topo->in_zone(ctx.wd, m)) continue;
    const OffloadPlan op = lemma3_offload(ctx.bits, ctx.gains[m], cfg);
    if (op.tau > cfg.slot_duration - ctx.alpha) continue;
    if (op.energy > ctx.available + kEnergyTol) continue;
    const double cost = op.energy + cfg.hap_energy_per_bit * ctx.bits;
    if (cost < edge_cost) {
      edge_cost = cost;
      edge_hap = m;
    }
  }
  if (local_cost <= edge_cost && lp.freq_ok &&
      local_cost != std::numeric_limits<double>::infinity())
    return 0;
  if (edge_hap >= 0) return 1 + edge_hap;
  return -1;
}

}  // namespace wpmec
