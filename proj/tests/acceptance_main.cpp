// Acceptance gate: every release-blocking property on one pass/fail line.
// Exit code is the number of failed criteria. argv[1] (optional) is the CLI
// binary used for the rerun-determinism criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "oracle_crosscheck.hpp"
#include "wpmec/agents.hpp"
#include "wpmec/baselines.hpp"
#include "wpmec/closed_form.hpp"
#include "wpmec/config.hpp"
#include "wpmec/env.hpp"
#include "wpmec/harness.hpp"
#include "wpmec/nn.hpp"
#include "wpmec/oracle.hpp"
#include "wpmec/rng.hpp"
#include "wpmec/topology.hpp"

using namespace wpmec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmtg(double x, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

double mean_psi_of(const std::vector<EpisodeStats>& eps) {
  double s = 0.0;
  for (const EpisodeStats& e : eps) s += e.mean_psi;
  return s / static_cast<double>(eps.size());
}

bool nets_equal(const Mlp& a, const Mlp& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i)
    if (a.layers[i].w != b.layers[i].w || a.layers[i].b != b.layers[i].b)
      return false;
  return true;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return "<unreadable:" + p.string() + ">";
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1. The reward offset computed from the reference parameter table.
Outcome criterion_offset() {
  const double u = compute_u(table2_config());
  return {u == 3.65, "compute_u = " + fmtg(u, 17)};
}

// 2. Local-compute plans against a dense airtime search.
Outcome criterion_local_optimizer() {
  Rng rng(4101, 0);
  double worst = 0.0;
  int infeasible = 0;
  for (int draw = 0; draw < 100; ++draw) {
    NetworkConfig c = table2_config();
    c.slot_duration = rng.uniform(0.1, 0.5);
    c.cpu_energy_coeff = 1e-27 * std::pow(10.0, rng.uniform(-1.0, 1.0));
    c.cycles_per_bit = rng.uniform(500.0, 3000.0);
    c.cpu_freq_max = rng.uniform(1e7, 3e8);
    const double bits = rng.uniform(1e3, 1e5);
    const LocalPlan lp = lemma2_local(bits, c);

    const int pts = 20000;
    double best = 0.0;
    bool any = false;
    for (int i = 1; i <= pts; ++i) {
      const double tau = c.slot_duration * i / pts;
      const double f = c.cycles_per_bit * bits / tau;
      if (f > c.cpu_freq_max) continue;
      const double e = c.cpu_energy_coeff * f * f * c.cycles_per_bit * bits;
      best = any ? std::min(best, e) : e;
      any = true;
    }
    if (lp.freq_ok != any)
      return {false, "feasibility disagrees with the dense search on draw " +
                         std::to_string(draw)};
    if (!any) {
      ++infeasible;
      continue;
    }
    worst = std::max(worst,
                     std::abs(lp.energy - best) / std::max(best, 1e-300));
  }
  return {worst <= 1e-9, "100 draws (" + std::to_string(infeasible) +
                             " infeasible), worst rel err " + fmtg(worst, 3)};
}

// 3. Offload plans: the airtime is rate-tight and minimal.
Outcome criterion_offload_optimizer() {
  Rng rng(4102, 0);
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    NetworkConfig c = table2_config();
    c.bandwidth = rng.uniform(5e5, 5e6);
    c.wd_tx_power = rng.uniform(0.01, 0.5);
    c.noise_power = 1e-9 * std::pow(10.0, rng.uniform(-1.0, 1.0));
    c.data_overhead = rng.uniform(1.0, 1.3);
    c.wd_circuit_power = rng.uniform(1e-4, 1e-2);
    const double bits = rng.uniform(1e3, 1e5);
    const double gain = std::pow(10.0, rng.uniform(-6.0, -2.0));
    const OffloadPlan op = lemma3_offload(bits, gain, c);

    const double rate =
        c.bandwidth * std::log2(1.0 + c.wd_tx_power * gain / c.noise_power);
    const double target = c.data_overhead * bits;
    const double rel = std::abs(rate * op.tau - target) / target;
    worst = std::max(worst, rel);
    if (rel > 1e-9)
      return {false, "rate-tightness off by " + fmtg(rel, 3)};
    if (!(rate * (op.tau - 1e-6) < target))
      return {false, "a shorter airtime still covered the payload on draw " +
                         std::to_string(draw)};
    const double energy = (c.wd_tx_power + c.wd_circuit_power) * op.tau;
    if (std::abs(op.energy - energy) > 1e-12 * energy)
      return {false, "transmit energy mismatch on draw " +
                         std::to_string(draw)};
  }
  return {true, "100 draws, worst rate-tightness rel err " + fmtg(worst, 3)};
}

// 4. The exact solver against an independent dense-grid reference.
Outcome criterion_solver_vs_grid() {
  const std::vector<std::pair<int, int>> combos = {
      {1, 1}, {2, 1}, {2, 2}, {3, 1}, {3, 2}};
  double worst = 0.0;
  int feasible = 0, idx = 0;
  for (const auto& [n, m] : combos)
    for (int s = 0; s < 4; ++s, ++idx) {
      NetworkConfig c = tiny_config();
      c.n_wds = n;
      c.m_haps = m;
      const Topology topo =
          generate_topology(c, RngFamily{static_cast<std::uint64_t>(7000 + idx)});
      const SlotInstance inst = testref::random_instance(c, topo, 7100 + idx);
      const OracleSolution sol = solve_slot(inst);
      const testref::RefSolution ref = testref::brute_force_slot(inst);
      if (sol.feasible != ref.feasible)
        return {false, "feasibility disagrees on instance " +
                           std::to_string(idx)};
      if (!sol.feasible) continue;
      ++feasible;
      const double rel = std::abs(sol.psi - ref.psi) /
                         std::max({ref.psi, sol.psi, 1e-9});
      worst = std::max(worst, rel);
      if (rel > 1e-3)
        return {false, "instance " + std::to_string(idx) + " rel diff " +
                           fmtg(rel, 3)};
    }
  return {feasible >= 8, "20 instances (" + std::to_string(feasible) +
                             " feasible), worst rel diff " + fmtg(worst, 3)};
}

// 5. The enumeration branch cut never changes the result.
Outcome criterion_branch_cut() {
  const NetworkConfig c = tiny_config();
  const Topology topo = generate_topology(c, RngFamily{7200});
  int feasible = 0;
  for (int s = 0; s < 50; ++s) {
    const SlotInstance inst = testref::random_instance(c, topo, 7300 + s);
    const OracleSolution pruned = solve_slot(inst, true);
    const OracleSolution full = solve_slot(inst, false);
    if (pruned.feasible != full.feasible)
      return {false, "feasibility differs on instance " + std::to_string(s)};
    if (pruned.feasible) {
      ++feasible;
      if (pruned.psi != full.psi)
        return {false, "optimum differs on instance " + std::to_string(s)};
    }
  }
  return {true, "50 instances (" + std::to_string(feasible) +
                    " feasible), optima identical"};
}

// 6. Random rollouts never violate energy or admission invariants.
Outcome criterion_env_invariants() {
  const NetworkConfig c = desk_config();
  const int n_wds = c.n_wds, m_haps = c.m_haps;
  Env env(c, 90001);
  const Topology& topo = env.topology();
  Rng rng(90002, 0);
  const double tol = 1e-12;
  long long steps = 0, violations = 0;

  for (int episode = 0; steps < 100000; ++episode) {
    env.reset(episode);
    for (int t = 0; t < c.slots_per_episode && steps < 100000; ++t) {
      const SlotState s = env.state();
      SlotDecision d;
      d.alpha = rng.uniform(0.0, c.slot_duration);
      d.hap_power.resize(m_haps);
      for (int m = 0; m < m_haps; ++m)
        d.hap_power[m] = rng.uniform(0.0, c.hap_power_max);
      d.wd.resize(n_wds);
      for (int n = 0; n < n_wds; ++n) {
        if (s.bits[n] <= 0.0) continue;
        const std::uint32_t pick = rng.uniform_int(3);
        if (pick == 1) {
          const LocalPlan lp = lemma2_local(s.bits[n], c);
          double freq = lp.freq;
          if (rng.uniform01() < 0.3) freq *= rng.uniform(0.8, 1.6);
          if (freq > 0.0)
            d.wd[n] = WdAssign{Mode::Local, -1, c.slot_duration, freq};
        } else if (pick == 2) {
          std::vector<int> open;
          for (int m = 0; m < m_haps; ++m)
            if (topo.zone[n * m_haps + m] && s.gains[n * m_haps + m] > 0.0)
              open.push_back(m);
          if (!open.empty()) {
            const int m =
                open[rng.uniform_int(static_cast<std::uint32_t>(open.size()))];
            const OffloadPlan op =
                lemma3_offload(s.bits[n], s.gains[n * m_haps + m], c);
            double tau = op.tau;
            if (rng.uniform01() < 0.3) tau *= rng.uniform(0.5, 2.5);
            d.wd[n] = WdAssign{Mode::Edge, m, tau, 0.0};
          }
        }
      }

      const SlotOutcome out = env.step(d);
      ++steps;

      for (int n = 0; n < n_wds; ++n) {
        const std::span<const double> row(s.gains.data() + n * m_haps, m_haps);
        const double avail = available_energy(
            s.battery[n],
            harvested_energy(d.hap_power, row, d.alpha, c.eh_efficiency),
            c.battery_capacity);
        if (out.available[n] != avail) ++violations;
        const double next = std::max(avail - out.wd_energy[n], 0.0);
        if (out.next.battery[n] != next) ++violations;
        if (!(out.next.battery[n] >= 0.0 &&
              out.next.battery[n] <= c.battery_capacity))
          ++violations;

        switch (out.mode[n]) {
          case Mode::Dropped:
            if (out.wd_energy[n] != 0.0 || out.hap[n] != -1) ++violations;
            break;
          case Mode::Local: {
            const double freq = d.wd[n].freq;
            if (!(freq > 0.0 && freq <= c.cpu_freq_max)) ++violations;
            if (c.cycles_per_bit * s.bits[n] / freq > c.slot_duration + tol)
              ++violations;
            if (out.wd_energy[n] > avail + tol) ++violations;
            break;
          }
          case Mode::Edge: {
            const int m = out.hap[n];
            if (m != d.wd[n].hap || !topo.zone[n * m_haps + m]) ++violations;
            if (out.wd_energy[n] > avail + tol) ++violations;
            break;
          }
        }
      }

      double psi = 0.0;
      for (int m = 0; m < m_haps; ++m) {
        if (out.e1[m] != d.alpha * d.hap_power[m]) ++violations;
        if (out.next.cum_hap_energy[m] !=
            s.cum_hap_energy[m] + out.e1[m] + out.e2[m])
          ++violations;
        std::vector<std::pair<double, int>> taus;
        for (int n = 0; n < n_wds; ++n)
          if (out.mode[n] == Mode::Edge && out.hap[n] == m)
            taus.emplace_back(d.wd[n].tau, n);
        std::sort(taus.begin(), taus.end());
        double used = 0.0;
        for (const auto& [tau, n] : taus) used += tau;
        if (d.alpha + used > c.slot_duration + tol) ++violations;
        psi += out.e1[m] + out.e2[m];
      }
      if (out.psi != psi) ++violations;

      SlotDecision repaired = d;
      for (int n = 0; n < n_wds; ++n)
        if (out.mode[n] == Mode::Dropped) repaired.wd[n] = WdAssign{};
      for (const Violation& v : validate_decision(s, repaired, c, topo))
        if (v.which != Constraint::Demand) ++violations;
    }
  }
  return {violations == 0, std::to_string(steps) + " steps, " +
                               std::to_string(violations) + " violations"};
}

// 7. Analytic gradients against central differences for every head.
Outcome criterion_gradients() {
  const auto arch_worst = [](Head head, bool masked, std::uint64_t seed) {
    Rng rng(seed, 0);
    Mlp net = make_mlp(4, {8, 8}, 3, head, rng);
    if (head == Head::TanhBox)
      set_tanh_bounds(net, {-1.0, -2.0, 0.0}, {1.0, 3.0, 0.5});
    const std::vector<double> x = {0.3, -0.7, 1.2, 0.05};
    const std::vector<std::uint8_t> allowed = {1, 0, 1};
    const std::vector<double> coeff = {0.7, -1.3, 0.4};

    const auto loss = [&]() {
      const std::vector<double> y =
          masked ? forward_masked(net, x, allowed) : forward(net, x);
      double l = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) l += coeff[i] * y[i];
      return l;
    };

    Tape tape;
    if (masked)
      (void)forward_masked(net, x, allowed, &tape);
    else
      (void)forward(net, x, &tape);
    Grads grads = make_grads(net);
    backward(net, tape, coeff, grads);

    double worst = 0.0;
    const auto probe = [&](std::vector<double>& ws,
                           const std::vector<double>& gs) {
      for (std::size_t i = 0; i < ws.size(); ++i) {
        const double keep = ws[i];
        const double h = 1e-6 * std::max(1.0, std::abs(keep));
        ws[i] = keep + h;
        const double up = loss();
        ws[i] = keep - h;
        const double dn = loss();
        ws[i] = keep;
        const double num = (up - dn) / (2.0 * h);
        const double rel = std::abs(gs[i] - num) /
                           std::max({1e-12, std::abs(gs[i]), std::abs(num)});
        worst = std::max(worst, rel);
      }
    };
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
      probe(net.layers[li].w, grads.g[li].w);
      probe(net.layers[li].b, grads.g[li].b);
    }
    return worst;
  };

  double worst = 0.0;
  worst = std::max(worst, arch_worst(Head::Linear, false, 7601));
  worst = std::max(worst, arch_worst(Head::TanhBox, false, 7602));
  worst = std::max(worst, arch_worst(Head::Softmax, false, 7603));
  worst = std::max(worst, arch_worst(Head::Softmax, true, 7604));
  return {worst < 1e-4, "4 heads, worst rel err " + fmtg(worst, 3)};
}

// 8. Update-rule identities: soft target mixing, the clipped-ratio freeze,
// and the worked advantage constant.
Outcome criterion_update_rules() {
  Rng ra(83, 0), rb(84, 0);
  Mlp target = make_mlp(5, {7, 6}, 4, Head::Linear, ra);
  const Mlp src = make_mlp(5, {7, 6}, 4, Head::Linear, rb);
  Mlp expect = target;
  const double mix = 1e-4;
  for (std::size_t li = 0; li < expect.layers.size(); ++li) {
    for (std::size_t i = 0; i < expect.layers[li].w.size(); ++i)
      expect.layers[li].w[i] =
          mix * src.layers[li].w[i] + (1.0 - mix) * target.layers[li].w[i];
    for (std::size_t i = 0; i < expect.layers[li].b.size(); ++i)
      expect.layers[li].b[i] =
          mix * src.layers[li].b[i] + (1.0 - mix) * target.layers[li].b[i];
  }
  soft_update(target, src, mix);
  if (!nets_equal(target, expect)) return {false, "soft update not exact"};
  soft_update(target, src, 1.0);
  if (!nets_equal(target, src)) return {false, "full mix is not a copy"};

  NetworkConfig c = desk_config();
  c.n_wds = 3;
  c.m_haps = 2;
  c.hidden_sizes = {12, 12};
  std::vector<double> obs(static_cast<std::size_t>(low_obs_size(c)));
  Rng obs_rng(85, 0);
  for (double& v : obs) v = obs_rng.uniform(-1.0, 1.0);
  const std::vector<std::uint8_t> allowed = {1, 1, 1};

  const auto run_case = [&](double shift, double sign) {
    LowAgent agent(c, RngFamily{81}, 0);
    const std::vector<double> p = forward_masked(agent.policy(), obs, allowed);
    const double v = forward(agent.value(), obs)[0];
    const Mlp policy_before = agent.policy();
    const Mlp value_before = agent.value();
    agent.remember(obs, allowed, 0, std::log(std::max(p[0], 1e-300)) + shift,
                   sign * (std::abs(v) + 100.0));
    agent.close_transition({}, true);
    agent.update(c);
    return std::pair<bool, bool>{nets_equal(policy_before, agent.policy()),
                                 !nets_equal(value_before, agent.value())};
  };

  const auto [frozen_hi, moved_hi] = run_case(-0.5, 1.0);
  if (!frozen_hi)
    return {false, "policy moved though the lifted ratio was clipped"};
  const auto [frozen_lo, moved_lo] = run_case(0.5, -1.0);
  if (!frozen_lo)
    return {false, "policy moved though the lowered ratio was clipped"};
  const auto [frozen_active, moved_active] = run_case(-0.5, -1.0);
  if (frozen_active || !moved_hi || !moved_lo || !moved_active)
    return {false, "update lacks power outside the clipped region"};

  if (!(1.0 + 0.99 * 2.0 - 2.5 == 0.48))
    return {false, "worked advantage constant is off"};
  return {true, "soft update exact; clipped ratios freeze the policy; "
                "advantage constant exact"};
}

// 9. Trained-policy trends on the desk preset across five seeds.
Outcome criterion_trends() {
  const NetworkConfig desk = desk_config();
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  double sum_tmado = 0.0, sum_lc = 0.0, sum_rec = 0.0;
  std::vector<std::string> lc_ckpts;
  std::vector<double> lc_psi;
  for (const std::uint64_t seed : seeds) {
    Trainer tmado(desk, seed, Scheme::Tmado);
    tmado.train(desk.episodes);
    sum_tmado += mean_psi_of(tmado.evaluate(5, 1000000));

    Trainer lc(desk, seed, Scheme::Lc);
    lc.train(desk.episodes);
    const double psi = mean_psi_of(lc.evaluate(5, 1000000));
    sum_lc += psi;
    lc_psi.push_back(psi);
    lc_ckpts.push_back(lc.checkpoint_json());

    Trainer rec(desk, seed, Scheme::Rec);
    rec.train(desk.episodes);
    sum_rec += mean_psi_of(rec.evaluate(5, 1000000));
  }
  const double n = static_cast<double>(seeds.size());
  const double mean_tmado = sum_tmado / n;
  const double mean_lc = sum_lc / n;
  const double mean_rec = sum_rec / n;
  const bool trend_a =
      mean_tmado <= 0.95 * mean_lc && mean_tmado <= 0.95 * mean_rec;

  SweepArgs demand;
  demand.cfg = desk;
  demand.policy = "oracle";
  demand.param = "data_demand";
  demand.values = {2e4, 5e4};
  demand.seeds = seeds;
  demand.train_episodes = 0;
  demand.eval_episodes = 5;
  demand.threads = 1;
  const std::vector<SweepRow> drows = run_sweep(demand);
  std::vector<double> dmean(demand.values.size(), 0.0);
  for (std::size_t v = 0; v < demand.values.size(); ++v) {
    for (std::size_t s = 0; s < seeds.size(); ++s)
      dmean[v] += drows[v * seeds.size() + s].mean_psi;
    dmean[v] /= n;
  }
  const bool trend_b = dmean[0] <= dmean[1] * (1.0 + 1e-12);

  SweepArgs devices = demand;
  devices.cfg.data_demand = 3e4;
  devices.param = "n_wds";
  devices.values = {4, 6, 8};
  const std::vector<SweepRow> nrows = run_sweep(devices);
  std::vector<double> nmean(devices.values.size(), 0.0);
  for (std::size_t v = 0; v < devices.values.size(); ++v) {
    for (std::size_t s = 0; s < seeds.size(); ++s)
      nmean[v] += nrows[v * seeds.size() + s].mean_psi;
    nmean[v] /= n;
  }
  const bool trend_c = nmean[0] >= nmean[1] * (1.0 - 1e-12) &&
                       nmean[1] >= nmean[2] * (1.0 - 1e-12);

  bool trend_d = true;
  for (std::size_t i = 0; i < seeds.size(); ++i)
    for (const double bw : {1.25e6, 2.5e6, 5e6}) {
      NetworkConfig c = desk;
      c.bandwidth = bw;
      Trainer lc(c, seeds[i], Scheme::Lc);
      lc.load_checkpoint_json(lc_ckpts[i]);
      if (mean_psi_of(lc.evaluate(5, 1000000)) != lc_psi[i]) trend_d = false;
    }

  const bool pass = trend_a && trend_b && trend_c && trend_d;
  std::string detail = "a: " + fmtg(mean_tmado) + " vs lc " + fmtg(mean_lc) +
                       " / rec " + fmtg(mean_rec) +
                       (trend_a ? "" : " [a FAILED]");
  detail += "; b: " + fmtg(dmean[0]) + " <= " + fmtg(dmean[1]) +
            (trend_b ? "" : " [b FAILED]");
  detail += "; c: " + fmtg(nmean[0]) + " >= " + fmtg(nmean[1]) +
            " >= " + fmtg(nmean[2]) + (trend_c ? "" : " [c FAILED]");
  detail += std::string("; d: ") +
            (trend_d ? "exact across bandwidths" : "[d FAILED]");
  return {pass, detail};
}

// 10. Learned-policy suboptimality against the exact solver.
Outcome criterion_oracle_gap() {
  const NetworkConfig tiny = tiny_config();
  const std::vector<std::uint64_t> seeds = {1, 2, 3};
  double sum_gap = 0.0;
  std::string per_seed;
  for (const std::uint64_t seed : seeds) {
    Trainer trainer(tiny, seed, Scheme::Tmado);
    trainer.train(tiny.episodes);
    trainer.compute_oracle_gap = true;
    std::vector<SlotTrace> trace;
    trainer.evaluate(5, 1000000, &trace);
    std::vector<double> policy, oracle;
    for (const SlotTrace& row : trace) {
      if (!row.oracle_feasible || row.oracle_psi <= 1e-6) continue;
      policy.push_back(row.psi);
      oracle.push_back(row.oracle_psi);
    }
    const GapStats g = oracle_gap(policy, oracle);
    sum_gap += g.mean;
    per_seed += (per_seed.empty() ? "" : "/") + fmtg(g.mean, 3);
  }
  const double mean_gap = sum_gap / static_cast<double>(seeds.size());
  return {mean_gap <= 0.25, "mean gap " + fmtg(mean_gap, 3) + " (seeds " +
                                per_seed + "), cap 0.25"};
}

// 11. Rerunning any command with the same seed is byte-identical.
Outcome criterion_reruns(const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / "wpmec-acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  if (!cli.empty()) {
    const std::string log = (dir / "cli.log").string();
    const auto sh = [&](const std::string& cmd) {
      return std::system((cmd + " >> " + log + " 2>&1").c_str()) == 0;
    };
    const auto pair_equal = [&](const fs::path& a, const fs::path& b) {
      return slurp(a) == slurp(b);
    };

    for (const char* run : {"1", "2"}) {
      const std::string d = (dir / (std::string("t") + run)).string();
      if (!sh(cli + " train --config tiny --policy tmado --seed 9 "
                    "--episodes 2 --out " + d))
        return {false, "train command failed (see " + log + ")"};
      if (!sh(cli + " eval --config tiny --policy greedy --seed 9 "
                    "--episodes 2 --out " + d + "/eval.csv --trace-out " + d +
              "/trace.csv"))
        return {false, "eval command failed (see " + log + ")"};
      if (!sh(cli + " sweep --config tiny --policy lc --param bandwidth "
                    "--values 1e6,2e6 --seeds 4,5 --episodes 0 "
                    "--eval-episodes 2 --threads 1 --out " + d + "/sweep.csv"))
        return {false, "sweep command failed (see " + log + ")"};
      if (!sh(cli + " oracle --config tiny --seed 9 --instances 4 "
                    "--policy greedy --out " + d + "/oracle.csv"))
        return {false, "oracle command failed (see " + log + ")"};
    }
    for (const char* f : {"metrics.csv", "checkpoint.json", "eval.csv",
                          "trace.csv", "sweep.csv", "oracle.csv"})
      if (!pair_equal(dir / "t1" / f, dir / "t2" / f))
        return {false, std::string("rerun differs: ") + f};
    return {true, "train/eval/sweep/oracle reruns byte-identical (CLI)"};
  }

  // Library-level fallback when no CLI path was provided.
  NetworkConfig tiny = tiny_config();
  TrainArgs ta;
  ta.cfg = tiny;
  ta.policy = "tmado";
  ta.seed = 9;
  ta.episodes = 2;
  std::vector<std::string> metrics, checkpoints;
  for (const char* run : {"1", "2"}) {
    ta.out_dir = (dir / (std::string("lib") + run)).string();
    const TrainResult r = run_train(ta);
    metrics.push_back(slurp(r.metrics_path));
    checkpoints.push_back(slurp(r.checkpoint_path));
  }
  if (metrics[0] != metrics[1] || checkpoints[0] != checkpoints[1])
    return {false, "library rerun differs"};
  return {true, "library reruns byte-identical (no CLI path given)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";

  struct Criterion {
    const char* name;
    double budget_s;  // 0 = no budget pinned
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"01 reward-offset constant", 1, criterion_offset},
      {"02 local-compute optimizer", 5, criterion_local_optimizer},
      {"03 offload optimizer", 5, criterion_offload_optimizer},
      {"04 exact solver vs dense grid", 120, criterion_solver_vs_grid},
      {"05 pruned vs unpruned solver", 120, criterion_branch_cut},
      {"06 environment invariants", 60, criterion_env_invariants},
      {"07 gradient checks", 60, criterion_gradients},
      {"08 update-rule identities", 10, criterion_update_rules},
      {"09 trained-policy trends", 1800, criterion_trends},
      {"10 oracle gap after training", 600, criterion_oracle_gap},
      {"11 byte-identical reruns", 0, [&cli] { return criterion_reruns(cli); }},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    bool pass = o.pass;
    std::string detail = o.detail;
    if (c.budget_s > 0 && secs > c.budget_s) {
      pass = false;
      detail += " [over " + fmtg(c.budget_s, 3) + "s budget]";
    }
    std::printf("%s  %-30s %s  [%.1fs]\n", pass ? "PASS" : "FAIL", c.name,
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures;
}
