#include "wpmec/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "wpmec/rewards.hpp"

namespace wpmec {

namespace {

constexpr double kTimeTol = 1e-12;
constexpr double kEnergyTol = 1e-12;

void check_shapes(const SlotState& state, const SlotDecision& decision,
                  const NetworkConfig& cfg, const Topology& topo) {
  const std::size_t n = static_cast<std::size_t>(cfg.n_wds);
  const std::size_t m = static_cast<std::size_t>(cfg.m_haps);
  if (topo.wd_pos.size() != n || topo.hap_pos.size() != m)
    throw std::invalid_argument("step: topology does not match config");
  if (state.gains.size() != n * m || state.bits.size() != n ||
      state.battery.size() != n || state.cum_hap_energy.size() != m)
    throw std::invalid_argument("step: state shape mismatch");
  if (decision.hap_power.size() != m || decision.wd.size() != n)
    throw std::invalid_argument("step: decision shape mismatch");
}

void check_malformed(const SlotDecision& decision, const NetworkConfig& cfg,
                     const Topology& topo) {
  if (!std::isfinite(decision.alpha) || decision.alpha < 0.0 ||
      decision.alpha > cfg.slot_duration)
    throw std::invalid_argument("step: alpha outside [0, T]");
  for (double p : decision.hap_power)
    if (!std::isfinite(p) || p < 0.0 || p > cfg.hap_power_max)
      throw std::invalid_argument("step: hap power outside [0, P_max]");
  for (int n = 0; n < cfg.n_wds; ++n) {
    const WdAssign& a = decision.wd[n];
    if (!std::isfinite(a.tau) || a.tau < 0.0 || !std::isfinite(a.freq) ||
        a.freq < 0.0)
      throw std::invalid_argument("step: negative or non-finite tau/freq");
    if (a.mode == Mode::Edge) {
      if (a.hap < 0 || a.hap >= cfg.m_haps)
        throw std::invalid_argument("step: edge target out of range");
      if (!topo.in_zone(n, a.hap))
        throw std::invalid_argument("step: edge target out of zone");
    }
  }
}

}  // namespace

const char* constraint_name(Constraint c) {
  switch (c) {
    case Constraint::Demand: return "demand";
    case Constraint::LocalDelay: return "local-delay";
    case Constraint::OffloadDuration: return "offload-duration";
    case Constraint::WptDuration: return "wpt-duration";
    case Constraint::HapTimeBudget: return "hap-time-budget";
    case Constraint::HapPower: return "hap-power";
    case Constraint::LocalEnergy: return "local-energy";
    case Constraint::OffloadEnergy: return "offload-energy";
    case Constraint::CpuFreq: return "cpu-freq";
    case Constraint::BatteryCap: return "battery-cap";
  }
  return "unknown";
}

double harvested_energy(std::span<const double> hap_power,
                        std::span<const double> gain_row, double alpha,
                        double eh_efficiency) {
  if (hap_power.size() != gain_row.size())
    throw std::invalid_argument("harvested_energy: size mismatch");
  double e = 0.0;
  for (std::size_t m = 0; m < hap_power.size(); ++m)
    e += eh_efficiency * hap_power[m] * gain_row[m] * alpha;
  return e;
}

double available_energy(double battery, double harvested, double capacity) {
  return std::min(battery + harvested, capacity);
}

std::vector<double> sample_data(const NetworkConfig& cfg,
                                std::span<Rng> wd_arrivals) {
  if (wd_arrivals.size() != static_cast<std::size_t>(cfg.n_wds))
    throw std::invalid_argument("sample_data: stream count mismatch");
  std::vector<double> bits(cfg.n_wds);
  for (int n = 0; n < cfg.n_wds; ++n)
    bits[n] = wd_arrivals[n].poisson(cfg.arrival_rate) * cfg.packet_bits;
  return bits;
}

SlotOutcome step(const SlotState& state, const SlotDecision& decision,
                 const NetworkConfig& cfg, const Topology& topo,
                 const RewardInputs* rewards) {
  check_shapes(state, decision, cfg, topo);
  check_malformed(decision, cfg, topo);
  const int N = cfg.n_wds;
  const int M = cfg.m_haps;

  SlotOutcome out;
  out.mode.assign(N, Mode::Dropped);
  out.hap.assign(N, -1);
  out.harvested.resize(N);
  out.available.resize(N);
  out.wd_energy.assign(N, 0.0);
  out.e1.resize(M);
  out.e2.assign(M, 0.0);
  out.low_rewards.assign(N, 0.0);

  for (int n = 0; n < N; ++n) {
    out.harvested[n] = harvested_energy(
        decision.hap_power,
        std::span<const double>(state.gains).subspan(
            static_cast<std::size_t>(n) * M, M),
        decision.alpha, cfg.eh_efficiency);
    out.available[n] =
        available_energy(state.battery[n], out.harvested[n],
                         cfg.battery_capacity);
  }

  // WDs with no data this slot never process nor spend.
  for (int n = 0; n < N; ++n)
    if (state.bits[n] > 0.0) out.mode[n] = decision.wd[n].mode;

  // Shortest airtime first maximizes the number of admitted offloaders
  // under the shared per-HAP time budget; ties break on WD index.
  for (int m = 0; m < M; ++m) {
    std::vector<std::pair<double, int>> queue;
    for (int n = 0; n < N; ++n)
      if (out.mode[n] == Mode::Edge && decision.wd[n].hap == m)
        queue.emplace_back(decision.wd[n].tau, n);
    std::sort(queue.begin(), queue.end());
    double used = 0.0;
    for (const auto& [tau, n] : queue) {
      if (decision.alpha + used + tau <= cfg.slot_duration + kTimeTol) {
        used += tau;
        out.hap[n] = m;
      } else {
        out.mode[n] = Mode::Dropped;
      }
    }
  }

  for (int n = 0; n < N; ++n) {
    if (out.mode[n] == Mode::Local) {
      const double f = decision.wd[n].freq;
      const double avail = out.available[n];
      if (!(f > 0.0) || f > cfg.cpu_freq_max) {
        out.mode[n] = Mode::Dropped;
        continue;
      }
      const double tau_l = cfg.cycles_per_bit * state.bits[n] / f;
      const double e_l = cfg.cpu_energy_coeff * f * f * cfg.cycles_per_bit *
                         state.bits[n];
      if (tau_l > cfg.slot_duration + kTimeTol || e_l > avail + kEnergyTol) {
        out.mode[n] = Mode::Dropped;
        continue;
      }
      out.wd_energy[n] = e_l;
    } else if (out.mode[n] == Mode::Edge) {
      const double e_o =
          (cfg.wd_tx_power + cfg.wd_circuit_power) * decision.wd[n].tau;
      if (e_o > out.available[n] + kEnergyTol) {
        out.mode[n] = Mode::Dropped;
        out.hap[n] = -1;
        continue;
      }
      out.wd_energy[n] = e_o;
    }
  }

  for (int m = 0; m < M; ++m) out.e1[m] = decision.alpha * decision.hap_power[m];
  for (int n = 0; n < N; ++n)
    if (out.mode[n] == Mode::Edge)
      out.e2[out.hap[n]] += cfg.hap_energy_per_bit * state.bits[n];
  out.psi = 0.0;
  for (int m = 0; m < M; ++m) out.psi += out.e1[m] + out.e2[m];

  for (int n = 0; n < N; ++n) {
    switch (out.mode[n]) {
      case Mode::Local: ++out.n_local; break;
      case Mode::Edge: ++out.n_edge; break;
      case Mode::Dropped: ++out.n_dropped; break;
    }
    if (out.mode[n] != Mode::Dropped) out.processed_bits += state.bits[n];
  }
  out.demand_met = out.processed_bits >= cfg.data_demand;

  if (rewards != nullptr) {
    if (rewards->ac.size() != static_cast<std::size_t>(N))
      throw std::invalid_argument("step: reward cost signal shape mismatch");
    out.high_reward = high_reward(out.psi, out.demand_met, rewards->omega_d);
    for (int n = 0; n < N; ++n)
      out.low_rewards[n] = low_reward(out.mode[n], out.wd_energy[n],
                                      state.bits[n], rewards->ac[n],
                                      rewards->u, cfg);
  }

  out.next.t = state.t + 1;
  out.next.battery.resize(N);
  for (int n = 0; n < N; ++n)
    out.next.battery[n] = std::max(out.available[n] - out.wd_energy[n], 0.0);
  out.next.cum_hap_energy.resize(M);
  for (int m = 0; m < M; ++m)
    out.next.cum_hap_energy[m] = state.cum_hap_energy[m] + out.e1[m] + out.e2[m];
  return out;
}

std::vector<Violation> validate_decision(const SlotState& state,
                                         const SlotDecision& decision,
                                         const NetworkConfig& cfg,
                                         const Topology& topo) {
  check_shapes(state, decision, cfg, topo);
  const int N = cfg.n_wds;
  const int M = cfg.m_haps;
  std::vector<Violation> out;

  if (decision.alpha < 0.0 || decision.alpha > cfg.slot_duration ||
      !std::isfinite(decision.alpha))
    out.push_back({Constraint::WptDuration, -1, -1});
  for (int m = 0; m < M; ++m) {
    const double p = decision.hap_power[m];
    if (p < 0.0 || p > cfg.hap_power_max || !std::isfinite(p))
      out.push_back({Constraint::HapPower, -1, m});
  }

  std::vector<double> avail(N);
  for (int n = 0; n < N; ++n) {
    const double e_h = harvested_energy(
        decision.hap_power,
        std::span<const double>(state.gains).subspan(
            static_cast<std::size_t>(n) * M, M),
        std::clamp(decision.alpha, 0.0, cfg.slot_duration), cfg.eh_efficiency);
    avail[n] = available_energy(state.battery[n], e_h, cfg.battery_capacity);
    if (state.battery[n] < 0.0 || state.battery[n] > cfg.battery_capacity)
      out.push_back({Constraint::BatteryCap, n, -1});
  }

  double declared_bits = 0.0;
  std::vector<double> hap_time(M, std::clamp(decision.alpha, 0.0, cfg.slot_duration));
  for (int n = 0; n < N; ++n) {
    const WdAssign& a = decision.wd[n];
    if (a.mode != Mode::Dropped) declared_bits += state.bits[n];
    if (a.mode == Mode::Local && state.bits[n] > 0.0) {
      if (!(a.freq > 0.0) || a.freq > cfg.cpu_freq_max)
        out.push_back({Constraint::CpuFreq, n, -1});
      if (a.freq > 0.0) {
        const double tau_l = cfg.cycles_per_bit * state.bits[n] / a.freq;
        if (tau_l > cfg.slot_duration + kTimeTol)
          out.push_back({Constraint::LocalDelay, n, -1});
        const double e_l = cfg.cpu_energy_coeff * a.freq * a.freq *
                           cfg.cycles_per_bit * state.bits[n];
        if (e_l > avail[n] + kEnergyTol)
          out.push_back({Constraint::LocalEnergy, n, -1});
      }
    } else if (a.mode == Mode::Edge) {
      if (a.tau < 0.0 || a.tau > cfg.slot_duration)
        out.push_back({Constraint::OffloadDuration, n, a.hap});
      const double e_o = (cfg.wd_tx_power + cfg.wd_circuit_power) * a.tau;
      if (e_o > avail[n] + kEnergyTol)
        out.push_back({Constraint::OffloadEnergy, n, a.hap});
      if (a.hap >= 0 && a.hap < M) hap_time[a.hap] += a.tau;
    }
  }
  if (declared_bits < cfg.data_demand)
    out.push_back({Constraint::Demand, -1, -1});
  for (int m = 0; m < M; ++m)
    if (hap_time[m] > cfg.slot_duration + kTimeTol)
      out.push_back({Constraint::HapTimeBudget, -1, m});
  return out;
}

Env::Env(NetworkConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  require_valid(cfg_);
  fam_ = RngFamily{seed};
  topo_ = generate_topology(cfg_, fam_);
  sigma_large_ = large_scale_matrix(cfg_, topo_);
  reset(0);
}

Env::Env(NetworkConfig cfg, Topology topo, std::uint64_t seed)
    : cfg_(std::move(cfg)) {
  require_valid(cfg_);
  if (topo.n_wds() != cfg_.n_wds || topo.m_haps() != cfg_.m_haps)
    throw std::invalid_argument("Env: topology does not match config");
  fam_ = RngFamily{seed};
  topo_ = std::move(topo);
  sigma_large_ = large_scale_matrix(cfg_, topo_);
  reset(0);
}

void Env::fill_slot(SlotState& s) const {
  // One stream per (WD, episode, slot): evaluation order cannot matter and
  // neither can the presence of other WDs.
  const std::uint64_t key =
      (static_cast<std::uint64_t>(episode_) << 20) +
      static_cast<std::uint64_t>(s.t);
  std::vector<Rng> fading;
  std::vector<Rng> arrivals;
  fading.reserve(cfg_.n_wds);
  arrivals.reserve(cfg_.n_wds);
  for (int n = 0; n < cfg_.n_wds; ++n) {
    fading.push_back(fam_.stream("fading", static_cast<std::uint64_t>(n), key));
    arrivals.push_back(
        fam_.stream("arrivals", static_cast<std::uint64_t>(n), key));
  }
  s.gains = sample_channels(topo_, cfg_, sigma_large_, fading);
  s.bits = sample_data(cfg_, arrivals);
}

const SlotState& Env::reset(int episode) {
  episode_ = episode;
  state_.t = 0;
  state_.battery.assign(cfg_.n_wds, 0.0);
  state_.cum_hap_energy.assign(cfg_.m_haps, 0.0);
  fill_slot(state_);
  return state_;
}

SlotOutcome Env::step(const SlotDecision& decision,
                      const RewardInputs* rewards) {
  SlotOutcome out = wpmec::step(state_, decision, cfg_, topo_, rewards);
  state_ = out.next;
  // The terminal state still gets draws: the high-level critic bootstraps
  // from it unconditionally.
  fill_slot(state_);
  out.next = state_;
  return out;
}

}  // namespace wpmec
