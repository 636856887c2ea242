#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wpmec/channel.hpp"
#include "wpmec/config.hpp"
#include "wpmec/rng.hpp"
#include "wpmec/topology.hpp"

namespace wpmec {

enum class Mode { Dropped, Local, Edge };

// One WD's slice of a slot decision. tau is the declared offload airtime
// (edge only), freq the CPU frequency (local only); the unused field is 0.
struct WdAssign {
  Mode mode = Mode::Dropped;
  int hap = -1;
  double tau = 0.0;
  double freq = 0.0;
};

struct SlotDecision {
  double alpha = 0.0;
  std::vector<double> hap_power;  // per HAP, watts during the WPT phase
  std::vector<WdAssign> wd;
};

// Snapshot at the start of a slot. gains is n_wds x m_haps row-major;
// cum_hap_energy accumulates each HAP's provision within the episode.
struct SlotState {
  int t = 0;
  std::vector<double> gains;
  std::vector<double> bits;
  std::vector<double> battery;
  std::vector<double> cum_hap_energy;
};

// Decision-level constraints, named by what they bound. validate_decision
// reports every violated one without repairing anything.
enum class Constraint {
  Demand,          // served bits reach the per-slot demand
  LocalDelay,      // local compute fits in the slot
  OffloadDuration, // each airtime within [0, T]
  WptDuration,     // alpha within [0, T]
  HapTimeBudget,   // per HAP, alpha + sum of airtimes fits in the slot
  HapPower,        // each transmit power within [0, P_max]
  LocalEnergy,     // local compute energy within available energy
  OffloadEnergy,   // transmit energy within available energy
  CpuFreq,         // 0 < freq <= f_max
  BatteryCap,      // battery within [0, E_b]
};

const char* constraint_name(Constraint c);

struct Violation {
  Constraint which;
  int wd = -1;   // offending WD, or -1 for network-wide constraints
  int hap = -1;  // offending HAP where applicable
};

// Cost signals needed to score a slot; step leaves rewards at 0 without them.
struct RewardInputs {
  std::vector<double> ac;  // per-WD energy-provision cost signal
  double u = 0.0;          // reward offset keeping low rewards nonnegative
  double omega_d = 0.0;    // demand-miss penalty on the high reward
};

struct SlotOutcome {
  std::vector<Mode> mode;      // post-admission mode per WD
  std::vector<int> hap;        // serving HAP per edge WD, else -1
  std::vector<double> harvested;
  std::vector<double> available;  // min(battery + harvested, E_b)
  std::vector<double> wd_energy;  // spent energy, 0 for dropped WDs
  std::vector<double> e1;         // per-HAP WPT energy alpha * P
  std::vector<double> e2;         // per-HAP processing energy e_m * bits
  double psi = 0.0;
  double processed_bits = 0.0;
  bool demand_met = false;
  int n_local = 0;
  int n_edge = 0;
  int n_dropped = 0;
  double high_reward = 0.0;
  std::vector<double> low_rewards;
  // Carries t+1, updated batteries, and cumulative HAP energy. The new
  // slot's gains and bits are random, so Env fills them after stepping.
  SlotState next;
};

double harvested_energy(std::span<const double> hap_power,
                        std::span<const double> gain_row, double alpha,
                        double eh_efficiency);

double available_energy(double battery, double harvested, double capacity);

// Poisson(arrival_rate) * packet_bits per WD; wd_arrivals[n] is WD n's
// private stream, so draws stay nested across n_wds.
std::vector<double> sample_data(const NetworkConfig& cfg,
                                std::span<Rng> wd_arrivals);

// Executes one slot. Throws on malformed decisions (shape mismatch,
// non-finite values, alpha/power outside their boxes, edge target out of
// zone or out of range). Everything else is repaired by dropping WDs:
// per HAP, edge WDs are admitted in ascending (tau, index) order while
// alpha + sum(tau) fits the slot; admitted WDs failing their delay, CPU
// frequency, or energy checks are dropped with zero spend.
SlotOutcome step(const SlotState& state, const SlotDecision& decision,
                 const NetworkConfig& cfg, const Topology& topo,
                 const RewardInputs* rewards = nullptr);

// Reports violated constraints of the decision as declared, before any
// admission repairs. Pure; never throws on out-of-range values.
std::vector<Violation> validate_decision(const SlotState& state,
                                         const SlotDecision& decision,
                                         const NetworkConfig& cfg,
                                         const Topology& topo);

// Stateful wrapper owning the slot clock and the random streams. Channel
// and arrival draws are keyed by (WD, episode, slot), so runs are
// reproducible under any evaluation order and adding WDs or slots never
// shifts the draws of existing ones.
class Env {
 public:
  Env(NetworkConfig cfg, std::uint64_t seed);
  Env(NetworkConfig cfg, Topology topo, std::uint64_t seed);

  const NetworkConfig& config() const { return cfg_; }
  const Topology& topology() const { return topo_; }
  const SlotState& state() const { return state_; }
  int episode() const { return episode_; }
  bool done() const { return state_.t >= cfg_.slots_per_episode; }

  // Starts the given episode with empty batteries and fresh draws.
  const SlotState& reset(int episode);

  // Steps the wrapped pure function and advances to the next slot.
  SlotOutcome step(const SlotDecision& decision,
                   const RewardInputs* rewards = nullptr);

 private:
  void fill_slot(SlotState& s) const;

  NetworkConfig cfg_;
  Topology topo_;
  RngFamily fam_;
  std::vector<double> sigma_large_;
  SlotState state_;
  int episode_ = 0;
};

}  // namespace wpmec
