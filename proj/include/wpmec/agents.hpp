#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wpmec/baselines.hpp"
#include "wpmec/config.hpp"
#include "wpmec/env.hpp"
#include "wpmec/nn.hpp"
#include "wpmec/rng.hpp"
#include "wpmec/topology.hpp"

namespace wpmec {

// Fixed normalization scales for network inputs; derived once per run so
// inputs stay in O(1) ranges without leaking future information.
struct Scales {
  double energy = 1.0;  // battery capacity
  double bits = 1.0;    // 4x the mean arrival size
  double gain = 1.0;    // 99th percentile large-scale gain, times ln(100)
  double cum = 1.0;     // episode-long all-HAP full-power WPT energy
  double time = 1.0;    // slot duration
};

Scales make_scales(const NetworkConfig& cfg, const Topology& topo);

int high_state_size(const NetworkConfig& cfg);  // M + 2N + N*M
int low_obs_size(const NetworkConfig& cfg);     // 2M + 3N + N*M

struct HighAction {
  double alpha = 0.0;
  std::vector<double> hap_power;
  std::vector<double> ac;  // per-WD energy-provision cost signal

  std::vector<double> flat(const NetworkConfig& cfg) const;
  static HighAction unflatten(std::span<const double> a,
                              const NetworkConfig& cfg);
};

// Global slot summary fed to the high-level agent: per-HAP cumulative
// provision, per-WD arrivals and batteries, then all channel gains.
std::vector<double> build_high_state(const SlotState& s,
                                     const NetworkConfig& cfg,
                                     const Scales& sc);

// One WD's masked view of the slot, laid out like the global view:
// per-HAP (cumulative provision, remaining slot time) pairs, per-WD
// (arrivals, available energy, cost signal) triples, then per-HAP gain
// columns. Out-of-zone HAPs contribute (0,0) pairs and a zeroed own-gain
// entry; other WDs' triples are zeroed.
std::vector<double> build_low_obs(const SlotState& s, const HighAction& ha,
                                  const NetworkConfig& cfg,
                                  const Topology& topo, const Scales& sc,
                                  int wd);

struct FeasibleSet {
  std::vector<std::uint8_t> dropped;  // 1 = excluded from processing
  bool demand_miss = false;           // all data together cannot meet demand
};

// Cheapest-first admission: WDs with data are taken in ascending cost-signal
// order until demand is covered, then provably redundant members are pruned
// (most expensive first), so the kept set is inclusion-minimal. When even
// all data misses demand, every WD with data is kept and the miss is
// flagged. A zero demand keeps nobody.
FeasibleSet derive_feasible_set(std::span<const double> ac,
                                std::span<const double> bits, double demand);

// Deterministic continuous-control agent with target networks and a replay
// buffer; learns the WPT duration, per-HAP powers, and cost signals.
class HighAgent {
 public:
  HighAgent(const NetworkConfig& cfg, const RngFamily& fam);

  // Squashed actor output plus per-dimension clipped Gaussian exploration
  // noise (sigma_frac of the range, clipped to half the range), re-clipped
  // to the action box. sigma_frac = 0 is the deterministic policy.
  HighAction act(std::span<const double> state, double sigma_frac, Rng& rng);

  void remember(std::vector<double> s, std::vector<double> a, double r,
                std::vector<double> s2);
  std::size_t buffer_size() const { return buffer_.size(); }

  // One gradient step on a uniformly drawn (without replacement) batch:
  // critic regression toward r + gamma * Q_target(s', actor_target(s')),
  // actor ascent through the critic, then soft target updates.
  void update(Rng& rng);

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& actor_target() const { return actor_t_; }
  const Mlp& critic_target() const { return critic_t_; }

  std::string to_json() const;
  void from_json(const std::string& text);

 private:
  struct Transition {
    std::vector<double> s, a, s2;
    double r = 0.0;
  };

  const NetworkConfig cfg_;
  Mlp actor_, critic_, actor_t_, critic_t_;
  Adam opt_actor_, opt_critic_;
  std::deque<Transition> buffer_;
};

// Per-WD categorical policy with a clipped-ratio update and a learned
// value baseline; acts on its masked observation only.
class LowAgent {
 public:
  LowAgent(const NetworkConfig& cfg, const RngFamily& fam, int wd);

  // Samples from the masked softmax (out-of-zone HAPs have probability
  // exactly 0). Returns the action (0 = local, 1+m = HAP m) and its
  // log-probability.
  std::pair<int, double> act(std::span<const double> obs,
                             std::span<const std::uint8_t> allowed, Rng& rng);
  int act_greedy(std::span<const double> obs,
                 std::span<const std::uint8_t> allowed) const;

  void remember(std::vector<double> obs, std::vector<std::uint8_t> allowed,
                int action, double logp, double reward);
  // Closes the pending transition with its successor observation;
  // terminal transitions bootstrap from a zero value instead.
  void close_transition(std::vector<double> next_obs, bool terminal);

  // Several epochs of clipped-surrogate policy steps and value regression
  // on the stored episode, then the buffer is cleared.
  void update(const NetworkConfig& cfg);

  std::size_t pending() const { return traj_.size(); }
  const Mlp& policy() const { return policy_; }
  const Mlp& value() const { return value_; }

  std::string to_json() const;
  void from_json(const std::string& text);

 private:
  struct Step {
    std::vector<double> obs;
    std::vector<std::uint8_t> allowed;
    int action = 0;
    double logp_old = 0.0;
    double reward = 0.0;
    std::vector<double> next_obs;
    bool terminal = false;
    bool closed = false;
  };

  const NetworkConfig cfg_;
  Mlp policy_, value_;
  Adam opt_policy_, opt_value_;
  std::vector<Step> traj_;
};

struct EpisodeStats {
  int episode = 0;
  double mean_psi = 0.0;
  double mean_high_reward = 0.0;
  double mean_low_reward = 0.0;
  double rlc = 0.0;  // local-mode share among processing WDs
  double miss_rate = 0.0;
  double mean_e1 = 0.0;
  double mean_e2 = 0.0;
};

struct SlotTrace {
  int episode = 0;
  int t = 0;
  double psi = 0.0;
  bool demand_met = false;
  int n_local = 0;
  int n_edge = 0;
  int n_dropped = 0;
  std::vector<double> e1;
  std::vector<double> e2;
  double oracle_psi = 0.0;  // filled only when the oracle ran this slot
  bool oracle_feasible = false;
};

// Orchestrates one scheme end to end: the high-level agent always runs;
// the per-WD choice comes from the learned policies (tmado), a forced rule
// (lc/rec/random/greedy), or the exact single-slot solver (oracle, which
// also overrides the WPT variables). rec opens every zone, matching its
// unlimited-range definition.
class Trainer {
 public:
  Trainer(NetworkConfig cfg, std::uint64_t seed, Scheme scheme);

  // One episode. train=true updates the agents (per-slot high updates,
  // one low update per episode); explore=true keeps action noise and
  // categorical sampling, otherwise actions are deterministic.
  EpisodeStats run_episode(int episode, bool train, bool explore,
                           std::vector<SlotTrace>* trace = nullptr);

  std::vector<EpisodeStats> train(int episodes);
  std::vector<EpisodeStats> evaluate(int episodes, int first_episode,
                                     std::vector<SlotTrace>* trace = nullptr);

  const NetworkConfig& config() const { return cfg_; }
  Scheme scheme() const { return scheme_; }
  Env& env() { return env_; }
  HighAgent& high() { return high_; }
  LowAgent& low(int n) { return lows_[n]; }
  int episodes_trained() const { return trained_episodes_; }

  std::string checkpoint_json() const;
  void load_checkpoint_json(const std::string& text);

  // When set, every traced slot is also solved exactly and the trace rows
  // carry the optimum, so suboptimality gaps come from the same visited
  // states. Subject to the oracle's enumeration budget.
  bool compute_oracle_gap = false;

 private:
  NetworkConfig cfg_;
  Scheme scheme_;
  Env env_;
  RngFamily fam_;
  Scales scales_;
  HighAgent high_;
  std::vector<LowAgent> lows_;
  Rng noise_rng_, sample_rng_, low_rng_, rule_rng_;
  int trained_episodes_ = 0;
};

}  // namespace wpmec
