#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wpmec {

// Scenario and training parameters. Field names double as the JSON keys of
// the config file and as the suffix of WPMEC_* environment overrides.
// Defaults are the full-scale parameter set; desk_config() is the small
// profile the test suite trains in minutes.
struct NetworkConfig {
  // fleet & geometry
  int m_haps = 3;
  int n_wds = 10;
  int slots_per_episode = 100;
  double slot_duration = 0.4;   // T, seconds
  double field_side = 100.0;    // square field edge, meters
  double zone_radius = 25.0;    // R_t, meters; offload targets must be inside

  // energy & data
  double battery_capacity = 0.1;    // E_b, joules
  double arrival_rate = 50.0;       // mean packets per slot (Poisson)
  double packet_bits = 1e3;         // bits per packet
  double data_demand = 3.5e5;       // D_th, bits per slot
  double eh_efficiency = 0.51;      // mu, harvesting efficiency
  double hap_power_max = 3.0;       // P_max, watts
  double cpu_energy_coeff = 1e-27;  // k_n, joule*s^2/cycle^3
  double cycles_per_bit = 1e3;      // C_n
  double cpu_freq_max = 3e8;        // f_max, Hz
  double bandwidth = 1e6;           // B, Hz
  double noise_power = 1e-9;        // N_0, watts
  double wd_tx_power = 0.1;         // P_n, watts
  double wd_circuit_power = 1e-3;   // P_c_n, watts
  double hap_energy_per_bit = 1e-6; // e_m, joules per processed bit
  double data_overhead = 1.1;       // v, offload payload expansion (>= 1)

  // channel
  double antenna_gain = 4.11;   // A_d
  double carrier_freq = 915e6;  // f_cf, Hz
  double path_loss_exp = 2.0;   // d_e

  // reward & agents
  double penalty_omega = 1.0;  // demand-miss penalty in the high reward
  double reward_offset = 3.65; // u, keeps low rewards nonnegative
  double ac_max = 2.0;         // offloading-priority action upper bound
  double gamma_high = 0.95;
  double gamma_low = 0.99;
  double lr_high_actor = 1e-5;
  double lr_high_critic = 1e-5;
  double lr_low_actor = 1e-5;
  double lr_low_critic = 1e-5;
  double soft_tau_actor = 1e-4;   // target-network update rate
  double soft_tau_critic = 1e-4;
  double clip_epsilon = 0.2;      // PPO ratio clip
  int ppo_epochs = 4;             // M_1
  int batch_size = 64;            // DDPG minibatch
  int replay_capacity = 100000;
  double noise_sigma = 0.1;       // exploration noise, fraction of range
  double noise_decay = 0.999;     // per-episode multiplier
  int episodes = 500;
  std::vector<int> hidden_sizes = {128, 128};
  std::string optimizer = "adam"; // "adam" | "sgd"
  std::uint64_t seed = 1;
};

// Full-scale parameter set (same values as NetworkConfig{}).
NetworkConfig table2_config();
// Small, fast profile; physics rescaled so one slot's WPT budget can cover
// the selected WDs and the local/edge choice stays economically meaningful.
NetworkConfig desk_config();
// Oracle-sized profile (fits the brute-force enumeration budget).
NetworkConfig tiny_config();
// Resolve "desk" | "table2" | "tiny" | path-to-json.
NetworkConfig load_config(const std::string& preset_or_path);

// Every violated range rule, each message naming the offending field.
std::vector<std::string> validate_config(const NetworkConfig& cfg);
// Throws std::invalid_argument listing all violations.
void require_valid(const NetworkConfig& cfg);

std::string to_json_string(const NetworkConfig& cfg);
// Strict: unknown keys and wrong types are errors. Missing keys keep the
// base value.
NetworkConfig from_json_string(const std::string& text,
                               const NetworkConfig& base = NetworkConfig{});
NetworkConfig config_from_file(const std::string& path,
                               const NetworkConfig& base = NetworkConfig{});

// Applies WPMEC_<FIELDNAME>=<json value> environment overrides.
NetworkConfig apply_env_overrides(const NetworkConfig& cfg);

// Stable 16-hex-digit digest of the canonical JSON form.
std::string config_hash(const NetworkConfig& cfg);

}  // namespace wpmec
