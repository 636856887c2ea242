#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wpmec/agents.hpp"
#include "wpmec/config.hpp"
#include "wpmec/oracle.hpp"

namespace wpmec {

// Experiment entry points. Every CSV written here carries a header row and a
// config-hash column, doubles are printed with %.17g so rows parse back
// losslessly, and nothing nondeterministic (wall time, thread ids) lands in a
// file: rerunning a command with the same seed is byte-identical.

struct TrainArgs {
  NetworkConfig cfg;
  std::string policy = "tmado";
  std::uint64_t seed = 1;
  int episodes = 0;           // <= 0 selects cfg.episodes
  std::string out_dir = ".";  // receives metrics.csv and checkpoint.json
};

struct TrainResult {
  double final_mean_psi = 0.0;
  std::string metrics_path;
  std::string checkpoint_path;
  std::vector<EpisodeStats> stats;
};

TrainResult run_train(const TrainArgs& args);

struct EvalArgs {
  NetworkConfig cfg;
  std::string policy = "tmado";
  std::uint64_t seed = 1;
  int episodes = 10;
  // Evaluation episodes draw from indices disjoint from any training run.
  int first_episode = 1000000;
  std::string checkpoint;  // optional; loaded before evaluating
  std::string out;         // per-episode summary CSV, empty = no file
  std::string trace_out;   // per-slot trace CSV, empty = no file
  bool oracle_gap = false; // also solve every slot exactly (oracle budget)
};

struct EvalResult {
  std::vector<EpisodeStats> episodes;
  double mean_psi = 0.0;
  double std_psi = 0.0;
  double rlc = 0.0;
  double miss_rate = 0.0;
  GapStats gap;  // count stays 0 unless oracle_gap was requested
};

EvalResult run_eval(const EvalArgs& args);

struct SweepArgs {
  NetworkConfig cfg;
  std::string policy = "tmado";
  std::string param;           // NetworkConfig field name
  std::vector<double> values;  // nonempty
  std::vector<std::uint64_t> seeds;  // nonempty
  int train_episodes = -1;     // < 0: cfg.episodes, 0: evaluate untrained
  int eval_episodes = 5;
  int first_episode = 1000000;
  std::string checkpoint;      // optional frozen policy replayed per cell
  std::string out;             // long-form CSV, empty = no file
  int threads = 0;             // 0 = hardware concurrency
};

struct SweepRow {
  std::string config_hash;
  double value = 0.0;
  std::uint64_t seed = 0;
  double mean_psi = 0.0;
  double std_psi = 0.0;
  double rlc = 0.0;
  double miss_rate = 0.0;
};

// Grid over values x seeds; cells run on a worker pool (each owns its env,
// nets, and streams) and rows come back in grid order regardless of the
// thread count.
std::vector<SweepRow> run_sweep(const SweepArgs& args);

struct OracleArgs {
  NetworkConfig cfg;
  std::uint64_t seed = 1;
  int instances = 20;
  std::string policy;  // optional rule policy to gap against ("" = none)
  std::string out;     // per-instance CSV, empty = no file
};

struct OracleRow {
  std::string config_hash;
  int instance = 0;
  double psi = 0.0;
  bool feasible = false;
  std::string assignment;  // per WD: L(ocal), E<hap>, or - (dropped)
  long long assignments_examined = 0;
  double policy_psi = 0.0;  // only when a policy was given
};

struct OracleResult {
  std::vector<OracleRow> rows;
  GapStats gap;  // count stays 0 without a policy
};

// Seeded single-slot instances (fresh arrivals/gains per instance, batteries
// uniform in [0, E_b]) solved exactly; optionally gaps a rule policy on the
// same instances.
OracleResult run_oracle(const OracleArgs& args);

// CLI wrappers: print a human summary to stdout, return a process exit code.
int cmd_train(const TrainArgs& args);
int cmd_eval(const EvalArgs& args);
int cmd_sweep(const SweepArgs& args);
int cmd_oracle(const OracleArgs& args);

}  // namespace wpmec
