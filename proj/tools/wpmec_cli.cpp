#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wpmec/config.hpp"
#include "wpmec/harness.hpp"

namespace {

// --config accepts a preset name or a JSON file; WPMEC_<FIELD> environment
// variables override any field afterwards.
wpmec::NetworkConfig resolve_config(const std::string& arg) {
  wpmec::NetworkConfig cfg =
      wpmec::apply_env_overrides(wpmec::load_config(arg));
  wpmec::require_valid(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-HAP wireless-powered MEC: simulator, trainer, oracle"};
  app.require_subcommand(1);

  const std::string config_help =
      "config preset (desk|table2|tiny) or JSON file path";
  const std::string policy_help =
      "policy: tmado|lc|rec|random|greedy|oracle";

  // train
  std::string t_config = "desk", t_policy = "tmado", t_out = ".";
  std::uint64_t t_seed = 0;
  int t_episodes = 0;
  CLI::App* train =
      app.add_subcommand("train", "train a policy; writes metrics.csv and "
                                  "checkpoint.json into --out");
  train->add_option("--config", t_config, config_help);
  CLI::Option* t_seed_opt = train->add_option("--seed", t_seed, "run seed");
  train->add_option("--episodes", t_episodes,
                    "training episodes (default: config value)");
  train->add_option("--policy", t_policy, policy_help);
  train->add_option("--out", t_out, "output directory");

  // eval
  std::string e_config = "desk", e_policy = "tmado", e_checkpoint, e_out,
              e_trace_out;
  std::uint64_t e_seed = 0;
  int e_episodes = 10, e_first = 1000000;
  bool e_gap = false;
  CLI::App* eval = app.add_subcommand(
      "eval", "evaluate a policy with exploration off; optional summary "
              "and per-slot trace CSVs");
  eval->add_option("--config", e_config, config_help);
  CLI::Option* e_seed_opt = eval->add_option("--seed", e_seed, "run seed");
  eval->add_option("--episodes", e_episodes, "evaluation episodes");
  eval->add_option("--policy", e_policy, policy_help);
  eval->add_option("--checkpoint", e_checkpoint, "checkpoint.json to load");
  eval->add_option("--out", e_out, "per-episode summary CSV path");
  eval->add_option("--trace-out", e_trace_out, "per-slot trace CSV path");
  eval->add_option("--first-episode", e_first,
                   "episode index evaluation starts at");
  eval->add_flag("--oracle-gap", e_gap,
                 "also solve every slot exactly (oracle budget applies)");

  // sweep
  std::string s_config = "desk", s_policy = "tmado", s_param, s_out,
              s_checkpoint;
  std::uint64_t s_seed = 0;
  std::vector<double> s_values;
  std::vector<std::uint64_t> s_seeds;
  int s_train_episodes = -1, s_eval_episodes = 5, s_threads = 0;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "grid over a config field x seeds; long-form CSV");
  sweep->add_option("--config", s_config, config_help);
  CLI::Option* s_seed_opt =
      sweep->add_option("--seed", s_seed, "single seed (see --seeds)");
  sweep->add_option("--seeds", s_seeds, "seed list")->delimiter(',');
  sweep->add_option("--policy", s_policy, policy_help);
  sweep->add_option("--param", s_param, "NetworkConfig field to sweep")
      ->required();
  sweep->add_option("--values", s_values, "values for --param")
      ->delimiter(',')
      ->required();
  sweep->add_option("--episodes", s_train_episodes,
                    "training episodes per cell (default: config value; "
                    "0 evaluates without training)");
  sweep->add_option("--eval-episodes", s_eval_episodes,
                    "evaluation episodes per cell");
  sweep->add_option("--checkpoint", s_checkpoint,
                    "frozen checkpoint replayed in every cell");
  sweep->add_option("--threads", s_threads,
                    "worker threads (0 = hardware concurrency)");
  sweep->add_option("--out", s_out, "long-form CSV path");

  // oracle
  std::string o_config = "tiny", o_policy, o_out;
  std::uint64_t o_seed = 0;
  int o_instances = 20;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "solve seeded single-slot instances exactly");
  oracle->add_option("--config", o_config, config_help);
  CLI::Option* o_seed_opt = oracle->add_option("--seed", o_seed, "run seed");
  oracle->add_option("--instances", o_instances, "instance count");
  oracle->add_option("--policy", o_policy,
                     "rule policy to gap against (lc|rec|random|greedy|oracle)");
  oracle->add_option("--out", o_out, "per-instance CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      wpmec::TrainArgs args;
      args.cfg = resolve_config(t_config);
      args.policy = t_policy;
      args.seed = t_seed_opt->count() ? t_seed : args.cfg.seed;
      args.episodes = t_episodes;
      args.out_dir = t_out;
      return wpmec::cmd_train(args);
    }
    if (eval->parsed()) {
      wpmec::EvalArgs args;
      args.cfg = resolve_config(e_config);
      args.policy = e_policy;
      args.seed = e_seed_opt->count() ? e_seed : args.cfg.seed;
      args.episodes = e_episodes;
      args.first_episode = e_first;
      args.checkpoint = e_checkpoint;
      args.out = e_out;
      args.trace_out = e_trace_out;
      args.oracle_gap = e_gap;
      return wpmec::cmd_eval(args);
    }
    if (sweep->parsed()) {
      wpmec::SweepArgs args;
      args.cfg = resolve_config(s_config);
      args.policy = s_policy;
      args.param = s_param;
      args.values = s_values;
      args.seeds = s_seeds;
      if (args.seeds.empty())
        args.seeds = {s_seed_opt->count() ? s_seed : args.cfg.seed};
      args.train_episodes = s_train_episodes;
      args.eval_episodes = s_eval_episodes;
      args.checkpoint = s_checkpoint;
      args.threads = s_threads;
      args.out = s_out;
      return wpmec::cmd_sweep(args);
    }
    if (oracle->parsed()) {
      wpmec::OracleArgs args;
      args.cfg = resolve_config(o_config);
      args.seed = o_seed_opt->count() ? o_seed : args.cfg.seed;
      args.instances = o_instances;
      args.policy = o_policy;
      args.out = o_out;
      return wpmec::cmd_oracle(args);
    }
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
