#include "wpmec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "wpmec/baselines.hpp"
#include "wpmec/closed_form.hpp"
#include "wpmec/env.hpp"

namespace wpmec {

namespace {

// Slots whose exact optimum is (near) zero carry no relative-gap
// information; the gap metric is defined over slots where the optimum
// actually provisions energy.
constexpr double kGapPsiFloor = 1e-6;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void ensure_parent(const std::string& path) {
  const std::filesystem::path p(path);
  const std::filesystem::path dir = p.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

void write_text(const std::string& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Integral values are emitted as JSON integers so integer config fields
// (n_wds, ...) can be swept; fractions stay floating point.
NetworkConfig apply_param(const NetworkConfig& base, const std::string& param,
                          double value) {
  nlohmann::json j = nlohmann::json::object();
  if (std::floor(value) == value && std::abs(value) < 9.0e15)
    j[param] = static_cast<std::int64_t>(value);
  else
    j[param] = value;
  return from_json_string(j.dump(), base);
}

std::string metrics_csv(const std::string& hash,
                        const std::vector<EpisodeStats>& stats) {
  std::string s =
      "config_hash,episode,mean_psi,mean_high_reward,mean_low_reward,rlc,"
      "miss_rate,mean_e1,mean_e2\n";
  for (const EpisodeStats& e : stats) {
    s += hash;
    s += ',' + std::to_string(e.episode);
    s += ',' + fmt(e.mean_psi);
    s += ',' + fmt(e.mean_high_reward);
    s += ',' + fmt(e.mean_low_reward);
    s += ',' + fmt(e.rlc);
    s += ',' + fmt(e.miss_rate);
    s += ',' + fmt(e.mean_e1);
    s += ',' + fmt(e.mean_e2);
    s += '\n';
  }
  return s;
}

std::string summary_csv(const std::string& hash, const std::string& policy,
                        std::uint64_t seed,
                        const std::vector<EpisodeStats>& stats) {
  std::string s =
      "config_hash,policy,seed,episode,mean_psi,mean_high_reward,"
      "mean_low_reward,rlc,miss_rate\n";
  for (const EpisodeStats& e : stats) {
    s += hash;
    s += ',' + policy;
    s += ',' + std::to_string(seed);
    s += ',' + std::to_string(e.episode);
    s += ',' + fmt(e.mean_psi);
    s += ',' + fmt(e.mean_high_reward);
    s += ',' + fmt(e.mean_low_reward);
    s += ',' + fmt(e.rlc);
    s += ',' + fmt(e.miss_rate);
    s += '\n';
  }
  return s;
}

std::string trace_csv(const std::string& hash, int m_haps,
                      const std::vector<SlotTrace>& rows) {
  std::string s = "config_hash,episode,t,psi,demand_met,n_local,n_edge,n_dropped";
  for (int m = 0; m < m_haps; ++m) s += ",e1_" + std::to_string(m);
  for (int m = 0; m < m_haps; ++m) s += ",e2_" + std::to_string(m);
  s += ",oracle_psi,oracle_feasible\n";
  for (const SlotTrace& r : rows) {
    s += hash;
    s += ',' + std::to_string(r.episode);
    s += ',' + std::to_string(r.t);
    s += ',' + fmt(r.psi);
    s += ',' + std::to_string(r.demand_met ? 1 : 0);
    s += ',' + std::to_string(r.n_local);
    s += ',' + std::to_string(r.n_edge);
    s += ',' + std::to_string(r.n_dropped);
    for (int m = 0; m < m_haps; ++m) s += ',' + fmt(r.e1[m]);
    for (int m = 0; m < m_haps; ++m) s += ',' + fmt(r.e2[m]);
    s += ',' + fmt(r.oracle_psi);
    s += ',' + std::to_string(r.oracle_feasible ? 1 : 0);
    s += '\n';
  }
  return s;
}

struct Aggregate {
  double mean_psi = 0.0;
  double std_psi = 0.0;
  double rlc = 0.0;
  double miss_rate = 0.0;
};

Aggregate aggregate(const std::vector<EpisodeStats>& eps) {
  Aggregate a;
  if (eps.empty()) return a;
  for (const EpisodeStats& e : eps) {
    a.mean_psi += e.mean_psi;
    a.rlc += e.rlc;
    a.miss_rate += e.miss_rate;
  }
  const double n = static_cast<double>(eps.size());
  a.mean_psi /= n;
  a.rlc /= n;
  a.miss_rate /= n;
  double var = 0.0;
  for (const EpisodeStats& e : eps) {
    const double d = e.mean_psi - a.mean_psi;
    var += d * d;
  }
  a.std_psi = std::sqrt(var / n);
  return a;
}

GapStats gap_from_trace(const std::vector<SlotTrace>& rows) {
  std::vector<double> policy, oracle;
  for (const SlotTrace& r : rows) {
    if (!r.oracle_feasible || r.oracle_psi <= kGapPsiFloor) continue;
    policy.push_back(r.psi);
    oracle.push_back(r.oracle_psi);
  }
  return oracle_gap(policy, oracle);
}

}  // namespace

TrainResult run_train(const TrainArgs& args) {
  const Scheme scheme = scheme_from_string(args.policy);
  if (scheme == Scheme::Oracle)
    throw std::invalid_argument("the oracle is a solver, not a trainable policy");
  Trainer trainer(args.cfg, args.seed, scheme);
  const int episodes = args.episodes > 0 ? args.episodes : args.cfg.episodes;
  TrainResult res;
  res.stats = trainer.train(episodes);
  res.final_mean_psi = res.stats.back().mean_psi;
  const std::string hash = config_hash(args.cfg);
  std::filesystem::create_directories(args.out_dir);
  res.metrics_path =
      (std::filesystem::path(args.out_dir) / "metrics.csv").string();
  res.checkpoint_path =
      (std::filesystem::path(args.out_dir) / "checkpoint.json").string();
  write_text(res.metrics_path, metrics_csv(hash, res.stats));
  write_text(res.checkpoint_path, trainer.checkpoint_json());
  return res;
}

EvalResult run_eval(const EvalArgs& args) {
  if (args.episodes < 1)
    throw std::invalid_argument("eval needs episodes >= 1");
  const Scheme scheme = scheme_from_string(args.policy);
  Trainer trainer(args.cfg, args.seed, scheme);
  if (!args.checkpoint.empty())
    trainer.load_checkpoint_json(read_text(args.checkpoint));
  const bool want_trace = !args.trace_out.empty() || args.oracle_gap;
  trainer.compute_oracle_gap = args.oracle_gap && scheme != Scheme::Oracle;

  std::vector<SlotTrace> rows;
  EvalResult res;
  res.episodes = trainer.evaluate(args.episodes, args.first_episode,
                                  want_trace ? &rows : nullptr);
  const Aggregate agg = aggregate(res.episodes);
  res.mean_psi = agg.mean_psi;
  res.std_psi = agg.std_psi;
  res.rlc = agg.rlc;
  res.miss_rate = agg.miss_rate;
  if (args.oracle_gap) res.gap = gap_from_trace(rows);

  const std::string hash = config_hash(args.cfg);
  if (!args.out.empty())
    write_text(args.out,
               summary_csv(hash, args.policy, args.seed, res.episodes));
  if (!args.trace_out.empty())
    write_text(args.trace_out, trace_csv(hash, args.cfg.m_haps, rows));
  return res;
}

std::vector<SweepRow> run_sweep(const SweepArgs& args) {
  if (args.values.empty())
    throw std::invalid_argument("sweep needs at least one value");
  if (args.seeds.empty())
    throw std::invalid_argument("sweep needs at least one seed");
  if (args.eval_episodes < 1)
    throw std::invalid_argument("sweep needs eval_episodes >= 1");
  const Scheme scheme = scheme_from_string(args.policy);

  struct Cell {
    double value;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (double v : args.values)
    for (std::uint64_t s : args.seeds) cells.push_back(Cell{v, s});

  // Validate the parameter name (and every value) up front, on one thread.
  std::vector<NetworkConfig> cfgs;
  cfgs.reserve(args.values.size());
  for (double v : args.values) {
    NetworkConfig c = apply_param(args.cfg, args.param, v);
    require_valid(c);
    cfgs.push_back(std::move(c));
  }

  const std::string checkpoint_text =
      args.checkpoint.empty() ? std::string() : read_text(args.checkpoint);

  std::vector<SweepRow> rows(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  const std::size_t n_seeds = args.seeds.size();

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        const Cell& cell = cells[i];
        const NetworkConfig& c = cfgs[i / n_seeds];
        Trainer trainer(c, cell.seed, scheme);
        if (!checkpoint_text.empty())
          trainer.load_checkpoint_json(checkpoint_text);
        else if (scheme != Scheme::Oracle && args.train_episodes != 0)
          trainer.train(args.train_episodes < 0 ? c.episodes
                                                : args.train_episodes);
        const std::vector<EpisodeStats> eps =
            trainer.evaluate(args.eval_episodes, args.first_episode);
        const Aggregate agg = aggregate(eps);
        rows[i] = SweepRow{config_hash(c), cell.value,   cell.seed,
                           agg.mean_psi,   agg.std_psi,  agg.rlc,
                           agg.miss_rate};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  std::size_t n_threads = args.threads > 0
                              ? static_cast<std::size_t>(args.threads)
                              : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, cells.size());
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  if (!args.out.empty()) {
    std::string s =
        "config_hash,param,value,seed,policy,mean_psi,std_psi,rlc,miss_rate\n";
    for (const SweepRow& r : rows) {
      s += r.config_hash;
      s += ',' + args.param;
      s += ',' + fmt(r.value);
      s += ',' + std::to_string(r.seed);
      s += ',' + args.policy;
      s += ',' + fmt(r.mean_psi);
      s += ',' + fmt(r.std_psi);
      s += ',' + fmt(r.rlc);
      s += ',' + fmt(r.miss_rate);
      s += '\n';
    }
    write_text(args.out, s);
  }
  return rows;
}

namespace {

// One-slot decision of a forced rule under the fixed mid-range provision,
// mirroring the trainer's baseline-only path.
SlotDecision rule_slot_decision(const SlotState& s, const NetworkConfig& cfg,
                                const Topology& topo, Scheme scheme,
                                Rng& rng) {
  HighAction ha;
  ha.alpha = 0.5 * cfg.slot_duration;
  ha.hap_power.assign(cfg.m_haps, cfg.hap_power_max);
  ha.ac.assign(cfg.n_wds, 1.0);
  const FeasibleSet fs = derive_feasible_set(ha.ac, s.bits, cfg.data_demand);
  SlotDecision dec;
  dec.alpha = ha.alpha;
  dec.hap_power = ha.hap_power;
  dec.wd.resize(cfg.n_wds);
  for (int n = 0; n < cfg.n_wds; ++n) {
    if (fs.dropped[n] || s.bits[n] <= 0.0) continue;
    const std::span<const double> row(s.gains.data() + n * cfg.m_haps,
                                      cfg.m_haps);
    LowContext ctx{n, s.bits[n], 0.0, ha.alpha, row, &topo, &cfg};
    ctx.available = available_energy(
        s.battery[n],
        harvested_energy(ha.hap_power, row, ha.alpha, cfg.eh_efficiency),
        cfg.battery_capacity);
    int choice = -1;
    switch (scheme) {
      case Scheme::Lc: choice = lc_choice(ctx); break;
      case Scheme::Rec: choice = rec_choice(ctx, rng); break;
      case Scheme::Random: choice = random_choice(ctx, rng); break;
      case Scheme::Greedy: choice = greedy_choice(ctx); break;
      default: throw std::logic_error("unexpected scheme");
    }
    if (choice < 0) continue;
    if (choice == 0) {
      const LocalPlan lp = lemma2_local(s.bits[n], cfg);
      dec.wd[n] = WdAssign{Mode::Local, -1, lp.tau, lp.freq};
    } else {
      const int m = choice - 1;
      const double gain = s.gains[n * cfg.m_haps + m];
      if (gain <= 0.0) continue;
      const OffloadPlan op = lemma3_offload(s.bits[n], gain, cfg);
      dec.wd[n] = WdAssign{Mode::Edge, m, op.tau, 0.0};
    }
  }
  return dec;
}

}  // namespace

OracleResult run_oracle(const OracleArgs& args) {
  if (args.instances < 1)
    throw std::invalid_argument("oracle needs instances >= 1");
  Scheme policy_scheme = Scheme::Oracle;
  const bool with_policy = !args.policy.empty();
  if (with_policy) {
    policy_scheme = scheme_from_string(args.policy);
    if (policy_scheme == Scheme::Tmado)
      throw std::invalid_argument(
          "gap the learned policy with eval --oracle-gap; the oracle "
          "command compares rule policies");
  }

  Env env(args.cfg, args.seed);
  const RngFamily fam{args.seed};
  const std::string hash = config_hash(args.cfg);

  OracleResult res;
  std::vector<double> gap_policy, gap_oracle;
  for (int i = 0; i < args.instances; ++i) {
    env.reset(i);
    SlotState state = env.state();
    Rng battery_rng = fam.stream("oracle-battery", static_cast<std::uint64_t>(i));
    for (double& b : state.battery)
      b = battery_rng.uniform(0.0, args.cfg.battery_capacity);

    const SlotInstance inst{state, args.cfg, env.topology()};
    const OracleSolution sol = solve_slot(inst);

    OracleRow row;
    row.config_hash = hash;
    row.instance = i;
    row.psi = sol.psi;
    row.feasible = sol.feasible;
    row.assignments_examined = sol.assignments_examined;
    for (int n = 0; n < args.cfg.n_wds; ++n) {
      const WdAssign& a = sol.decision.wd[n];
      if (a.mode == Mode::Local)
        row.assignment += 'L';
      else if (a.mode == Mode::Edge)
        row.assignment += 'E' + std::to_string(a.hap);
      else
        row.assignment += '-';
    }

    if (with_policy) {
      SlotDecision dec;
      if (policy_scheme == Scheme::Oracle) {
        dec = sol.decision;
      } else {
        Rng rule_rng = fam.stream("oracle-rule", static_cast<std::uint64_t>(i));
        dec = rule_slot_decision(state, args.cfg, env.topology(),
                                 policy_scheme, rule_rng);
      }
      const SlotOutcome out = step(state, dec, args.cfg, env.topology());
      row.policy_psi = out.psi;
      if (sol.feasible && sol.psi > kGapPsiFloor) {
        gap_policy.push_back(out.psi);
        gap_oracle.push_back(sol.psi);
      }
    }
    res.rows.push_back(std::move(row));
  }
  if (with_policy) res.gap = oracle_gap(gap_policy, gap_oracle);

  if (!args.out.empty()) {
    std::string s = "config_hash,instance,seed,psi,feasible,assignment,"
                    "assignments_examined";
    if (with_policy) s += ",policy_psi";
    s += '\n';
    for (const OracleRow& r : res.rows) {
      s += r.config_hash;
      s += ',' + std::to_string(r.instance);
      s += ',' + std::to_string(args.seed);
      s += ',' + fmt(r.psi);
      s += ',' + std::to_string(r.feasible ? 1 : 0);
      s += ',' + r.assignment;
      s += ',' + std::to_string(r.assignments_examined);
      if (with_policy) s += ',' + fmt(r.policy_psi);
      s += '\n';
    }
    write_text(args.out, s);
  }
  return res;
}

int cmd_train(const TrainArgs& args) {
  const TrainResult res = run_train(args);
  std::printf("trained %s for %d episodes (seed %llu)\n", args.policy.c_str(),
              static_cast<int>(res.stats.size()),
              static_cast<unsigned long long>(args.seed));
  std::printf("final episode mean psi: %.17g J\n", res.final_mean_psi);
  std::printf("wrote %s\n", res.metrics_path.c_str());
  std::printf("wrote %s\n", res.checkpoint_path.c_str());
  return 0;
}

int cmd_eval(const EvalArgs& args) {
  const EvalResult res = run_eval(args);
  std::printf("eval %s (seed %llu, %d episodes)\n", args.policy.c_str(),
              static_cast<unsigned long long>(args.seed), args.episodes);
  std::printf("mean psi: %.17g J (std %.17g)\n", res.mean_psi, res.std_psi);
  std::printf("rlc: %.6f  miss rate: %.6f\n", res.rlc, res.miss_rate);
  if (args.oracle_gap) {
    if (res.gap.count > 0)
      std::printf("oracle gap over %d slots: mean %.6f, max %.6f\n",
                  res.gap.count, res.gap.mean, res.gap.max);
    else
      std::printf("oracle gap: no slots above the psi floor\n");
  }
  if (!args.out.empty()) std::printf("wrote %s\n", args.out.c_str());
  if (!args.trace_out.empty())
    std::printf("wrote %s\n", args.trace_out.c_str());
  return 0;
}

int cmd_sweep(const SweepArgs& args) {
  const std::vector<SweepRow> rows = run_sweep(args);
  const std::size_t n_seeds = args.seeds.size();
  std::printf("sweep %s over %zu values x %zu seeds (%s)\n",
              args.param.c_str(), args.values.size(), n_seeds,
              args.policy.c_str());
  for (std::size_t v = 0; v < args.values.size(); ++v) {
    double mean = 0.0;
    for (std::size_t s = 0; s < n_seeds; ++s)
      mean += rows[v * n_seeds + s].mean_psi;
    mean /= static_cast<double>(n_seeds);
    std::printf("  %s = %s: mean psi %.17g J\n", args.param.c_str(),
                fmt(args.values[v]).c_str(), mean);
  }
  if (!args.out.empty()) std::printf("wrote %s\n", args.out.c_str());
  return 0;
}

int cmd_oracle(const OracleArgs& args) {
  const OracleResult res = run_oracle(args);
  int feasible = 0;
  double mean_psi = 0.0;
  for (const OracleRow& r : res.rows)
    if (r.feasible) {
      ++feasible;
      mean_psi += r.psi;
    }
  if (feasible > 0) mean_psi /= feasible;
  std::printf("solved %zu instances: %d feasible, mean psi %.17g J\n",
              res.rows.size(), feasible, mean_psi);
  if (!args.policy.empty()) {
    if (res.gap.count > 0)
      std::printf("%s gap over %d instances: mean %.6f, max %.6f\n",
                  args.policy.c_str(), res.gap.count, res.gap.mean,
                  res.gap.max);
    else
      std::printf("%s gap: no instances above the psi floor\n",
                  args.policy.c_str());
  }
  if (!args.out.empty()) std::printf("wrote %s\n", args.out.c_str());
  return 0;
}

}  // namespace wpmec
