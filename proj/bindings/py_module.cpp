#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "wpmec/agents.hpp"
#include "wpmec/baselines.hpp"
#include "wpmec/channel.hpp"
#include "wpmec/closed_form.hpp"
#include "wpmec/config.hpp"
#include "wpmec/env.hpp"
#include "wpmec/harness.hpp"
#include "wpmec/oracle.hpp"
#include "wpmec/rng.hpp"
#include "wpmec/topology.hpp"

namespace py = pybind11;
using namespace wpmec;

PYBIND11_MODULE(_core, m) {
  m.doc() = "multi-HAP wireless-powered MEC: simulator, trainers, exact solver";

  // config
  py::class_<NetworkConfig>(m, "NetworkConfig")
      .def(py::init<>())
      .def_readwrite("m_haps", &NetworkConfig::m_haps)
      .def_readwrite("n_wds", &NetworkConfig::n_wds)
      .def_readwrite("slots_per_episode", &NetworkConfig::slots_per_episode)
      .def_readwrite("slot_duration", &NetworkConfig::slot_duration)
      .def_readwrite("field_side", &NetworkConfig::field_side)
      .def_readwrite("zone_radius", &NetworkConfig::zone_radius)
      .def_readwrite("battery_capacity", &NetworkConfig::battery_capacity)
      .def_readwrite("arrival_rate", &NetworkConfig::arrival_rate)
      .def_readwrite("packet_bits", &NetworkConfig::packet_bits)
      .def_readwrite("data_demand", &NetworkConfig::data_demand)
      .def_readwrite("eh_efficiency", &NetworkConfig::eh_efficiency)
      .def_readwrite("hap_power_max", &NetworkConfig::hap_power_max)
      .def_readwrite("cpu_energy_coeff", &NetworkConfig::cpu_energy_coeff)
      .def_readwrite("cycles_per_bit", &NetworkConfig::cycles_per_bit)
      .def_readwrite("cpu_freq_max", &NetworkConfig::cpu_freq_max)
      .def_readwrite("bandwidth", &NetworkConfig::bandwidth)
      .def_readwrite("noise_power", &NetworkConfig::noise_power)
      .def_readwrite("wd_tx_power", &NetworkConfig::wd_tx_power)
      .def_readwrite("wd_circuit_power", &NetworkConfig::wd_circuit_power)
      .def_readwrite("hap_energy_per_bit", &NetworkConfig::hap_energy_per_bit)
      .def_readwrite("data_overhead", &NetworkConfig::data_overhead)
      .def_readwrite("antenna_gain", &NetworkConfig::antenna_gain)
      .def_readwrite("carrier_freq", &NetworkConfig::carrier_freq)
      .def_readwrite("path_loss_exp", &NetworkConfig::path_loss_exp)
      .def_readwrite("penalty_omega", &NetworkConfig::penalty_omega)
      .def_readwrite("reward_offset", &NetworkConfig::reward_offset)
      .def_readwrite("ac_max", &NetworkConfig::ac_max)
      .def_readwrite("gamma_high", &NetworkConfig::gamma_high)
      .def_readwrite("gamma_low", &NetworkConfig::gamma_low)
      .def_readwrite("lr_high_actor", &NetworkConfig::lr_high_actor)
      .def_readwrite("lr_high_critic", &NetworkConfig::lr_high_critic)
      .def_readwrite("lr_low_actor", &NetworkConfig::lr_low_actor)
      .def_readwrite("lr_low_critic", &NetworkConfig::lr_low_critic)
      .def_readwrite("soft_tau_actor", &NetworkConfig::soft_tau_actor)
      .def_readwrite("soft_tau_critic", &NetworkConfig::soft_tau_critic)
      .def_readwrite("clip_epsilon", &NetworkConfig::clip_epsilon)
      .def_readwrite("ppo_epochs", &NetworkConfig::ppo_epochs)
      .def_readwrite("batch_size", &NetworkConfig::batch_size)
      .def_readwrite("replay_capacity", &NetworkConfig::replay_capacity)
      .def_readwrite("noise_sigma", &NetworkConfig::noise_sigma)
      .def_readwrite("noise_decay", &NetworkConfig::noise_decay)
      .def_readwrite("episodes", &NetworkConfig::episodes)
      .def_readwrite("hidden_sizes", &NetworkConfig::hidden_sizes)
      .def_readwrite("optimizer", &NetworkConfig::optimizer)
      .def_readwrite("seed", &NetworkConfig::seed)
      .def("__repr__",
           [](const NetworkConfig& c) { return to_json_string(c); });

  m.def("table2_config", &table2_config);
  m.def("desk_config", &desk_config);
  m.def("tiny_config", &tiny_config);
  m.def("load_config", &load_config, py::arg("preset_or_path"));
  m.def("validate_config", &validate_config, py::arg("cfg"));
  m.def("require_valid", &require_valid, py::arg("cfg"));
  m.def("to_json_string", &to_json_string, py::arg("cfg"));
  m.def("from_json_string", &from_json_string, py::arg("text"),
        py::arg("base") = NetworkConfig{});
  m.def("config_from_file", &config_from_file, py::arg("path"),
        py::arg("base") = NetworkConfig{});
  m.def("apply_env_overrides", &apply_env_overrides, py::arg("cfg"));
  m.def("config_hash", &config_hash, py::arg("cfg"));

  // topology & channel
  py::class_<Topology>(m, "Topology")
      .def(py::init<>())
      .def_readwrite("hap_pos", &Topology::hap_pos)
      .def_readwrite("wd_pos", &Topology::wd_pos)
      .def_readwrite("dist", &Topology::dist)
      .def_readwrite("zone", &Topology::zone)
      .def("n_wds", &Topology::n_wds)
      .def("m_haps", &Topology::m_haps)
      .def("d", &Topology::d, py::arg("wd"), py::arg("hap"))
      .def("in_zone", &Topology::in_zone, py::arg("wd"), py::arg("hap"));

  m.def(
      "generate_topology",
      [](const NetworkConfig& cfg, std::uint64_t seed) {
        return generate_topology(cfg, RngFamily{seed});
      },
      py::arg("cfg"), py::arg("seed"));
  m.def("recompute_zones", &recompute_zones, py::arg("topo"),
        py::arg("zone_radius"));
  m.def("large_scale_gain", &large_scale_gain, py::arg("cfg"),
        py::arg("distance"));

  // closed forms
  py::class_<LocalPlan>(m, "LocalPlan")
      .def_readonly("tau", &LocalPlan::tau)
      .def_readonly("freq", &LocalPlan::freq)
      .def_readonly("energy", &LocalPlan::energy)
      .def_readonly("freq_ok", &LocalPlan::freq_ok);
  py::class_<OffloadPlan>(m, "OffloadPlan")
      .def_readonly("tau", &OffloadPlan::tau)
      .def_readonly("energy", &OffloadPlan::energy);
  m.def("lemma2_local", &lemma2_local, py::arg("bits"), py::arg("cfg"));
  m.def("lemma3_offload", &lemma3_offload, py::arg("bits"), py::arg("gain"),
        py::arg("cfg"));
  m.def("compute_u", &compute_u, py::arg("cfg"), py::arg("mean_bits") = -1.0);

  py::class_<WptRequirement>(m, "WptRequirement")
      .def(py::init<>())
      .def_readwrite("need", &WptRequirement::need)
      .def_readwrite("gains", &WptRequirement::gains)
      .def_readwrite("alpha_ub", &WptRequirement::alpha_ub);
  py::class_<WptSolution>(m, "WptSolution")
      .def_readonly("feasible", &WptSolution::feasible)
      .def_readonly("alpha", &WptSolution::alpha)
      .def_readonly("hap_power", &WptSolution::hap_power)
      .def_readonly("q", &WptSolution::q)
      .def_readonly("total", &WptSolution::total);
  m.def("min_wpt_energy", &min_wpt_energy, py::arg("req"), py::arg("cfg"));
  m.def("min_wpt_energy_grid", &min_wpt_energy_grid, py::arg("req"),
        py::arg("cfg"), py::arg("rounds") = 40, py::arg("pts") = 17);

  // environment
  py::enum_<Mode>(m, "Mode")
      .value("Dropped", Mode::Dropped)
      .value("Local", Mode::Local)
      .value("Edge", Mode::Edge);

  py::class_<WdAssign>(m, "WdAssign")
      .def(py::init<>())
      .def(py::init([](Mode mode, int hap, double tau, double freq) {
             return WdAssign{mode, hap, tau, freq};
           }),
           py::arg("mode"), py::arg("hap") = -1, py::arg("tau") = 0.0,
           py::arg("freq") = 0.0)
      .def_readwrite("mode", &WdAssign::mode)
      .def_readwrite("hap", &WdAssign::hap)
      .def_readwrite("tau", &WdAssign::tau)
      .def_readwrite("freq", &WdAssign::freq);

  py::class_<SlotDecision>(m, "SlotDecision")
      .def(py::init<>())
      .def_readwrite("alpha", &SlotDecision::alpha)
      .def_readwrite("hap_power", &SlotDecision::hap_power)
      .def_readwrite("wd", &SlotDecision::wd);

  py::class_<SlotState>(m, "SlotState")
      .def(py::init<>())
      .def_readwrite("t", &SlotState::t)
      .def_readwrite("gains", &SlotState::gains)
      .def_readwrite("bits", &SlotState::bits)
      .def_readwrite("battery", &SlotState::battery)
      .def_readwrite("cum_hap_energy", &SlotState::cum_hap_energy);

  py::class_<RewardInputs>(m, "RewardInputs")
      .def(py::init<>())
      .def_readwrite("ac", &RewardInputs::ac)
      .def_readwrite("u", &RewardInputs::u)
      .def_readwrite("omega_d", &RewardInputs::omega_d);

  py::class_<SlotOutcome>(m, "SlotOutcome")
      .def_readonly("mode", &SlotOutcome::mode)
      .def_readonly("hap", &SlotOutcome::hap)
      .def_readonly("harvested", &SlotOutcome::harvested)
      .def_readonly("available", &SlotOutcome::available)
      .def_readonly("wd_energy", &SlotOutcome::wd_energy)
      .def_readonly("e1", &SlotOutcome::e1)
      .def_readonly("e2", &SlotOutcome::e2)
      .def_readonly("psi", &SlotOutcome::psi)
      .def_readonly("processed_bits", &SlotOutcome::processed_bits)
      .def_readonly("demand_met", &SlotOutcome::demand_met)
      .def_readonly("n_local", &SlotOutcome::n_local)
      .def_readonly("n_edge", &SlotOutcome::n_edge)
      .def_readonly("n_dropped", &SlotOutcome::n_dropped)
      .def_readonly("high_reward", &SlotOutcome::high_reward)
      .def_readonly("low_rewards", &SlotOutcome::low_rewards)
      .def_readonly("next", &SlotOutcome::next);

  m.def(
      "harvested_energy",
      [](const std::vector<double>& hap_power,
         const std::vector<double>& gain_row, double alpha,
         double eh_efficiency) {
        return harvested_energy(hap_power, gain_row, alpha, eh_efficiency);
      },
      py::arg("hap_power"), py::arg("gain_row"), py::arg("alpha"),
      py::arg("eh_efficiency"));
  m.def("available_energy", &available_energy, py::arg("battery"),
        py::arg("harvested"), py::arg("capacity"));

  m.def(
      "step",
      [](const SlotState& state, const SlotDecision& decision,
         const NetworkConfig& cfg, const Topology& topo,
         const std::optional<RewardInputs>& rewards) {
        return step(state, decision, cfg, topo,
                    rewards ? &*rewards : nullptr);
      },
      py::arg("state"), py::arg("decision"), py::arg("cfg"), py::arg("topo"),
      py::arg("rewards") = py::none());

  m.def(
      "validate_decision",
      [](const SlotState& state, const SlotDecision& decision,
         const NetworkConfig& cfg, const Topology& topo) {
        std::vector<std::tuple<std::string, int, int>> out;
        for (const Violation& v : validate_decision(state, decision, cfg, topo))
          out.emplace_back(constraint_name(v.which), v.wd, v.hap);
        return out;
      },
      py::arg("state"), py::arg("decision"), py::arg("cfg"), py::arg("topo"),
      "Violated constraints as (name, wd, hap) tuples");

  py::class_<Env>(m, "Env")
      .def(py::init<NetworkConfig, std::uint64_t>(), py::arg("cfg"),
           py::arg("seed"))
      .def(py::init<NetworkConfig, Topology, std::uint64_t>(), py::arg("cfg"),
           py::arg("topo"), py::arg("seed"))
      .def("config", &Env::config, py::return_value_policy::copy)
      .def("topology", &Env::topology, py::return_value_policy::copy)
      .def("state", &Env::state, py::return_value_policy::copy)
      .def("episode", &Env::episode)
      .def("done", &Env::done)
      .def(
          "reset",
          [](Env& e, int episode) -> SlotState { return e.reset(episode); },
          py::arg("episode"))
      .def(
          "step",
          [](Env& e, const SlotDecision& d,
             const std::optional<RewardInputs>& rewards) {
            return e.step(d, rewards ? &*rewards : nullptr);
          },
          py::arg("decision"), py::arg("rewards") = py::none());

  // exact solver
  py::class_<SlotInstance>(m, "SlotInstance")
      .def(py::init<>())
      .def_readwrite("state", &SlotInstance::state)
      .def_readwrite("cfg", &SlotInstance::cfg)
      .def_readwrite("topo", &SlotInstance::topo);
  py::class_<OracleSolution>(m, "OracleSolution")
      .def_readonly("feasible", &OracleSolution::feasible)
      .def_readonly("psi", &OracleSolution::psi)
      .def_readonly("decision", &OracleSolution::decision)
      .def_readonly("assignments_examined",
                    &OracleSolution::assignments_examined);
  m.def("solve_slot", &solve_slot, py::arg("inst"), py::arg("prune") = true);

  py::class_<GapStats>(m, "GapStats")
      .def_readonly("mean", &GapStats::mean)
      .def_readonly("max", &GapStats::max)
      .def_readonly("count", &GapStats::count);
  m.def(
      "oracle_gap",
      [](const std::vector<double>& policy, const std::vector<double>& oracle) {
        return oracle_gap(policy, oracle);
      },
      py::arg("policy_psi"), py::arg("oracle_psi"));

  // training
  py::class_<EpisodeStats>(m, "EpisodeStats")
      .def_readonly("episode", &EpisodeStats::episode)
      .def_readonly("mean_psi", &EpisodeStats::mean_psi)
      .def_readonly("mean_high_reward", &EpisodeStats::mean_high_reward)
      .def_readonly("mean_low_reward", &EpisodeStats::mean_low_reward)
      .def_readonly("rlc", &EpisodeStats::rlc)
      .def_readonly("miss_rate", &EpisodeStats::miss_rate)
      .def_readonly("mean_e1", &EpisodeStats::mean_e1)
      .def_readonly("mean_e2", &EpisodeStats::mean_e2);

  py::class_<SlotTrace>(m, "SlotTrace")
      .def_readonly("episode", &SlotTrace::episode)
      .def_readonly("t", &SlotTrace::t)
      .def_readonly("psi", &SlotTrace::psi)
      .def_readonly("demand_met", &SlotTrace::demand_met)
      .def_readonly("n_local", &SlotTrace::n_local)
      .def_readonly("n_edge", &SlotTrace::n_edge)
      .def_readonly("n_dropped", &SlotTrace::n_dropped)
      .def_readonly("e1", &SlotTrace::e1)
      .def_readonly("e2", &SlotTrace::e2)
      .def_readonly("oracle_psi", &SlotTrace::oracle_psi)
      .def_readonly("oracle_feasible", &SlotTrace::oracle_feasible);

  py::class_<Trainer>(m, "Trainer")
      .def(py::init([](const NetworkConfig& cfg, std::uint64_t seed,
                       const std::string& scheme) {
             return new Trainer(cfg, seed, scheme_from_string(scheme));
           }),
           py::arg("cfg"), py::arg("seed"), py::arg("scheme") = "tmado")
      .def_readwrite("compute_oracle_gap", &Trainer::compute_oracle_gap)
      .def("scheme", [](const Trainer& t) { return scheme_name(t.scheme()); })
      .def("config", &Trainer::config, py::return_value_policy::copy)
      .def("episodes_trained", &Trainer::episodes_trained)
      .def("train", &Trainer::train, py::arg("episodes"))
      .def(
          "evaluate",
          [](Trainer& t, int episodes, int first_episode) {
            return t.evaluate(episodes, first_episode);
          },
          py::arg("episodes"), py::arg("first_episode") = 1000000)
      .def(
          "evaluate_traced",
          [](Trainer& t, int episodes, int first_episode) {
            std::vector<SlotTrace> trace;
            std::vector<EpisodeStats> stats =
                t.evaluate(episodes, first_episode, &trace);
            return py::make_tuple(std::move(stats), std::move(trace));
          },
          py::arg("episodes"), py::arg("first_episode") = 1000000)
      .def("checkpoint_json", &Trainer::checkpoint_json)
      .def("load_checkpoint_json", &Trainer::load_checkpoint_json,
           py::arg("text"));

  // experiment entry points
  py::class_<TrainArgs>(m, "TrainArgs")
      .def(py::init<>())
      .def_readwrite("cfg", &TrainArgs::cfg)
      .def_readwrite("policy", &TrainArgs::policy)
      .def_readwrite("seed", &TrainArgs::seed)
      .def_readwrite("episodes", &TrainArgs::episodes)
      .def_readwrite("out_dir", &TrainArgs::out_dir);
  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("final_mean_psi", &TrainResult::final_mean_psi)
      .def_readonly("metrics_path", &TrainResult::metrics_path)
      .def_readonly("checkpoint_path", &TrainResult::checkpoint_path)
      .def_readonly("stats", &TrainResult::stats);
  m.def("run_train", &run_train, py::arg("args"));

  py::class_<EvalArgs>(m, "EvalArgs")
      .def(py::init<>())
      .def_readwrite("cfg", &EvalArgs::cfg)
      .def_readwrite("policy", &EvalArgs::policy)
      .def_readwrite("seed", &EvalArgs::seed)
      .def_readwrite("episodes", &EvalArgs::episodes)
      .def_readwrite("first_episode", &EvalArgs::first_episode)
      .def_readwrite("checkpoint", &EvalArgs::checkpoint)
      .def_readwrite("out", &EvalArgs::out)
      .def_readwrite("trace_out", &EvalArgs::trace_out)
      .def_readwrite("oracle_gap", &EvalArgs::oracle_gap);
  py::class_<EvalResult>(m, "EvalResult")
      .def_readonly("episodes", &EvalResult::episodes)
      .def_readonly("mean_psi", &EvalResult::mean_psi)
      .def_readonly("std_psi", &EvalResult::std_psi)
      .def_readonly("rlc", &EvalResult::rlc)
      .def_readonly("miss_rate", &EvalResult::miss_rate)
      .def_readonly("gap", &EvalResult::gap);
  m.def("run_eval", &run_eval, py::arg("args"));

  py::class_<SweepArgs>(m, "SweepArgs")
      .def(py::init<>())
      .def_readwrite("cfg", &SweepArgs::cfg)
      .def_readwrite("policy", &SweepArgs::policy)
      .def_readwrite("param", &SweepArgs::param)
      .def_readwrite("values", &SweepArgs::values)
      .def_readwrite("seeds", &SweepArgs::seeds)
      .def_readwrite("train_episodes", &SweepArgs::train_episodes)
      .def_readwrite("eval_episodes", &SweepArgs::eval_episodes)
      .def_readwrite("first_episode", &SweepArgs::first_episode)
      .def_readwrite("checkpoint", &SweepArgs::checkpoint)
      .def_readwrite("out", &SweepArgs::out)
      .def_readwrite("threads", &SweepArgs::threads);
  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("config_hash", &SweepRow::config_hash)
      .def_readonly("value", &SweepRow::value)
      .def_readonly("seed", &SweepRow::seed)
      .def_readonly("mean_psi", &SweepRow::mean_psi)
      .def_readonly("std_psi", &SweepRow::std_psi)
      .def_readonly("rlc", &SweepRow::rlc)
      .def_readonly("miss_rate", &SweepRow::miss_rate);
  m.def("run_sweep", &run_sweep, py::arg("args"));

  py::class_<OracleArgs>(m, "OracleArgs")
      .def(py::init<>())
      .def_readwrite("cfg", &OracleArgs::cfg)
      .def_readwrite("seed", &OracleArgs::seed)
      .def_readwrite("instances", &OracleArgs::instances)
      .def_readwrite("policy", &OracleArgs::policy)
      .def_readwrite("out", &OracleArgs::out);
  py::class_<OracleRow>(m, "OracleRow")
      .def_readonly("config_hash", &OracleRow::config_hash)
      .def_readonly("instance", &OracleRow::instance)
      .def_readonly("psi", &OracleRow::psi)
      .def_readonly("feasible", &OracleRow::feasible)
      .def_readonly("assignment", &OracleRow::assignment)
      .def_readonly("assignments_examined", &OracleRow::assignments_examined)
      .def_readonly("policy_psi", &OracleRow::policy_psi);
  py::class_<OracleResult>(m, "OracleResult")
      .def_readonly("rows", &OracleResult::rows)
      .def_readonly("gap", &OracleResult::gap);
  m.def("run_oracle", &run_oracle, py::arg("args"));

#ifdef WPMEC_VERSION_INFO
  m.attr("__version__") = WPMEC_VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif
}
