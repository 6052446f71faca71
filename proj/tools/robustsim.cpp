// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "robustsim/diagnosis.hpp"
#include "robustsim/recovery.hpp"
#include "robustsim/report.hpp"
#include "robustsim/scenario.hpp"
#include "robustsim/simkernel.hpp"
#include "robustsim/topology.hpp"

namespace {

using namespace robustsim;

int log_level() {
  const char* env = std::getenv("ROBUSTSIM_LOG");
  if (!env) {
    return 0;
  }
  std::string value(env);
  if (value == "debug") {
    return 2;
  }
  if (value == "info") {
    return 1;
  }
  return 0;
}

void emit_trace(const SimReport& report) {
  if (log_level() < 1) {
    return;
  }
  for (const std::string& line : report.trace) {
    std::cerr << line << "\n";
  }
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed_override) {
  ScenarioConfig config = scenario_from_file(config_path);
  if (seed_override) {
    config.seed = *seed_override;
  }
  SimReport report = run_scenario(config);
  emit_trace(report);
  std::string json = report_to_json_string(report);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 1;
    }
    out << json;
  } else {
    std::cout << json;
  }
  std::cout << render_report_text(report);
  return 0;
}

int cmd_replay_locate(int machines, int group_size, int faulty) {
  if (group_size <= 0) {
    group_size = recommended_replay_group_size(machines, 1);
  }
  ReplayResult result = dual_phase_replay(machines, group_size, faulty);
  std::cout << "z=" << result.z << " m=" << result.group_size
            << " n=" << result.group_count << "\n";
  std::cout << "horizontal group a=" << result.horizontal_group
            << ", vertical group b=" << result.vertical_group << "\n";
  std::cout << "suspects:";
  for (int suspect : result.suspects) {
    std::cout << " " << suspect;
  }
  std::cout << "\n";
  return 0;
}

int cmd_plan_backup(int tp, int pp, int dp, int ranks_per_machine) {
  ParallelTopology topo(tp, pp, dp, ranks_per_machine);
  BackupPlan plan = plan_backups(topo);
  if (plan.neighbor_fallback) {
    std::cout << "single parallel group detected: neighboring-machine "
                 "fallback\n";
  }
  for (int rank = 0; rank < topo.rank_count(); ++rank) {
    std::cout << rank << " -> "
              << plan.peer_of[static_cast<std::size_t>(rank)] << "\n";
  }
  return 0;
}

int cmd_size_standby(int machines, double p, double q) {
  std::cout << "pool size: " << size_pool(machines, p, q) << "\n";
  return 0;
}

int cmd_analyze_stacks(const std::string& fixture_path) {
  SnapshotFixture fixture = snapshot_fixture_from_file(fixture_path);
  ParallelTopology topo = fixture.topology.build();
  StackGrouping grouping = cluster(fixture.snapshot);
  std::cout << "groups:\n";
  for (const auto& [signature, members] : grouping.groups) {
    std::cout << "  [" << members.size() << "] " << signature << "\n";
  }
  std::cout << "outliers:";
  for (int machine : grouping.outliers) {
    std::cout << " " << machine;
  }
  std::cout << "\n";
  if (grouping.outliers.empty()) {
    std::cout << "inconclusive: no outlier group\n";
    return 0;
  }
  std::cout << "evict:";
  for (int machine : isolate(grouping, topo)) {
    std::cout << " " << machine;
  }
  std::cout << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path,
              const std::vector<std::string>& policy_names,
              const std::string& out_path) {
  RecoveryParams params;
  double daily_p = 0.001;
  double quantile = 0.99;
  if (!config_path.empty()) {
    ScenarioConfig config = scenario_from_file(config_path);
    params = config.recovery.params;
    daily_p = config.recovery.daily_fail_prob;
    quantile = config.recovery.pool_quantile;
  }
  std::vector<RestartPolicy> policies;
  for (const std::string& name : policy_names) {
    auto policy = restart_policy_from_name(name);
    if (!policy) {
      std::cerr << "error: unknown policy '" << name << "'\n";
      return 1;
    }
    policies.push_back(*policy);
  }
  if (policies.empty()) {
    policies = {RestartPolicy::ours, RestartPolicy::oracle,
                RestartPolicy::reschedule, RestartPolicy::requeue};
  }
  const int scales[] = {128, 256, 512, 1024};
  SimReport report;
  report.final_state = "sweep";
  report.was = was_table(scales, daily_p, quantile, params, policies);
  std::cout << render_report_text(report);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 1;
    }
    out << report_to_json_string(report);
  }
  return 0;
}

int cmd_report(const std::string& in_path) {
  SimReport report = report_from_file(in_path);
  std::cout << render_report_text(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robustsim: discrete-event simulator for fault-tolerant "
               "LLM-training control planes"};
  app.require_subcommand(1);

  // simulate
  std::string config_path;
  std::string out_path;
  std::uint64_t seed_value = 0;
  auto* simulate = app.add_subcommand("simulate", "run a scenario file");
  simulate->add_option("--config", config_path, "scenario JSON")->required();
  simulate->add_option("--out", out_path, "report output path");
  auto* seed_opt =
      simulate->add_option("--seed", seed_value, "override the config seed");

  // replay-locate
  int rl_machines = 0;
  int rl_group = 0;
  int rl_faulty = 0;
  auto* replay = app.add_subcommand("replay-locate",
                                    "dual-phase replay localization");
  replay->add_option("--machines", rl_machines, "machine count z")->required();
  replay->add_option("--group-size", rl_group, "group size m (0 = auto)");
  replay->add_option("--faulty", rl_faulty, "faulty machine index")->required();

  // plan-backup
  int tp = 2, pp = 4, dp = 2, rpm = 1;
  auto* backup = app.add_subcommand("plan-backup",
                                    "cross-parallel-group backup peers");
  backup->add_option("--tp", tp, "TP size")->required();
  backup->add_option("--pp", pp, "PP size")->required();
  backup->add_option("--dp", dp, "DP size")->required();
  backup->add_option("--ranks-per-machine", rpm, "ranks per machine");

  // size-standby
  int sb_machines = 0;
  double sb_p = 0.001;
  double sb_q = 0.99;
  auto* standby = app.add_subcommand("size-standby",
                                     "binomial P99 warm-pool sizing");
  standby->add_option("--machines", sb_machines, "cluster size")->required();
  standby->add_option("--daily-fail-prob", sb_p, "per-machine daily p")
      ->required();
  standby->add_option("--quantile", sb_q, "target quantile");

  // analyze-stacks
  std::string fixture_path;
  auto* stacks = app.add_subcommand("analyze-stacks",
                                    "cluster a stack-snapshot fixture");
  stacks->add_option("--fixture", fixture_path, "snapshot fixture JSON")
      ->required();

  // sweep
  std::string sweep_config;
  std::string sweep_out;
  std::vector<std::string> sweep_policies;
  auto* sweep = app.add_subcommand("sweep",
                                   "restart-policy WAS comparison table");
  sweep->add_option("--config", sweep_config,
                    "scenario JSON supplying recovery parameters");
  sweep->add_option("--policy", sweep_policies,
                    "policy (repeatable): requeue|reschedule|oracle|ours");
  sweep->add_option("--out", sweep_out, "write the table as JSON");

  // report
  std::string report_path;
  auto* report_cmd = app.add_subcommand("report",
                                        "pretty-print a report file");
  report_cmd->add_option("--in", report_path, "report JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      std::optional<std::uint64_t> seed;
      if (seed_opt->count() > 0) {
        seed = seed_value;
      }
      return cmd_simulate(config_path, out_path, seed);
    }
    if (replay->parsed()) {
      return cmd_replay_locate(rl_machines, rl_group, rl_faulty);
    }
    if (backup->parsed()) {
      return cmd_plan_backup(tp, pp, dp, rpm);
    }
    if (standby->parsed()) {
      return cmd_size_standby(sb_machines, sb_p, sb_q);
    }
    if (stacks->parsed()) {
      return cmd_analyze_stacks(fixture_path);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_config, sweep_policies, sweep_out);
    }
    if (report_cmd->parsed()) {
      return cmd_report(report_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
