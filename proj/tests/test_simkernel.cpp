// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "robustsim/simkernel.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include <stdexcept>

#include <doctest.h>

using namespace robustsim;

namespace {

ScenarioConfig base_config(int tp, int pp, int dp, int rpm,
                           std::int64_t steps) {
  ScenarioConfig config;
  config.topology = {tp, pp, dp, rpm};
  config.horizon_steps = steps;
  config.step_duration_s = 15.0;
  config.seed = 11;
  config.recovery.pool_target = 4;
  config.recovery.spare_machines = 32;
  return config;
}

FaultEvent make_fault(int id, FaultKind kind, double onset_s,
                      std::vector<int> machines) {
  FaultEvent fault;
  fault.id = id;
  fault.kind = kind;
  fault.onset = ms_from_s(onset_s);
  fault.machines = std::move(machines);
  return fault;
}

bool path_has(const IncidentCase& incident, const std::string& label) {
  return std::find(incident.path.begin(), incident.path.end(), label) !=
         incident.path.end();
}

}  // namespace

TEST_CASE("zero-fault run is fully productive under async checkpointing") {
  ScenarioConfig config = base_config(2, 2, 2, 2, 2000);
  SimReport report = run_scenario(config);
  CHECK(report.final_state == "completed");
  CHECK(report.steps_completed == 2000);
  CHECK(report.final_cumulative_ettr >= 0.99);
  CHECK(report.incidents.empty());
  CHECK(report.ledger.partitions(report.end_time));
}

TEST_CASE("empty horizon reports ETTR 1.0 with a zero-duration ledger") {
  ScenarioConfig config = base_config(2, 2, 2, 2, 0);
  SimReport report = run_scenario(config);
  CHECK(report.final_state == "completed");
  CHECK(report.end_time == 0);
  CHECK(report.final_cumulative_ettr == doctest::Approx(1.0));
  CHECK(report.ledger.segments().empty());
}

TEST_CASE("blocking checkpoints stall every step; async does not") {
  ScenarioConfig async_config = base_config(2, 2, 2, 2, 500);
  ScenarioConfig blocking_config = async_config;
  blocking_config.checkpoint.policy = CkptPolicy::megatron_blocking;

  SimReport async_report = run_scenario(async_config);
  SimReport blocking_report = run_scenario(blocking_config);

  CHECK(async_report.ledger.total(SegmentClass::ckpt_stall) == 0);
  // 7 s of stall for every 15 s step.
  CHECK(blocking_report.ledger.total(SegmentClass::ckpt_stall) ==
        500 * 7'000);
  CHECK(blocking_report.final_cumulative_ettr <
        async_report.final_cumulative_ettr);
}

TEST_CASE("silent hang resolves through aggregation over-eviction") {
  ScenarioConfig config = base_config(2, 4, 4, 2, 400);
  FaultEvent hang = make_fault(0, FaultKind::hang, 900, {12, 13, 14, 15});
  hang.signatures = {{12, "irecv"}, {13, "irecv"}, {14, "isend"},
                     {15, "all_gather_into_tensor"}};
  config.faults.push_back(hang);

  SimReport report = run_scenario(config);
  REQUIRE(report.incidents.size() == 1);
  const IncidentCase& incident = report.incidents[0];
  CHECK(incident.evicted == std::vector<int>{12, 13, 14, 15});
  CHECK(incident.resolution == "aggregation");
  CHECK_FALSE(path_has(incident, "stop-time"));
  CHECK_FALSE(path_has(incident, "diagnose"));
  // Hang detection rides the communication timeout.
  CHECK(incident.detected_at - incident.onset == 600 * kMsPerSecond);
  // Four evictions against four warm standbys: wake latency plus restore.
  CHECK(incident.resumed_at - incident.localized_at == 60 * kMsPerSecond);
  CHECK(report.final_state == "completed");
  CHECK(report.steps_completed == 400);
  CHECK(report.ledger.partitions(report.end_time));
}

TEST_CASE("evictions beyond the warm pool are gated by fresh scheduling") {
  ScenarioConfig config = base_config(2, 4, 4, 2, 600);
  // A switch takes six machines down; only four standbys are warm.
  config.faults.push_back(
      make_fault(0, FaultKind::switch_down, 900, {2, 3, 4, 5, 6, 7}));

  SimReport report = run_scenario(config);
  REQUIRE(report.incidents.size() == 1);
  const IncidentCase& incident = report.incidents[0];
  CHECK(incident.evicted == std::vector<int>{2, 3, 4, 5, 6, 7});
  // max(wake, fresh init) + in-memory restore.
  CHECK(incident.resumed_at - incident.localized_at ==
        (600 + 30) * kMsPerSecond);
  CHECK(report.final_state == "completed");
}

TEST_CASE("losing both copies of a shard falls back to the remote tier") {
  ScenarioConfig config = base_config(2, 4, 4, 2, 600);
  // Machine 4 hosts ranks 8-9; their backup peers live on machine 13.
  // Taking both out in one incident defeats the in-memory tier.
  config.faults.push_back(
      make_fault(0, FaultKind::switch_down, 3050, {4, 13}));

  SimReport report = run_scenario(config);
  REQUIRE(report.incidents.size() == 1);
  const IncidentCase& incident = report.incidents[0];
  CHECK(incident.evicted == std::vector<int>{4, 13});
  // Remote restores cost their own latency on top of scheduling.
  CHECK(incident.resumed_at - incident.localized_at >= 600 * kMsPerSecond);
  bool remote_line = false;
  for (const std::string& line : report.trace) {
    remote_line |= line.find("remote fallback") != std::string::npos;
  }
  CHECK(remote_line);
  // The remote tier snapshots every 100 steps: steps past 200 are recomputed.
  CHECK(report.ledger.total(SegmentClass::recompute) > 0);
  CHECK(report.ledger.total(SegmentClass::recompute) % 15'000 == 0);
  CHECK(report.final_state == "completed");
  CHECK(report.steps_completed == 600);
}

TEST_CASE("inconclusive aggregation escalates into the stop-time pipeline") {
  ScenarioConfig config = base_config(2, 4, 4, 2, 400);
  // The hung machine's stack matches everyone else's, so clustering finds no
  // outlier and the controller falls through to stop-time checks; replay
  // still corners the machine.
  FaultEvent hang = make_fault(0, FaultKind::hang, 900, {4});
  hang.signatures = {{4, "train/optimizer_sync"}};
  config.faults.push_back(hang);

  SimReport report = run_scenario(config);
  REQUIRE(report.incidents.size() == 1);
  const IncidentCase& incident = report.incidents[0];
  CHECK(path_has(incident, "aggregation"));
  CHECK(path_has(incident, "stop-time"));
  CHECK(path_has(incident, "replay"));
  CHECK(incident.resolution == "replay");
  CHECK(incident.evicted == std::vector<int>{4});
  CHECK(report.final_state == "completed");
}

TEST_CASE("sdc walks the ladder to replay and isolates the machine") {
  ScenarioConfig config = base_config(2, 4, 6, 2, 400);
  FaultEvent sdc = make_fault(0, FaultKind::sdc, 900, {13});
  sdc.nan_delay = 60 * kMsPerSecond;
  config.faults.push_back(sdc);
  config.diagnosis.align_recall = 0.0;
  config.diagnosis.sdc_diagnose_recall = 0.0;

  SimReport report = run_scenario(config);
  REQUIRE(report.incidents.size() == 1);
  const IncidentCase& incident = report.incidents[0];
  CHECK(incident.resolution == "replay");
  CHECK(incident.evicted == std::vector<int>{13});
  CHECK(path_has(incident, "align"));
  CHECK(path_has(incident, "reattempt"));
  CHECK(path_has(incident, "replay"));
  CHECK(report.final_state == "completed");
}

TEST_CASE("sdc caught by the alignment test when recall is 1.0") {
  ScenarioConfig config = base_config(2, 4, 6, 2, 400);
  FaultEvent sdc = make_fault(0, FaultKind::sdc, 900, {13});
  sdc.nan_delay = 60 * kMsPerSecond;
  config.faults.push_back(sdc);
  config.diagnosis.align_recall = 1.0;

  SimReport report = run_scenario(config);
  REQUIRE(report.incidents.size() == 1);
  const IncidentCase& incident = report.incidents[0];
  CHECK(incident.resolution == "evict-diagnose");
  CHECK(incident.evicted == std::vector<int>{13});
  CHECK_FALSE(path_has(incident, "replay"));
}

TEST_CASE("cuda error is diagnosed and its machine evicted") {
  ScenarioConfig config = base_config(2, 4, 4, 2, 300);
  config.faults.push_back(make_fault(0, FaultKind::cuda_error, 600, {9}));

  SimReport report = run_scenario(config);
  REQUIRE(report.incidents.size() == 1);
  CHECK(report.incidents[0].resolution == "evict-diagnose");
  CHECK(report.incidents[0].evicted == std::vector<int>{9});
  CHECK(path_has(report.incidents[0], "diagnose"));
}

TEST_CASE("expired transient fault resolves via reattempt") {
  ScenarioConfig config = base_config(2, 4, 4, 2, 300);
  FaultEvent transient = make_fault(0, FaultKind::transient_comm, 600, {5});
  transient.duration = 90 * kMsPerSecond;
  config.faults.push_back(transient);

  SimReport report = run_scenario(config);
  REQUIRE(report.incidents.size() == 1);
  CHECK(report.incidents[0].resolution == "reattempt");
  CHECK(report.incidents[0].evicted.empty());
}

TEST_CASE("traceable user-code bug rolls the code back") {
  ScenarioConfig config = base_config(2, 4, 4, 2, 600);
  config.recovery.updates.push_back(
      {"u1", ms_from_s(300), UpdateUrgency::urgent, "v2"});
  FaultEvent bug = make_fault(0, FaultKind::user_code_bug, 1200, {});
  bug.module_tag = "fused_kernel";
  bug.introduced_in = "v2";
  config.faults.push_back(bug);

  SimReport report = run_scenario(config);
  REQUIRE(report.incidents.size() == 1);
  CHECK(report.incidents[0].resolution == "rollback");
  CHECK(report.incidents[0].evicted.empty());
  CHECK(report.final_state == "completed");
}

TEST_CASE("nan-flavored code bug walks the ladder to a rollback") {
  // The bug corrupts the loss instead of crashing: the alignment test passes
  // (no hardware fault), the restart reproduces the NaN, and reverting the
  // offending version fixes it.
  ScenarioConfig config = base_config(2, 4, 4, 2, 600);
  config.recovery.updates.push_back(
      {"u1", ms_from_s(300), UpdateUrgency::urgent, "v2"});
  FaultEvent bug = make_fault(0, FaultKind::user_code_bug, 1200, {});
  bug.introduced_in = "v2";
  bug.nan_symptom = true;
  config.faults.push_back(bug);

  SimReport report = run_scenario(config);
  REQUIRE(report.incidents.size() == 1);
  const IncidentCase& incident = report.incidents[0];
  CHECK(incident.resolution == "rollback");
  CHECK(path_has(incident, "align"));
  CHECK(path_has(incident, "reattempt"));
  CHECK(path_has(incident, "rollback"));
  CHECK(incident.evicted.empty());
  CHECK(report.final_state == "completed");
}

TEST_CASE("untraceable user-code bug reaches rollback through the pipeline") {
  ScenarioConfig config = base_config(2, 4, 4, 2, 600);
  config.recovery.updates.push_back(
      {"u1", ms_from_s(300), UpdateUrgency::urgent, "v2"});
  FaultEvent bug = make_fault(0, FaultKind::user_code_bug, 1200, {});
  bug.introduced_in = "v2";  // no module tag: logs do not name a culprit
  config.faults.push_back(bug);

  SimReport report = run_scenario(config);
  REQUIRE(report.incidents.size() == 1);
  const IncidentCase& incident = report.incidents[0];
  CHECK(incident.resolution == "rollback");
  CHECK(path_has(incident, "diagnose"));
  CHECK(path_has(incident, "reattempt"));
  CHECK(path_has(incident, "rollback"));
}

TEST_CASE("user-code bug without history escalates past rollback to replay") {
  // No previous version exists; the bug is not machine-local either, so the
  // pipeline exhausts and the run halts escalated.
  ScenarioConfig config = base_config(2, 4, 4, 2, 600);
  FaultEvent bug = make_fault(0, FaultKind::user_code_bug, 1200, {});
  bug.module_tag = "fused_kernel";
  config.faults.push_back(bug);

  SimReport report = run_scenario(config);
  CHECK(report.final_state == "escalated");
  REQUIRE(report.incidents.size() == 1);
  CHECK(report.incidents[0].escalated);
  CHECK(report.ledger.partitions(report.end_time));
}

TEST_CASE("fail-slow is voted out over five aggregation rounds") {
  ScenarioConfig config = base_config(2, 4, 4, 2, 400);
  FaultEvent slow = make_fault(0, FaultKind::fail_slow, 1200, {7});
  slow.slowdown = 0.4;
  config.faults.push_back(slow);

  SimReport report = run_scenario(config);
  REQUIRE(report.incidents.size() == 1);
  const IncidentCase& incident = report.incidents[0];
  CHECK(incident.resolution == "aggregation");
  CHECK(path_has(incident, "aggregation-rounds"));
  CHECK(incident.evicted == std::vector<int>{4, 5, 6, 7});
  // Five rounds at 10 s spacing span 40 s of localization time.
  CHECK(incident.localized_at - incident.detected_at >= 40 * kMsPerSecond);
  CHECK(report.ledger.total(SegmentClass::degraded) > 0);
  CHECK(report.final_state == "completed");
}

TEST_CASE("detection latency: with inspections vs timeout-only baseline") {
  auto scenario = [](bool inspections) {
    ScenarioConfig config = base_config(2, 4, 4, 2, 1200);
    config.detection.inspections_enabled = inspections;
    config.detection.metrics_enabled = inspections;
    config.faults.push_back(
        make_fault(0, FaultKind::nic_crash, 1801, {1}));
    config.faults.push_back(
        make_fault(1, FaultKind::switch_down, 5401, {3}));
    config.faults.push_back(
        make_fault(2, FaultKind::os_kernel_fault, 9001, {7}));
    return config;
  };

  SimReport with = run_scenario(scenario(true));
  REQUIRE(with.incidents.size() == 3);
  CHECK(with.incidents[0].detected_at - with.incidents[0].onset <=
        30 * kMsPerSecond);
  CHECK(with.incidents[1].detected_at - with.incidents[1].onset <=
        60 * kMsPerSecond);
  CHECK(with.incidents[2].detected_at - with.incidents[2].onset <=
        2 * kMsPerSecond);

  SimReport without = run_scenario(scenario(false));
  REQUIRE(without.incidents.size() == 3);
  for (const IncidentCase& incident : without.incidents) {
    CHECK(incident.detected_at - incident.onset == 600 * kMsPerSecond);
  }
}

TEST_CASE("lazy updates ride the next failover at no marginal cost") {
  ScenarioConfig config = base_config(2, 4, 4, 2, 600);
  config.recovery.updates.push_back(
      {"u1", ms_from_s(100), UpdateUrgency::lazy, "v2"});
  config.faults.push_back(make_fault(0, FaultKind::gpu_lost, 2000, {6}));

  SimReport report = run_scenario(config);
  REQUIRE(report.updates.size() == 1);
  CHECK(report.updates[0].applied_via == "failover");
  // Applied when the eviction's failover ran, well before the 24 h window.
  CHECK(report.updates[0].applied_at >= ms_from_s(2000));
  CHECK(report.updates[0].applied_at <= ms_from_s(2300));
}

TEST_CASE("an unapplied lazy update fires at exactly the trigger window") {
  ScenarioConfig config = base_config(2, 2, 2, 2, 6200);  // 93,000 s nominal
  config.recovery.updates.push_back(
      {"u1", ms_from_s(500), UpdateUrgency::lazy, "v2"});

  SimReport report = run_scenario(config);
  REQUIRE(report.updates.size() == 1);
  CHECK(report.updates[0].applied_via == "window-expiry");
  CHECK(report.updates[0].applied_at ==
        ms_from_s(500) + 86'400 * kMsPerSecond);
  // One in-place restart, plus the step it interrupted.
  CHECK(report.ledger.total(SegmentClass::failover) >= 60 * kMsPerSecond);
  CHECK(report.ledger.total(SegmentClass::failover) <= 75 * kMsPerSecond);
}

TEST_CASE("urgent updates halt and apply immediately") {
  ScenarioConfig config = base_config(2, 2, 2, 2, 400);
  config.recovery.updates.push_back(
      {"u1", ms_from_s(1000), UpdateUrgency::urgent, "v2"});

  SimReport report = run_scenario(config);
  REQUIRE(report.updates.size() == 1);
  CHECK(report.updates[0].applied_via == "urgent-submit");
  CHECK(report.updates[0].applied_at == ms_from_s(1000));
  CHECK(report.incidents.empty());
}

TEST_CASE("runs are deterministic given config and seed") {
  ScenarioConfig config = base_config(2, 4, 4, 2, 400);
  FaultEvent hang = make_fault(0, FaultKind::hang, 900, {12, 13, 14, 15});
  hang.signatures = {{12, "irecv"}, {13, "irecv"}, {14, "isend"},
                     {15, "all_gather"}};
  config.faults.push_back(hang);
  config.faults.push_back(make_fault(1, FaultKind::cuda_error, 3000, {2}));
  FaultEvent sdc = make_fault(2, FaultKind::sdc, 4500, {9});
  config.faults.push_back(sdc);

  SimReport first = run_scenario(config);
  SimReport second = run_scenario(config);
  CHECK(first.trace == second.trace);
  CHECK(report_to_json_string(first) == report_to_json_string(second));

  // A different seed may legally differ, but must itself be reproducible.
  config.seed = 999;
  SimReport third = run_scenario(config);
  SimReport fourth = run_scenario(config);
  CHECK(third.trace == fourth.trace);
}

TEST_CASE("adding a fault never raises the final cumulative ETTR") {
  // Randomized scenario pairs. Faults target distinct machines in widely
  // spaced onset slots so incidents resolve serially; under that isolation
  // the extra fault can only add unproductive time.
  SplitRng rng(4242);
  const FaultKind kinds[] = {FaultKind::cuda_error, FaultKind::gpu_lost,
                             FaultKind::os_kernel_fault, FaultKind::nic_crash};
  for (int trial = 0; trial < 8; ++trial) {
    ScenarioConfig base = base_config(2, 4, 4, 2, 1500);
    base.seed = 9000 + static_cast<std::uint64_t>(trial);

    std::set<int> used_machines;
    auto fresh_machine = [&]() {
      int machine;
      do {
        machine = static_cast<int>(rng.below(16));
      } while (used_machines.count(machine));
      used_machines.insert(machine);
      return machine;
    };
    auto slot_onset = [&](int slot) {
      return 2000.0 + slot * 2500.0 + static_cast<double>(rng.below(500));
    };

    int base_faults = static_cast<int>(rng.below(3));
    for (int f = 0; f < base_faults; ++f) {
      base.faults.push_back(make_fault(
          f, kinds[rng.below(4)], slot_onset(f), {fresh_machine()}));
    }
    ScenarioConfig more = base;
    more.faults.push_back(make_fault(base_faults, kinds[rng.below(4)],
                                     slot_onset(base_faults),
                                     {fresh_machine()}));

    SimReport before = run_scenario(base);
    SimReport after = run_scenario(more);
    CAPTURE(trial);
    CHECK(after.final_cumulative_ettr <=
          before.final_cumulative_ettr + 1e-12);
  }
}

TEST_CASE("pool accounting: no machine is simultaneously active and standby") {
  ScenarioConfig config = base_config(2, 4, 4, 2, 800);
  config.faults.push_back(make_fault(0, FaultKind::gpu_lost, 1000, {3}));
  config.faults.push_back(make_fault(1, FaultKind::gpu_lost, 3000, {9}));
  FaultEvent hang = make_fault(2, FaultKind::hang, 5000, {12, 13, 14, 15});
  hang.signatures = {{12, "a"}, {13, "a"}, {14, "b"}, {15, "c"}};
  config.faults.push_back(hang);

  SimReport report = run_scenario(config);
  CHECK(report.final_state == "completed");

  std::set<int> active_slots;
  int standby = 0;
  for (const MachineRecord& machine : report.machines) {
    if (machine.slot >= 0) {
      CHECK(machine.health == "healthy");
      CHECK_FALSE(active_slots.count(machine.slot));
      active_slots.insert(machine.slot);
    }
    if (machine.health == "standby-warm" ||
        machine.health == "standby-initializing") {
      CHECK(machine.slot == -1);
      ++standby;
    }
  }
  // Every slot hosted exactly once; the pool never exceeds its target.
  CHECK(static_cast<int>(active_slots.size()) == 16);
  CHECK(standby <= config.recovery.pool_target);
}

TEST_CASE("capacity exhaustion ends the run in a terminal state") {
  ScenarioConfig config = base_config(2, 4, 4, 2, 400);
  config.recovery.pool_target = 0;
  config.recovery.spare_machines = 0;
  config.faults.push_back(make_fault(0, FaultKind::gpu_lost, 600, {3}));

  SimReport report = run_scenario(config);
  CHECK(report.final_state == "capacity-exhausted");
  CHECK(report.ledger.partitions(report.end_time));
}

TEST_CASE("injecting on an evicted machine is a script error") {
  ScenarioConfig config = base_config(2, 4, 4, 2, 400);
  config.faults.push_back(make_fault(0, FaultKind::gpu_lost, 600, {3}));
  config.faults.push_back(make_fault(1, FaultKind::cuda_error, 2000, {3}));
  CHECK_THROWS_AS(run_scenario(config), std::runtime_error);
}

TEST_CASE("every incident terminates within four stage transitions") {
  ScenarioConfig config = base_config(2, 4, 6, 2, 800);
  config.recovery.updates.push_back(
      {"u1", ms_from_s(200), UpdateUrgency::urgent, "v2"});
  FaultEvent sdc = make_fault(0, FaultKind::sdc, 900, {13});
  config.faults.push_back(sdc);
  config.faults.push_back(make_fault(1, FaultKind::cuda_error, 4000, {2}));
  FaultEvent transient = make_fault(2, FaultKind::transient_comm, 7000, {5});
  transient.duration = 60 * kMsPerSecond;
  config.faults.push_back(transient);
  config.diagnosis.align_recall = 0.0;

  const std::set<std::string> stage_labels = {"diagnose", "reattempt",
                                              "rollback", "replay"};
  const std::set<std::string> valid_resolutions = {
      "evict-realtime", "evict-diagnose", "reattempt",
      "rollback",       "replay",         "aggregation"};
  SimReport report = run_scenario(config);
  REQUIRE_FALSE(report.incidents.empty());
  for (const IncidentCase& incident : report.incidents) {
    int transitions = 0;
    for (const std::string& stage : incident.path) {
      transitions += stage_labels.count(stage) ? 1 : 0;
    }
    CHECK(transitions <= 4);
    if (!incident.escalated) {
      CHECK(valid_resolutions.count(incident.resolution) == 1);
    }
  }
}

TEST_CASE("a half-speed degrader doubles the step wall time") {
  ScenarioConfig config = base_config(2, 2, 2, 2, 100);
  config.detection.metrics_enabled = false;  // leave the degrader in place
  FaultEvent slow = make_fault(0, FaultKind::fail_slow, 0, {1});
  slow.slowdown = 0.5;
  config.faults.push_back(slow);

  SimReport report = run_scenario(config);
  CHECK(report.final_state == "completed");
  CHECK(report.ledger.total(SegmentClass::productive) == 100 * 15'000);
  // The step already in flight at onset runs at full speed; the next 99 take
  // twice the base duration, with the excess ledgered as degraded time.
  CHECK(report.ledger.total(SegmentClass::degraded) == 99 * 15'000);
  CHECK(report.end_time == 15'000 + 99 * 30'000);
}

TEST_CASE("inspection latency bound holds for off-grid onsets") {
  ScenarioConfig config = base_config(2, 4, 4, 2, 600);
  FaultEvent fault = make_fault(0, FaultKind::nic_crash, 0, {1});
  fault.onset = 1'807'301;  // nothing special about this instant
  config.faults.push_back(fault);

  SimReport report = run_scenario(config);
  REQUIRE(report.incidents.size() == 1);
  CHECK(report.incidents[0].detected_at - report.incidents[0].onset <=
        30 * kMsPerSecond);
}

TEST_CASE("recompute time is ledgered separately after restores") {
  ScenarioConfig config = base_config(2, 4, 4, 2, 400);
  // Coarse checkpointing: only every 50 steps is recoverable in-memory? No:
  // per-step in-memory saves exist, so force the remote path by evicting a
  // machine and its backup peer's machine via two staggered faults is overly
  // intricate; instead verify recompute appears when steps are lost.
  config.checkpoint.durations.d2h_s = 20.0;  // serialize lags the step
  config.checkpoint.durations.serialize_s = 20.0;
  config.checkpoint.durations.send_s = 5.0;
  config.faults.push_back(make_fault(0, FaultKind::gpu_lost, 1000, {3}));

  SimReport report = run_scenario(config);
  CHECK(report.final_state == "completed");
  CHECK(report.steps_completed == 400);
  CHECK(report.ledger.total(SegmentClass::recompute) > 0);
  CHECK(report.ledger.partitions(report.end_time));
}
