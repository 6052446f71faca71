// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "robustsim/aggregation.hpp"
#include "robustsim/ckptplan.hpp"
#include "robustsim/detection.hpp"
#include "robustsim/diagnosis.hpp"
#include "robustsim/fault.hpp"
#include "robustsim/metrics.hpp"
#include "robustsim/recovery.hpp"
#include "robustsim/report.hpp"
#include "robustsim/rng.hpp"
#include "robustsim/scenario.hpp"
#include "robustsim/time.hpp"
#include "robustsim/topology.hpp"

namespace robustsim {

enum class MachineHealth {
  healthy,
  degraded,
  faulty,
  evicted,
  standby_warm,
  standby_init,
  retired,
};

struct MachineState {
  int id = -1;
  MachineHealth health = MachineHealth::healthy;
  int slot = -1;  // job slot hosted, -1 when not training
};

enum class JobPhase { running, stalled, suspended, restoring, done, halted };

/// Deterministic discrete-event run of one scenario. Single-threaded;
/// independent Simulator instances share nothing.
class Simulator {
 public:
  explicit Simulator(ScenarioConfig config);

  SimReport run();

 private:
  struct QueuedEvent {
    SimTimeMs at;
    std::uint64_t seq;
    std::function<void()> fn;
  };
  struct EventOrder {
    bool operator()(const QueuedEvent& a, const QueuedEvent& b) const {
      return a.at > b.at || (a.at == b.at && a.seq > b.seq);
    }
  };

  struct ActiveFault {
    FaultEvent spec;
    bool active = false;
    std::string bug_version;  // user-code-bug binding
  };

  struct PendingIncident {
    int id = 0;
    std::set<int> fault_ids;
    SimTimeMs onset = 0;
    SimTimeMs detected_at = 0;
    SimTimeMs localized_at = 0;
    std::vector<std::string> path;
    std::set<int> evicted;  // physical machine ids
    bool nan_symptom = false;
    bool rollback_used = false;
    bool reattempt_used = false;
    bool diagnose_used = false;
    bool aggregation_inconclusive = false;
  };

  // --- event plumbing -------------------------------------------------
  void schedule(SimTimeMs at, std::function<void()> fn);
  void trace(const std::string& line);

  // --- ledger accounting ----------------------------------------------
  void account(SimTimeMs until, SegmentClass cls);

  // --- training loop --------------------------------------------------
  void start_step();
  void finish_step(std::uint64_t generation, StepCkptRecord ckpt_record,
                   SimTimeMs base_ms, SimTimeMs eff_ms);
  void interrupt_running(SegmentClass cls);
  double throughput_factor() const;
  void resume_training(const std::string& why);

  // --- fault mechanics ------------------------------------------------
  void on_fault_onset(int fault_id);
  void on_fault_expiry(int fault_id);
  bool fault_hits_job(const ActiveFault& fault) const;
  bool fault_blocking(const ActiveFault& fault) const;
  bool any_blocking_fault() const;
  std::vector<int> slots_of_fault(const ActiveFault& fault) const;
  void deactivate_fault(int fault_id, const std::string& why);
  std::vector<ActiveFaultView> active_fault_views() const;
  std::optional<int> first_faulty_slot_for_replay() const;
  bool nan_manifest() const;

  // --- detection ------------------------------------------------------
  void schedule_polls();
  void poll_tick(std::size_t rule_index);
  void run_poll(const InspectionRule& rule);
  void metric_tick();
  void run_metric_sample();
  void arm_stall_timeout();
  void process_alert(Alert alert, int fault_id);

  // --- incident pipeline ----------------------------------------------
  int open_incident(const Alert& alert, int fault_id);
  void enter_stop_time(SimTimeMs at);
  void stage_diagnose();
  void stage_reattempt();
  void stage_rollback();
  void stage_replay();
  void escalate(const std::string& why);
  void run_in_place_restart(Stage stage);
  void finish_restart_attempt(Stage stage);
  void resolve_incident(ResolutionLabel label);

  // --- aggregation ----------------------------------------------------
  void trigger_aggregation(bool fail_slow_mode);
  StackSnapshot capture_snapshot(int round_index) const;
  void finish_hang_aggregation();
  void finish_fail_slow_rounds();

  // --- recovery -------------------------------------------------------
  void do_failover(const std::vector<int>& evicted_slots,
                   ResolutionLabel label);
  void apply_pending_lazy_updates(const char* why);
  void apply_update(std::size_t index, const char* how);
  void on_update_submitted(std::size_t index);
  void on_update_window_expiry(std::size_t index);
  void replenish_pool();
  int draw_fresh_machine();
  void halt_run(const std::string& state);

  // --- report ---------------------------------------------------------
  SimReport build_report();

  ScenarioConfig config_;
  ParallelTopology topo_;
  BackupPlan backup_plan_;
  SplitRng rng_;

  SimTimeMs now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, EventOrder>
      queue_;

  std::vector<MachineState> machines_;  // indexed by physical id
  std::vector<int> slot_to_machine_;
  StandbyPool pool_;
  std::set<int> spare_ids_;  // recycled machines ready to be scheduled
  int spare_stock_ = 0;      // fresh machines never instantiated
  int next_machine_id_ = 0;

  JobPhase phase_ = JobPhase::running;
  std::uint64_t generation_ = 0;  // bumped on every interruption
  std::int64_t steps_done_ = 0;
  std::int64_t high_water_step_ = 0;
  SimTimeMs step_start_ = 0;
  std::vector<std::string> version_history_;

  MetricsLedger ledger_;
  SimTimeMs ledger_mark_ = 0;

  std::map<int, ActiveFault> faults_;
  std::vector<HotUpdate> updates_;
  std::vector<std::string> update_applied_via_;
  std::deque<std::size_t> pending_lazy_;

  InspectionState inspection_state_;
  MetricState metric_state_;
  std::vector<Alert> alert_history_;
  std::set<MetricName> metric_episode_fired_;
  SimTimeMs stall_started_ = 0;
  std::uint64_t stall_episode_ = 0;

  std::unique_ptr<CkptTimeline> ckpt_timeline_;
  ShardLedger shard_ledger_;

  bool incident_active_ = false;
  PendingIncident current_;
  std::vector<IncidentCase> closed_incidents_;
  std::vector<AlertRecord> alert_records_;
  std::map<std::string, int> resolution_breakdown_;
  std::vector<StackSnapshot> fail_slow_snapshots_;

  std::vector<std::string> trace_;
  std::string final_state_ = "completed";
  bool finished_ = false;
};

/// Validates, runs, and reports one scenario.
SimReport run_scenario(const ScenarioConfig& config);

}  // namespace robustsim
