// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "robustsim/simkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace robustsim {

namespace {

constexpr std::uint64_t kMaxEvents = 100'000'000;

std::string join_ints(const std::vector<int>& values) {
  std::ostringstream os;
  for (std::size_t i = 0; i < values.size(); ++i) {
    os << (i ? "," : "") << values[i];
  }
  return os.str();
}

}  // namespace

Simulator::Simulator(ScenarioConfig config)
    : config_(std::move(config)),
      topo_(config_.topology.build()),
      backup_plan_(plan_backups(topo_)),
      rng_(SplitRng(config_.seed)),
      pool_(config_.recovery.pool_target >= 0
                ? config_.recovery.pool_target
                : size_pool(topo_.machine_count(),
                            config_.recovery.daily_fail_prob,
                            config_.recovery.pool_quantile)),
      shard_ledger_(topo_.rank_count()) {
  config_.validate();

  const int machine_count = topo_.machine_count();
  slot_to_machine_.resize(static_cast<std::size_t>(machine_count));
  for (int i = 0; i < machine_count; ++i) {
    machines_.push_back({i, MachineHealth::healthy, i});
    slot_to_machine_[static_cast<std::size_t>(i)] = i;
  }
  next_machine_id_ = machine_count;
  for (int i = 0; i < pool_.target(); ++i) {
    int id = next_machine_id_++;
    machines_.push_back({id, MachineHealth::standby_warm, -1});
    pool_.add(id, StandbyState::warm);
  }
  spare_stock_ = config_.recovery.spare_machines;

  version_history_.push_back(config_.initial_version);
  for (const FaultEvent& fault : config_.faults) {
    faults_[fault.id] = ActiveFault{fault, false, ""};
  }
  ckpt_timeline_ = std::make_unique<CkptTimeline>(
      config_.checkpoint.policy, config_.checkpoint.durations);
}

void Simulator::schedule(SimTimeMs at, std::function<void()> fn) {
  queue_.push({at, next_seq_++, std::move(fn)});
}

void Simulator::trace(const std::string& line) {
  std::ostringstream os;
  os << "t=" << now_ << "ms " << line;
  trace_.push_back(os.str());
}

void Simulator::account(SimTimeMs until, SegmentClass cls) {
  if (until > ledger_mark_) {
    ledger_.append(ledger_mark_, until, cls);
    ledger_mark_ = until;
  }
}

double Simulator::throughput_factor() const {
  double factor = 1.0;
  for (const auto& [id, fault] : faults_) {
    if (fault.active && fault.spec.kind == FaultKind::fail_slow &&
        fault_hits_job(fault)) {
      factor = std::min(factor, fault.spec.slowdown);
    }
  }
  return factor;
}

void Simulator::start_step() {
  if (finished_ || phase_ != JobPhase::running) {
    return;
  }
  if (steps_done_ >= config_.horizon_steps) {
    account(now_, SegmentClass::productive);
    final_state_ = "completed";
    finished_ = true;
    phase_ = JobPhase::done;
    trace("run complete: " + std::to_string(steps_done_) + " steps");
    return;
  }
  step_start_ = now_;
  const SimTimeMs base = config_.step_duration_ms();
  const double factor = throughput_factor();
  const SimTimeMs eff =
      factor >= 1.0 ? base
                    : static_cast<SimTimeMs>(std::llround(
                          static_cast<double>(base) / factor));
  StepCkptRecord record =
      ckpt_timeline_->on_step(steps_done_ + 1, now_, eff);
  const std::uint64_t generation = generation_;
  schedule(now_ + eff + record.stall,
           [this, generation, record, base, eff]() {
             finish_step(generation, record, base, eff);
           });
}

void Simulator::finish_step(std::uint64_t generation,
                            StepCkptRecord ckpt_record, SimTimeMs base_ms,
                            SimTimeMs eff_ms) {
  if (finished_ || generation != generation_ || phase_ != JobPhase::running) {
    return;
  }
  const bool is_recompute = steps_done_ < high_water_step_;
  if (is_recompute) {
    account(now_, SegmentClass::recompute);
  } else {
    account(step_start_ + base_ms, SegmentClass::productive);
    if (eff_ms > base_ms) {
      account(step_start_ + eff_ms, SegmentClass::degraded);
    }
    account(now_, SegmentClass::ckpt_stall);
  }

  steps_done_ += 1;
  high_water_step_ = std::max(high_water_step_, steps_done_);
  shard_ledger_.record(ckpt_record);
  if (steps_done_ % config_.checkpoint.remote_interval_steps == 0) {
    shard_ledger_.last_remote_step = steps_done_;
  }
  if (shard_ledger_.records.size() > 64) {
    shard_ledger_.prune_before(steps_done_ - 32);
  }
  start_step();
}

void Simulator::interrupt_running(SegmentClass cls) {
  if (phase_ == JobPhase::running) {
    account(now_, cls);
    generation_ += 1;
  }
}

void Simulator::resume_training(const std::string& why) {
  phase_ = JobPhase::running;
  generation_ += 1;
  stall_episode_ += 1;
  metric_episode_fired_.clear();
  metric_state_.clear_metric(MetricName::rdma_traffic);
  metric_state_.clear_metric(MetricName::tensorcore_util);
  trace("resume: " + why);
  // Log-visible faults that survived the restart surface again.
  for (const auto& [id, fault] : faults_) {
    if (fault.active &&
        observability(fault.spec.kind) == Observability::log_visible &&
        !(fault.spec.kind == FaultKind::user_code_bug &&
          fault.spec.nan_symptom) &&
        fault_blocking(fault) && fault_hits_job(fault)) {
      const int fault_id = id;
      schedule(now_ + config_.detection.log_latency, [this, fault_id]() {
        auto it = faults_.find(fault_id);
        if (it == faults_.end() || !it->second.active || finished_) {
          return;
        }
        Alert alert;
        alert.at = now_;
        alert.source = AlertSource::log;
        alert.machines = it->second.spec.machines;
        alert.module_tag = it->second.spec.module_tag;
        alert.detail = fault_kind_name(it->second.spec.kind);
        process_alert(alert, fault_id);
      });
    }
  }
  start_step();
}

bool Simulator::fault_hits_job(const ActiveFault& fault) const {
  if (fault.spec.machines.empty()) {
    return true;  // job-level fault
  }
  for (int machine : fault.spec.machines) {
    if (machine >= 0 && machine < static_cast<int>(machines_.size()) &&
        machines_[static_cast<std::size_t>(machine)].slot >= 0) {
      return true;
    }
  }
  return false;
}

bool Simulator::fault_blocking(const ActiveFault& fault) const {
  if (!fault.active) {
    return false;
  }
  const FaultKind kind = fault.spec.kind;
  if (kind == FaultKind::user_code_bug) {
    return !version_history_.empty() &&
           version_history_.back() == fault.bug_version;
  }
  if (kind == FaultKind::sdc) {
    return now_ >= fault.spec.onset + fault.spec.nan_delay;
  }
  if (kind == FaultKind::nan_loss) {
    return true;
  }
  return stalls_training(kind) || crashes_job(kind);
}

bool Simulator::any_blocking_fault() const {
  for (const auto& [id, fault] : faults_) {
    if (fault.active && fault_blocking(fault) && fault_hits_job(fault)) {
      return true;
    }
  }
  return false;
}

std::vector<int> Simulator::slots_of_fault(const ActiveFault& fault) const {
  std::vector<int> slots;
  for (int machine : fault.spec.machines) {
    if (machine >= 0 && machine < static_cast<int>(machines_.size())) {
      int slot = machines_[static_cast<std::size_t>(machine)].slot;
      if (slot >= 0) {
        slots.push_back(slot);
      }
    }
  }
  return slots;
}

void Simulator::deactivate_fault(int fault_id, const std::string& why) {
  auto it = faults_.find(fault_id);
  if (it == faults_.end() || !it->second.active) {
    return;
  }
  it->second.active = false;
  trace("fault " + std::to_string(fault_id) + " (" +
        fault_kind_name(it->second.spec.kind) + ") cleared: " + why);
  for (int machine : it->second.spec.machines) {
    if (machine < 0 || machine >= static_cast<int>(machines_.size())) {
      continue;
    }
    MachineState& state = machines_[static_cast<std::size_t>(machine)];
    if (state.health == MachineHealth::faulty ||
        state.health == MachineHealth::degraded) {
      bool still_faulty = false;
      for (const auto& [other_id, other] : faults_) {
        if (other.active &&
            std::find(other.spec.machines.begin(), other.spec.machines.end(),
                      machine) != other.spec.machines.end()) {
          still_faulty = true;
          break;
        }
      }
      if (!still_faulty) {
        state.health = MachineHealth::healthy;
      }
    }
  }
}

std::vector<ActiveFaultView> Simulator::active_fault_views() const {
  std::vector<ActiveFaultView> views;
  for (const auto& [id, fault] : faults_) {
    if (!fault.active) {
      continue;
    }
    ActiveFaultView view;
    view.kind = fault.spec.kind;
    view.machines = slots_of_fault(fault);
    views.push_back(std::move(view));
  }
  return views;
}

std::optional<int> Simulator::first_faulty_slot_for_replay() const {
  std::optional<int> best;
  for (const auto& [id, fault] : faults_) {
    if (!fault.active || !replay_reproducible(fault.spec.kind)) {
      continue;
    }
    for (int slot : slots_of_fault(fault)) {
      if (!best || slot < *best) {
        best = slot;
      }
    }
  }
  return best;
}

bool Simulator::nan_manifest() const {
  for (const auto& [id, fault] : faults_) {
    if (!fault.active || !fault_hits_job(fault)) {
      continue;
    }
    if (fault.spec.kind == FaultKind::nan_loss) {
      return true;
    }
    if (fault.spec.kind == FaultKind::sdc &&
        now_ >= fault.spec.onset + fault.spec.nan_delay) {
      return true;
    }
    if (fault.spec.kind == FaultKind::user_code_bug && fault.spec.nan_symptom &&
        fault_blocking(fault)) {
      return true;
    }
  }
  return false;
}

void Simulator::on_fault_onset(int fault_id) {
  if (finished_) {
    return;
  }
  ActiveFault& fault = faults_.at(fault_id);
  for (int machine : fault.spec.machines) {
    if (machine < 0 || machine >= static_cast<int>(machines_.size())) {
      throw std::runtime_error("fault script: unknown machine " +
                               std::to_string(machine));
    }
    MachineHealth health = machines_[static_cast<std::size_t>(machine)].health;
    if (health == MachineHealth::evicted || health == MachineHealth::retired) {
      throw std::runtime_error("fault script: machine " +
                               std::to_string(machine) +
                               " already evicted at injection time");
    }
  }

  fault.active = true;
  if (fault.spec.kind == FaultKind::user_code_bug) {
    fault.bug_version = fault.spec.introduced_in.empty()
                            ? version_history_.back()
                            : fault.spec.introduced_in;
  }
  for (int machine : fault.spec.machines) {
    MachineState& state = machines_[static_cast<std::size_t>(machine)];
    if (state.health == MachineHealth::healthy) {
      state.health = fault.spec.kind == FaultKind::fail_slow
                         ? MachineHealth::degraded
                         : MachineHealth::faulty;
    }
  }
  trace(std::string("fault onset: id=") + std::to_string(fault_id) + " " +
        fault_kind_name(fault.spec.kind) + " machines={" +
        join_ints(fault.spec.machines) + "}");

  if (fault.spec.duration) {
    schedule(now_ + *fault.spec.duration,
             [this, fault_id]() { on_fault_expiry(fault_id); });
  }

  // A NaN-flavored code bug corrupts outputs silently; the job keeps running
  // until the loss monitor sees it.
  const bool silent_nan_bug =
      fault.spec.kind == FaultKind::user_code_bug && fault.spec.nan_symptom;
  const bool breaks_training =
      !silent_nan_bug &&
      (stalls_training(fault.spec.kind) || crashes_job(fault.spec.kind)) &&
      fault_blocking(fault) && fault_hits_job(fault);
  if (breaks_training && phase_ == JobPhase::running) {
    interrupt_running(SegmentClass::detection);
    phase_ = JobPhase::stalled;
    stall_started_ = now_;
    arm_stall_timeout();
  }
  if (!silent_nan_bug &&
      observability(fault.spec.kind) == Observability::log_visible &&
      fault_blocking(fault) && fault_hits_job(fault)) {
    schedule(now_ + config_.detection.log_latency, [this, fault_id]() {
      auto it = faults_.find(fault_id);
      if (it == faults_.end() || !it->second.active || finished_) {
        return;
      }
      Alert alert;
      alert.at = now_;
      alert.source = AlertSource::log;
      alert.machines = it->second.spec.machines;
      alert.module_tag = it->second.spec.module_tag;
      alert.detail = fault_kind_name(it->second.spec.kind);
      process_alert(alert, fault_id);
    });
  }
}

void Simulator::on_fault_expiry(int fault_id) {
  if (finished_) {
    return;
  }
  auto it = faults_.find(fault_id);
  if (it == faults_.end() || !it->second.active) {
    return;
  }
  deactivate_fault(fault_id, "duration elapsed");
  if (phase_ == JobPhase::stalled && !incident_active_ &&
      !any_blocking_fault()) {
    account(now_, SegmentClass::detection);
    resume_training("transient fault recovered before any action");
  }
}

void Simulator::schedule_polls() {
  if (!config_.detection.inspections_enabled) {
    return;
  }
  // Only items a scripted fault can ever surface through need polling; the
  // others would observe nothing and change no state.
  std::set<InspectionItem> scripted;
  for (const auto& [id, fault] : faults_) {
    if (auto item = inspection_item_of(fault.spec.kind)) {
      scripted.insert(*item);
    }
  }
  for (std::size_t i = 0; i < config_.detection.inspection_rules.size(); ++i) {
    const InspectionRule& rule = config_.detection.inspection_rules[i];
    if (!scripted.count(rule.item) || rule.interval <= 0) {
      continue;
    }
    schedule(rule.interval, [this, i]() { poll_tick(i); });
  }
}

void Simulator::poll_tick(std::size_t rule_index) {
  if (finished_) {
    return;
  }
  const InspectionRule& rule = config_.detection.inspection_rules[rule_index];
  run_poll(rule);
  schedule(now_ + rule.interval, [this, rule_index]() { poll_tick(rule_index); });
}

void Simulator::run_poll(const InspectionRule& rule) {
  if (finished_) {
    return;
  }
  // Ground truth: machines with an active fault surfacing through this item.
  // One fault raises one alert naming every confirmed machine (a downed
  // switch implicates all machines behind it at once).
  for (const auto& [id, fault] : faults_) {
    if (!fault.active) {
      continue;
    }
    auto item = inspection_item_of(fault.spec.kind);
    if (!item || *item != rule.item) {
      continue;
    }
    std::vector<int> confirmed;
    for (int machine : fault.spec.machines) {
      if (machine >= 0 && machine < static_cast<int>(machines_.size()) &&
          machines_[static_cast<std::size_t>(machine)].slot >= 0 &&
          inspection_state_.observe(rule, machine, true)) {
        confirmed.push_back(machine);
      }
    }
    if (!confirmed.empty()) {
      Alert alert;
      alert.at = now_;
      alert.source = AlertSource::inspection;
      alert.item = rule.item;
      alert.machines = std::move(confirmed);
      alert.detail = inspection_item_name(rule.item);
      process_alert(alert, id);
    }
  }
}

void Simulator::metric_tick() {
  if (finished_) {
    return;
  }
  run_metric_sample();
  schedule(now_ + config_.detection.metric_sample_interval,
           [this]() { metric_tick(); });
}

void Simulator::run_metric_sample() {
  if (finished_ || !config_.detection.metrics_enabled) {
    return;
  }
  if (phase_ != JobPhase::running && phase_ != JobPhase::stalled) {
    return;
  }
  const bool running = phase_ == JobPhase::running;
  const double factor = throughput_factor();

  struct SamplePoint {
    MetricName metric;
    double value;
    bool emit;
  };
  const double nan_value = std::numeric_limits<double>::quiet_NaN();
  // Training metrics and the TensorCore proxy only exist while the job makes
  // progress; a stalled job still shows its (zeroed) RDMA counters.
  SamplePoint points[] = {
      {MetricName::loss, nan_manifest() ? nan_value : 1.0, running},
      {MetricName::grad_norm, 1.0, running},
      {MetricName::rdma_traffic, running ? factor : 0.0, true},
      {MetricName::tensorcore_util, factor, running},
  };
  for (const SamplePoint& point : points) {
    if (!point.emit) {
      continue;
    }
    auto tripped = metric_state_.append(point.metric, now_, point.value,
                                        config_.detection.metric_rules);
    for (const MetricRule& rule : tripped) {
      if (metric_episode_fired_.count(rule.metric)) {
        continue;
      }
      metric_episode_fired_.insert(rule.metric);
      Alert alert;
      alert.at = now_;
      alert.source = AlertSource::metric;
      alert.metric = rule.metric;
      alert.nan_symptom = rule.kind == MetricRuleKind::nan_value;
      alert.detail = std::string("metric rule on ") +
                     (rule.metric == MetricName::loss              ? "loss"
                      : rule.metric == MetricName::grad_norm       ? "grad-norm"
                      : rule.metric == MetricName::rdma_traffic ? "rdma-traffic"
                                                              : "tensorcore-util");
      // Bind to the active faults that explain the symptom.
      int bound = -1;
      for (const auto& [id, fault] : faults_) {
        if (!fault.active || !fault_hits_job(fault)) {
          continue;
        }
        if (alert.nan_symptom &&
            (fault.spec.kind == FaultKind::nan_loss ||
             fault.spec.kind == FaultKind::sdc ||
             (fault.spec.kind == FaultKind::user_code_bug &&
              fault.spec.nan_symptom))) {
          bound = id;
          break;
        }
        if (!alert.nan_symptom &&
            (fault_blocking(fault) ||
             fault.spec.kind == FaultKind::fail_slow)) {
          bound = id;
          break;
        }
      }
      process_alert(alert, bound);
    }
  }
}

void Simulator::arm_stall_timeout() {
  stall_episode_ += 1;
  const std::uint64_t episode = stall_episode_;
  schedule(now_ + config_.detection.comm_timeout, [this, episode]() {
    if (finished_ || phase_ != JobPhase::stalled || episode != stall_episode_ ||
        incident_active_) {
      return;
    }
    bool attributed = false;
    for (const Alert& prior : alert_history_) {
      if (prior.at >= stall_started_ && !prior.machines.empty()) {
        attributed = true;
        break;
      }
    }
    Alert alert;
    alert.at = now_;
    alert.source = AlertSource::timeout;
    alert.silent_stall = !attributed;
    alert.detail = "communication timeout";
    int bound = -1;
    for (const auto& [id, fault] : faults_) {
      if (fault.active && fault_blocking(fault) && fault_hits_job(fault)) {
        bound = id;
        break;
      }
    }
    process_alert(alert, bound);
  });
}

void Simulator::process_alert(Alert alert, int fault_id) {
  if (finished_ || phase_ == JobPhase::done || phase_ == JobPhase::halted) {
    return;
  }
  alert_history_.push_back(alert);
  if (alert_history_.size() > 256) {
    alert_history_.erase(alert_history_.begin());
  }

  AlertRecord record;
  record.at = alert.at;
  record.source = alert.source == AlertSource::inspection ? "inspection"
                  : alert.source == AlertSource::log      ? "log"
                  : alert.source == AlertSource::metric   ? "metric"
                                                          : "timeout";
  record.what = alert.detail;
  record.machines = alert.machines;
  record.fault_id = fault_id;

  if (incident_active_) {
    record.action = "deferred (incident in progress)";
    alert_records_.push_back(record);
    return;
  }

  Action action = classify(
      alert,
      std::span<const Alert>(alert_history_.data(), alert_history_.size() - 1),
      config_.detection);

  switch (action.kind) {
    case ActionKind::tolerate:
      record.action = "tolerate";
      alert_records_.push_back(record);
      trace("alert tolerated: " + alert.detail);
      return;
    case ActionKind::evict_now: {
      record.action = "evict-now";
      alert_records_.push_back(record);
      open_incident(alert, fault_id);
      current_.path.push_back("realtime-evict");
      interrupt_running(SegmentClass::detection);
      account(now_, SegmentClass::detection);
      phase_ = JobPhase::suspended;
      std::vector<int> slots;
      for (int machine : action.machines) {
        int slot = machines_[static_cast<std::size_t>(machine)].slot;
        if (slot >= 0) {
          slots.push_back(slot);
        }
      }
      do_failover(slots, ResolutionLabel::evict_realtime);
      return;
    }
    case ActionKind::rollback: {
      record.action = "rollback";
      alert_records_.push_back(record);
      open_incident(alert, fault_id);
      interrupt_running(SegmentClass::detection);
      account(now_, SegmentClass::detection);
      phase_ = JobPhase::suspended;
      if (version_history_.size() >= 2) {
        current_.rollback_used = true;
        current_.path.push_back("rollback");
        std::string reverted = version_history_.back();
        version_history_.pop_back();
        trace("rollback: reverted " + reverted + " -> " +
              version_history_.back());
        run_in_place_restart(Stage::rollback);
      } else {
        enter_stop_time(now_);
      }
      return;
    }
    case ActionKind::stop_time: {
      record.action = "stop-time";
      alert_records_.push_back(record);
      open_incident(alert, fault_id);
      current_.nan_symptom = alert.nan_symptom;
      interrupt_running(SegmentClass::detection);
      account(now_, SegmentClass::detection);
      phase_ = JobPhase::suspended;
      enter_stop_time(now_);
      return;
    }
    case ActionKind::aggregation_trigger: {
      record.action = "aggregation-trigger";
      alert_records_.push_back(record);
      open_incident(alert, fault_id);
      if (phase_ == JobPhase::stalled) {
        account(now_, SegmentClass::detection);
      }
      const bool fail_slow_mode =
          alert.metric == MetricName::tensorcore_util;
      trigger_aggregation(fail_slow_mode);
      return;
    }
  }
}

int Simulator::open_incident(const Alert& alert, int fault_id) {
  incident_active_ = true;
  current_ = PendingIncident{};
  current_.id = static_cast<int>(closed_incidents_.size());
  current_.detected_at = alert.at;
  current_.onset = alert.at;
  if (fault_id >= 0) {
    current_.fault_ids.insert(fault_id);
    current_.onset = faults_.at(fault_id).spec.onset;
    // Detection moment is the earliest alert bound to the same fault.
    for (const AlertRecord& prior : alert_records_) {
      if (prior.fault_id == fault_id) {
        current_.detected_at = std::min(current_.detected_at, prior.at);
      }
    }
  }
  trace("incident " + std::to_string(current_.id) +
        " opened: " + alert.detail);
  return current_.id;
}

void Simulator::enter_stop_time(SimTimeMs at) {
  (void)at;
  current_.path.push_back("stop-time");
  stage_diagnose();
}

void Simulator::stage_diagnose() {
  current_.diagnose_used = true;
  current_.path.push_back("diagnose");
  SimTimeMs duration = config_.diagnosis.diagnose_duration;
  const bool with_align = current_.nan_symptom;
  if (with_align) {
    current_.path.push_back("align");
    duration += config_.diagnosis.align_duration;
  }
  schedule(now_ + duration, [this, with_align]() {
    if (finished_ || !incident_active_) {
      return;
    }
    std::vector<int> slots;
    for (int slot = 0; slot < topo_.machine_count(); ++slot) {
      slots.push_back(slot);
    }
    auto views = active_fault_views();
    DiagnosticVerdict verdict = run_diagnose_ladder(
        slots, views, config_.diagnosis,
        rng_.split("diagnose").split(static_cast<std::uint64_t>(current_.id)));
    if (with_align) {
      DiagnosticVerdict align = run_align_test(
          slots, views, config_.diagnosis,
          rng_.split("align").split(static_cast<std::uint64_t>(current_.id)));
      verdict.passed[DiagTest::bitwise_align] =
          align.passed[DiagTest::bitwise_align];
    }
    std::vector<int> failing = verdict.failing_machines();
    if (!failing.empty()) {
      trace("diagnose: failing slots {" + join_ints(failing) + "}");
      do_failover(failing, ResolutionLabel::evict_diagnose);
    } else {
      trace("diagnose: all tests passed");
      stage_reattempt();
    }
  });
}

void Simulator::stage_reattempt() {
  current_.reattempt_used = true;
  current_.path.push_back("reattempt");
  run_in_place_restart(Stage::reattempt);
}

void Simulator::stage_rollback() {
  if (current_.rollback_used || version_history_.size() < 2) {
    trace("rollback unavailable: no previous version");
    stage_replay();
    return;
  }
  current_.rollback_used = true;
  current_.path.push_back("rollback");
  std::string reverted = version_history_.back();
  version_history_.pop_back();
  trace("rollback: reverted " + reverted + " -> " + version_history_.back());
  run_in_place_restart(Stage::rollback);
}

void Simulator::stage_replay() {
  current_.path.push_back("replay");
  const int z = topo_.machine_count();
  int m = config_.diagnosis.replay_group_size > 0
              ? config_.diagnosis.replay_group_size
              : recommended_replay_group_size(z, topo_.pp_size());
  if (m < 1 || z % m != 0) {
    escalate("replay grouping impossible for machine count " +
             std::to_string(z));
    return;
  }
  auto faulty = first_faulty_slot_for_replay();
  schedule(now_ + 2 * config_.diagnosis.replay_step_duration,
           [this, z, m, faulty]() {
             if (finished_ || !incident_active_) {
               return;
             }
             if (!faulty) {
               escalate("replay: fault not reproducible in any group");
               return;
             }
             ReplayResult result = dual_phase_replay(z, m, *faulty);
             trace("replay: z=" + std::to_string(z) + " m=" +
                   std::to_string(m) + " suspects={" +
                   join_ints(result.suspects) + "}");
             do_failover(result.suspects, ResolutionLabel::replay);
           });
}

void Simulator::escalate(const std::string& why) {
  trace("escalated: " + why);
  current_.path.push_back("escalated");
  account(now_, SegmentClass::localization);
  IncidentCase incident;
  incident.id = current_.id;
  incident.fault_ids.assign(current_.fault_ids.begin(),
                            current_.fault_ids.end());
  incident.onset = current_.onset;
  incident.detected_at = current_.detected_at;
  incident.localized_at = now_;
  incident.resumed_at = now_;
  incident.path = current_.path;
  incident.evicted.assign(current_.evicted.begin(), current_.evicted.end());
  incident.resolution = "escalated";
  incident.escalated = true;
  closed_incidents_.push_back(std::move(incident));
  resolution_breakdown_["escalated"] += 1;
  incident_active_ = false;
  halt_run("escalated");
}

void Simulator::run_in_place_restart(Stage stage) {
  account(now_, SegmentClass::localization);
  phase_ = JobPhase::restoring;
  schedule(now_ + ms_from_s(config_.recovery.params.restart_s),
           [this, stage]() { finish_restart_attempt(stage); });
}

void Simulator::finish_restart_attempt(Stage stage) {
  if (finished_ || !incident_active_) {
    return;
  }
  account(now_, SegmentClass::failover);
  if (!any_blocking_fault()) {
    current_.localized_at = now_;
    resolve_incident(stage == Stage::reattempt ? ResolutionLabel::reattempt
                                               : ResolutionLabel::rollback);
    return;
  }
  trace(std::string("restart after ") + stage_name(stage) + " failed");
  phase_ = JobPhase::suspended;
  if (stage == Stage::reattempt) {
    stage_rollback();
  } else {
    stage_replay();
  }
}

void Simulator::resolve_incident(ResolutionLabel label) {
  IncidentCase incident;
  incident.id = current_.id;
  incident.fault_ids.assign(current_.fault_ids.begin(),
                            current_.fault_ids.end());
  incident.onset = current_.onset;
  incident.detected_at = current_.detected_at;
  incident.localized_at = current_.localized_at;
  incident.resumed_at = now_;
  incident.path = current_.path;
  incident.evicted.assign(current_.evicted.begin(), current_.evicted.end());
  incident.resolution = resolution_label_name(label);
  closed_incidents_.push_back(std::move(incident));
  resolution_breakdown_[resolution_label_name(label)] += 1;
  incident_active_ = false;
  inspection_state_.reset();
  trace(std::string("incident resolved: ") + resolution_label_name(label));
  resume_training(std::string("incident closed via ") +
                  resolution_label_name(label));
}

void Simulator::trigger_aggregation(bool fail_slow_mode) {
  if (fail_slow_mode) {
    current_.path.push_back("aggregation-rounds");
    fail_slow_snapshots_.clear();
    const int rounds = config_.aggregation.fail_slow_rounds;
    for (int round = 0; round < rounds; ++round) {
      schedule(now_ + round * config_.aggregation.round_spacing,
               [this, round, rounds]() {
                 if (finished_ || !incident_active_) {
                   return;
                 }
                 fail_slow_snapshots_.push_back(capture_snapshot(round));
                 trace("aggregation round " + std::to_string(round));
                 if (round == rounds - 1) {
                   finish_fail_slow_rounds();
                 }
               });
    }
  } else {
    current_.path.push_back("aggregation");
    schedule(now_ + config_.aggregation.snapshot_capture, [this]() {
      if (finished_ || !incident_active_) {
        return;
      }
      finish_hang_aggregation();
    });
  }
}

StackSnapshot Simulator::capture_snapshot(int round_index) const {
  StackSnapshot snapshot;
  for (int slot = 0; slot < topo_.machine_count(); ++slot) {
    const int phys = slot_to_machine_[static_cast<std::size_t>(slot)];
    std::string trainer_sig = "train/optimizer_sync";
    for (const auto& [id, fault] : faults_) {
      if (!fault.active) {
        continue;
      }
      const auto& targets = fault.spec.machines;
      if (std::find(targets.begin(), targets.end(), phys) == targets.end()) {
        continue;
      }
      if (fault.spec.kind == FaultKind::hang) {
        auto it = fault.spec.signatures.find(phys);
        trainer_sig = it != fault.spec.signatures.end() ? it->second
                                                        : "hang/stuck_collective";
      } else if (fault.spec.kind == FaultKind::fail_slow) {
        const auto& rounds = fault.spec.visible_rounds;
        const bool visible =
            rounds.empty() ||
            std::find(rounds.begin(), rounds.end(), round_index) !=
                rounds.end();
        if (visible) {
          auto it = fault.spec.signatures.find(phys);
          trainer_sig = it != fault.spec.signatures.end()
                            ? it->second
                            : "compute/slow_kernel";
        }
      } else if (stalls_training(fault.spec.kind)) {
        trainer_sig =
            std::string("comm_wait/") + fault_kind_name(fault.spec.kind);
      }
    }
    snapshot.machines[slot] = {
        {ProcessRole::trainer, trainer_sig},
        {ProcessRole::dataloader, "data/wait_batch"},
        {ProcessRole::checkpointer, "ckpt/flush_idle"},
    };
  }
  return snapshot;
}

void Simulator::finish_hang_aggregation() {
  StackSnapshot snapshot = capture_snapshot(0);
  StackGrouping grouping = cluster(snapshot);
  if (grouping.outliers.empty()) {
    trace("aggregation inconclusive: no outlier group");
    current_.aggregation_inconclusive = true;
    if (phase_ == JobPhase::running) {
      interrupt_running(SegmentClass::localization);
    }
    phase_ = JobPhase::suspended;
    enter_stop_time(now_);
    return;
  }
  std::vector<int> evict_slots = isolate(grouping, topo_);
  trace("aggregation: outliers {" + join_ints(grouping.outliers) +
        "} -> evict slots {" + join_ints(evict_slots) + "}");
  do_failover(evict_slots, ResolutionLabel::aggregation);
}

void Simulator::finish_fail_slow_rounds() {
  auto span = fail_slow_rounds(
      std::span<const StackSnapshot>(fail_slow_snapshots_.data(),
                                     fail_slow_snapshots_.size()),
      topo_);
  fail_slow_snapshots_.clear();
  if (!span) {
    trace("fail-slow rounds inconclusive");
    current_.aggregation_inconclusive = true;
    if (phase_ == JobPhase::running) {
      interrupt_running(SegmentClass::localization);
    }
    phase_ = JobPhase::suspended;
    enter_stop_time(now_);
    return;
  }
  trace("fail-slow degrader span {" + join_ints(*span) + "}");
  do_failover(*span, ResolutionLabel::aggregation);
}

void Simulator::do_failover(const std::vector<int>& evicted_slots,
                            ResolutionLabel label) {
  if (phase_ == JobPhase::running) {
    interrupt_running(SegmentClass::localization);
  }
  account(now_, SegmentClass::localization);
  phase_ = JobPhase::restoring;
  current_.localized_at = now_;

  // Compute the restore point against the pre-replacement ledger state.
  std::vector<int> sorted_slots = evicted_slots;
  std::sort(sorted_slots.begin(), sorted_slots.end());
  sorted_slots.erase(std::unique(sorted_slots.begin(), sorted_slots.end()),
                     sorted_slots.end());
  auto point = latest_recoverable(
      shard_ledger_,
      std::span<const int>(sorted_slots.data(), sorted_slots.size()), topo_,
      backup_plan_, now_);
  std::int64_t restore_step;
  double restore_cost_s;
  if (point) {
    restore_step = point->step;
    restore_cost_s = config_.recovery.params.restore_s;
  } else {
    restore_step = std::max<std::int64_t>(0, shard_ledger_.last_remote_step);
    restore_cost_s = config_.recovery.params.remote_restore_s;
    trace("in-memory checkpoint unrecoverable; remote fallback to step " +
          std::to_string(restore_step));
  }

  // Evict, quarantine, deactivate machine-bound faults.
  std::vector<int> evicted_phys;
  for (int slot : sorted_slots) {
    int phys = slot_to_machine_[static_cast<std::size_t>(slot)];
    MachineState& state = machines_[static_cast<std::size_t>(phys)];
    state.health = MachineHealth::evicted;
    state.slot = -1;
    evicted_phys.push_back(phys);
    current_.evicted.insert(phys);
  }
  for (auto& [id, fault] : faults_) {
    if (!fault.active || fault.spec.machines.empty()) {
      continue;
    }
    bool all_out = true;
    for (int machine : fault.spec.machines) {
      MachineHealth health =
          machines_[static_cast<std::size_t>(machine)].health;
      if (health != MachineHealth::evicted &&
          health != MachineHealth::retired) {
        all_out = false;
        break;
      }
    }
    if (all_out) {
      deactivate_fault(id, "all target machines evicted");
      current_.fault_ids.insert(id);
    }
  }
  for (int phys : evicted_phys) {
    schedule(now_ + ms_from_s(config_.recovery.params.quarantine_s),
             [this, phys]() {
               if (finished_) {
                 return;
               }
               MachineState& state = machines_[static_cast<std::size_t>(phys)];
               if (state.health != MachineHealth::evicted) {
                 return;
               }
               bool has_active_fault = false;
               for (const auto& [id, fault] : faults_) {
                 if (fault.active &&
                     std::find(fault.spec.machines.begin(),
                               fault.spec.machines.end(),
                               phys) != fault.spec.machines.end()) {
                   has_active_fault = true;
                   break;
                 }
               }
               if (has_active_fault) {
                 state.health = MachineHealth::retired;
                 trace("machine " + std::to_string(phys) +
                       " retired after quarantine");
               } else {
                 state.health = MachineHealth::healthy;
                 spare_ids_.insert(phys);
                 trace("machine " + std::to_string(phys) +
                       " passed offline tests, returned to spares");
                 replenish_pool();  // retry if the pool was left short
               }
             });
  }

  // Replacements: warm pool first, then freshly scheduled machines.
  const int need = static_cast<int>(sorted_slots.size());
  std::vector<int> replacements = pool_.withdraw_warm(need);
  const int shortfall = need - static_cast<int>(replacements.size());
  for (int i = 0; i < shortfall; ++i) {
    int fresh = draw_fresh_machine();
    if (fresh < 0) {
      halt_run("capacity-exhausted");
      return;
    }
    replacements.push_back(fresh);
  }
  for (std::size_t i = 0; i < sorted_slots.size(); ++i) {
    int slot = sorted_slots[i];
    int phys = replacements[i];
    machines_[static_cast<std::size_t>(phys)].health = MachineHealth::healthy;
    machines_[static_cast<std::size_t>(phys)].slot = slot;
    slot_to_machine_[static_cast<std::size_t>(slot)] = phys;
  }
  replenish_pool();

  // Checkpoint history floors for the replaced slots and their peers.
  for (int slot : sorted_slots) {
    for (int rank : topo_.ranks_on_machine(slot)) {
      shard_ledger_.own_since[static_cast<std::size_t>(rank)] =
          restore_step + 1;
      int peer = backup_plan_.peer_of[static_cast<std::size_t>(rank)];
      shard_ledger_.backup_since[static_cast<std::size_t>(peer)] =
          restore_step + 1;
    }
  }

  apply_pending_lazy_updates("failover");

  const double schedule_cost_s =
      shortfall > 0 ? std::max(config_.recovery.params.wake_s,
                               config_.recovery.params.init_s)
                    : (need > 0 ? config_.recovery.params.wake_s : 0.0);
  const SimTimeMs resume_at =
      now_ + ms_from_s(schedule_cost_s) + ms_from_s(restore_cost_s);
  const std::int64_t steps_lost = steps_done_ - restore_step;
  trace("failover: evicted {" + join_ints(evicted_phys) + "} warm=" +
        std::to_string(need - shortfall) + " fresh=" +
        std::to_string(shortfall) + " restore_step=" +
        std::to_string(restore_step) + " steps_lost=" +
        std::to_string(steps_lost));

  steps_done_ = restore_step;
  ckpt_timeline_ = std::make_unique<CkptTimeline>(
      config_.checkpoint.policy, config_.checkpoint.durations);

  schedule(resume_at, [this, label]() {
    if (finished_) {
      return;
    }
    account(now_, SegmentClass::failover);
    if (any_blocking_fault()) {
      trace("training failed again after machine eviction");
      phase_ = JobPhase::suspended;
      if (!incident_active_) {
        return;  // should not happen; failovers run inside incidents
      }
      if (!current_.rollback_used && version_history_.size() >= 2) {
        stage_rollback();
      } else if (current_.path.empty() ||
                 current_.path.back() != "replay") {
        stage_replay();
      } else {
        escalate("fault persists after replay eviction");
      }
      return;
    }
    resolve_incident(label);
  });
}

void Simulator::apply_pending_lazy_updates(const char* why) {
  while (!pending_lazy_.empty()) {
    std::size_t index = pending_lazy_.front();
    pending_lazy_.pop_front();
    apply_update(index, why);
  }
}

void Simulator::apply_update(std::size_t index, const char* how) {
  HotUpdate& update = updates_[index];
  if (update.applied_at) {
    return;
  }
  update.applied_at = now_;
  update_applied_via_[index] = how;
  version_history_.push_back(update.version);
  trace("hot-update " + update.id + " applied (" + how + "): now " +
        update.version);
}

void Simulator::on_update_submitted(std::size_t index) {
  if (finished_) {
    return;
  }
  HotUpdate& update = updates_[index];
  trace("hot-update " + update.id + " submitted (" +
        (update.urgency == UpdateUrgency::urgent ? "urgent" : "lazy") + ")");
  if (update.urgency == UpdateUrgency::urgent) {
    apply_update(index, "urgent-submit");
    if (phase_ == JobPhase::running) {
      interrupt_running(SegmentClass::failover);
      phase_ = JobPhase::restoring;
      schedule(now_ + ms_from_s(config_.recovery.params.restart_s), [this]() {
        if (finished_ || incident_active_ || phase_ != JobPhase::restoring) {
          return;
        }
        account(now_, SegmentClass::failover);
        resume_training("urgent hot-update applied");
      });
    }
    return;
  }
  pending_lazy_.push_back(index);
  const SimTimeMs deadline = now_ + config_.recovery.params.lazy_update_window;
  schedule(deadline, [this, index]() { on_update_window_expiry(index); });
}

void Simulator::on_update_window_expiry(std::size_t index) {
  if (finished_ || updates_[index].applied_at) {
    return;
  }
  auto it = std::find(pending_lazy_.begin(), pending_lazy_.end(), index);
  if (it != pending_lazy_.end()) {
    pending_lazy_.erase(it);
  }
  apply_update(index, "window-expiry");
  if (phase_ == JobPhase::running && !incident_active_) {
    interrupt_running(SegmentClass::failover);
    phase_ = JobPhase::restoring;
    schedule(now_ + ms_from_s(config_.recovery.params.restart_s), [this]() {
      if (finished_ || incident_active_ || phase_ != JobPhase::restoring) {
        return;
      }
      account(now_, SegmentClass::failover);
      resume_training("window-expiry hot-update applied");
    });
  }
}

void Simulator::replenish_pool() {
  int missing = pool_.target() - pool_.size();
  for (int i = 0; i < missing; ++i) {
    int fresh = draw_fresh_machine();
    if (fresh < 0) {
      trace("pool replenishment starved: no spare machines");
      return;
    }
    machines_[static_cast<std::size_t>(fresh)].health =
        MachineHealth::standby_init;
    pool_.add(fresh, StandbyState::initializing);
    schedule(now_ + ms_from_s(config_.recovery.params.init_s),
             [this, fresh]() {
               if (finished_ || !pool_.contains(fresh)) {
                 return;
               }
               pool_.mark_warm(fresh);
               machines_[static_cast<std::size_t>(fresh)].health =
                   MachineHealth::standby_warm;
               trace("standby machine " + std::to_string(fresh) + " warm");
             });
  }
}

int Simulator::draw_fresh_machine() {
  if (!spare_ids_.empty()) {
    int id = *spare_ids_.begin();
    spare_ids_.erase(spare_ids_.begin());
    return id;
  }
  if (spare_stock_ > 0) {
    spare_stock_ -= 1;
    int id = next_machine_id_++;
    machines_.push_back({id, MachineHealth::healthy, -1});
    return id;
  }
  return -1;
}

void Simulator::halt_run(const std::string& state) {
  SegmentClass cls = SegmentClass::localization;
  if (phase_ == JobPhase::restoring) {
    cls = SegmentClass::failover;
  } else if (phase_ == JobPhase::stalled) {
    cls = SegmentClass::detection;
  }
  account(now_, cls);
  final_state_ = state;
  finished_ = true;
  phase_ = JobPhase::halted;
  trace("run halted: " + state);
}

SimReport Simulator::run() {
  for (const auto& [id, fault] : faults_) {
    const int fault_id = id;
    schedule(fault.spec.onset, [this, fault_id]() { on_fault_onset(fault_id); });
  }
  for (std::size_t i = 0; i < config_.recovery.updates.size(); ++i) {
    const UpdateSpec& spec = config_.recovery.updates[i];
    HotUpdate update;
    update.id = spec.id;
    update.urgency = spec.urgency;
    update.submitted_at = spec.at;
    update.version = spec.version;
    updates_.push_back(update);
    update_applied_via_.emplace_back();
    schedule(spec.at, [this, i]() { on_update_submitted(i); });
  }
  schedule_polls();
  if (config_.detection.metrics_enabled) {
    schedule(config_.detection.metric_sample_interval,
             [this]() { metric_tick(); });
  }

  if (config_.horizon_steps == 0) {
    final_state_ = "completed";
    finished_ = true;
    phase_ = JobPhase::done;
  } else {
    start_step();
  }

  std::uint64_t processed = 0;
  while (!queue_.empty() && !finished_) {
    QueuedEvent event = queue_.top();
    queue_.pop();
    if (event.at < now_) {
      throw std::logic_error("simkernel: time went backwards");
    }
    now_ = event.at;
    event.fn();
    if (++processed > kMaxEvents) {
      throw std::logic_error("simkernel: event budget exceeded");
    }
  }
  if (!finished_) {
    // Queue drained with the job still incomplete (no further events can
    // advance it). Close the ledger where it stands.
    halt_run("stuck");
  }
  return build_report();
}

SimReport Simulator::build_report() {
  SimReport report;
  report.final_state = final_state_;
  report.end_time = ledger_.end_time();
  report.steps_completed = steps_done_;
  report.ledger = ledger_;
  report.incidents = closed_incidents_;
  report.alerts = alert_records_;
  report.ettr_cumulative = ettr_series_cumulative(ledger_);
  report.ettr_sliding = ettr_series_sliding(ledger_, config_.ettr_window);
  report.final_cumulative_ettr =
      ettr_cumulative_at(ledger_, report.end_time);
  report.resolution_breakdown = resolution_breakdown_;
  report.trace = trace_;

  for (std::size_t i = 0; i < updates_.size(); ++i) {
    UpdateRecord record;
    record.id = updates_[i].id;
    record.urgency =
        updates_[i].urgency == UpdateUrgency::urgent ? "urgent" : "lazy";
    record.submitted_at = updates_[i].submitted_at;
    record.applied_at = updates_[i].applied_at.value_or(-1);
    record.applied_via = update_applied_via_[i];
    report.updates.push_back(std::move(record));
  }

  for (const MachineState& machine : machines_) {
    MachineRecord record;
    record.id = machine.id;
    record.slot = machine.slot;
    switch (machine.health) {
      case MachineHealth::healthy:
        record.health = "healthy";
        break;
      case MachineHealth::degraded:
        record.health = "degraded";
        break;
      case MachineHealth::faulty:
        record.health = "faulty";
        break;
      case MachineHealth::evicted:
        record.health = "evicted";
        break;
      case MachineHealth::standby_warm:
        record.health = "standby-warm";
        break;
      case MachineHealth::standby_init:
        record.health = "standby-initializing";
        break;
      case MachineHealth::retired:
        record.health = "retired";
        break;
    }
    report.machines.push_back(std::move(record));
  }
  return report;
}

SimReport run_scenario(const ScenarioConfig& config) {
  Simulator simulator(config);
  return simulator.run();
}

}  // namespace robustsim
