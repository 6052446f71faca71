// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robustsim/aggregation.hpp"
#include "robustsim/ckptplan.hpp"
#include "robustsim/detection.hpp"
#include "robustsim/diagnosis.hpp"
#include "robustsim/fault.hpp"
#include "robustsim/recovery.hpp"
#include "robustsim/time.hpp"
#include "robustsim/topology.hpp"

namespace robustsim {

struct TopologySpec {
  int tp = 2;
  int pp = 2;
  int dp = 2;
  int ranks_per_machine = 1;

  ParallelTopology build() const {
    return ParallelTopology(tp, pp, dp, ranks_per_machine);
  }

  friend bool operator==(const TopologySpec&, const TopologySpec&) = default;
};

struct AggregationConfig {
  SimTimeMs snapshot_capture = 10 * kMsPerSecond;
  int fail_slow_rounds = 5;
  SimTimeMs round_spacing = 10 * kMsPerSecond;

  friend bool operator==(const AggregationConfig&,
                         const AggregationConfig&) = default;
};

struct UpdateSpec {
  std::string id;
  SimTimeMs at = 0;
  UpdateUrgency urgency = UpdateUrgency::lazy;
  std::string version;

  friend bool operator==(const UpdateSpec&, const UpdateSpec&) = default;
};

struct RecoveryConfig {
  RecoveryParams params;
  double daily_fail_prob = 0.001;
  double pool_quantile = 0.99;
  int pool_target = -1;  // -1 = size from the binomial P99
  int spare_machines = 64;
  std::vector<UpdateSpec> updates;

  friend bool operator==(const RecoveryConfig&,
                         const RecoveryConfig&) = default;
};

struct CheckpointConfig {
  CkptPolicy policy = CkptPolicy::byterobust_async;
  CkptDurations durations;
  std::int64_t remote_interval_steps = 100;

  friend bool operator==(const CheckpointConfig& a, const CheckpointConfig& b) {
    return a.policy == b.policy && a.durations.d2h_s == b.durations.d2h_s &&
           a.durations.serialize_s == b.durations.serialize_s &&
           a.durations.send_s == b.durations.send_s &&
           a.remote_interval_steps == b.remote_interval_steps;
  }
};

/// Everything one run needs. Parsing is strict: unknown keys are rejected
/// with their full path, and validation runs before any event executes.
struct ScenarioConfig {
  TopologySpec topology;
  std::int64_t horizon_steps = 1000;
  double step_duration_s = 15.0;
  std::uint64_t seed = 1;
  std::string initial_version = "v1";
  std::vector<FaultEvent> faults;
  DetectionConfig detection;
  DiagnosisConfig diagnosis;
  AggregationConfig aggregation;
  RecoveryConfig recovery;
  CheckpointConfig checkpoint;
  SimTimeMs ettr_window = 3600 * kMsPerSecond;

  SimTimeMs step_duration_ms() const { return ms_from_s(step_duration_s); }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  friend bool operator==(const ScenarioConfig&,
                         const ScenarioConfig&) = default;
};

ScenarioConfig scenario_from_json_string(const std::string& text);
ScenarioConfig scenario_from_file(const std::string& path);
std::string scenario_to_json_string(const ScenarioConfig& config);

/// Stack-snapshot fixture: a topology plus captured per-machine stacks, for
/// replaying real traces through the aggregation path offline.
struct SnapshotFixture {
  TopologySpec topology;
  StackSnapshot snapshot;
};

SnapshotFixture snapshot_fixture_from_json_string(const std::string& text);
SnapshotFixture snapshot_fixture_from_file(const std::string& path);
std::string snapshot_fixture_to_json_string(const SnapshotFixture& fixture);

}  // namespace robustsim
