// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "robustsim/time.hpp"

namespace robustsim {

enum class FaultKind {
  nic_crash,
  port_flapping,
  switch_down,
  gpu_driver_hang,
  gpu_high_temp,
  gpu_lost,
  os_kernel_fault,
  cuda_error,
  user_code_bug,
  transient_comm,
  sdc,
  hang,
  fail_slow,
  nan_loss,
  hdfs_error,
};

enum class Observability { inspectable, log_visible, metric_visible, silent };

/// Hardware item an inspection thread can query.
enum class InspectionItem {
  nic,
  port,
  switch_fabric,
  gpu_driver,
  gpu_temp,
  gpu_lost,
  os_kernel,
  pcie_bandwidth,
  row_remapping,
  packet_loss_rate,
};

/// One scripted fault. Fields beyond (kind, onset, machines) apply only to
/// specific kinds and are ignored elsewhere.
struct FaultEvent {
  int id = 0;
  FaultKind kind = FaultKind::cuda_error;
  SimTimeMs onset = 0;
  std::optional<SimTimeMs> duration;  // nullopt = permanent until evicted
  std::vector<int> machines;

  // hang / fail-slow: per-machine stack signature emitted while active.
  std::map<int, std::string> signatures;

  // fail-slow: throughput factor in (0,1] and which aggregation rounds the
  // distinct signature shows up in (empty = every round).
  double slowdown = 0.5;
  std::vector<int> visible_rounds;

  // sdc: delay from onset until the loss metric turns NaN.
  SimTimeMs nan_delay = 120 * kMsPerSecond;

  // user-code-bug: module named in logs (empty = untraceable) and the code
  // version that carries the bug (empty = whatever version is live at onset).
  // A bug with nan_symptom corrupts the loss instead of crashing, so it
  // surfaces through the metric monitor rather than logs.
  std::string module_tag;
  std::string introduced_in;
  bool nan_symptom = false;

  friend bool operator==(const FaultEvent&, const FaultEvent&) = default;
};

Observability observability(FaultKind kind);

/// Active fault freezes training progress (synchronous job blocked).
bool stalls_training(FaultKind kind);

/// Active fault kills training processes; surfaces through logs/exit codes.
bool crashes_job(FaultKind kind);

/// Inspection item that surfaces the kind, if any.
std::optional<InspectionItem> inspection_item_of(FaultKind kind);

// Ground-truth visibility to the stop-time test ladder.
bool gpu_test_detects(FaultKind kind);
bool inter_comm_test_detects(FaultKind kind);
bool intra_comm_test_detects(FaultKind kind);

/// Kinds a reduced-scale replay reproduces when the faulty machine is in the
/// replayed group (machine-local defects, not job-level code/data issues).
bool replay_reproducible(FaultKind kind);

const char* fault_kind_name(FaultKind kind);
std::optional<FaultKind> fault_kind_from_name(const std::string& name);
const char* inspection_item_name(InspectionItem item);
std::optional<InspectionItem> inspection_item_from_name(
    const std::string& name);

}  // namespace robustsim
