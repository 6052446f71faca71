// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "robustsim/fault.hpp"
#include "robustsim/rng.hpp"
#include "robustsim/time.hpp"

namespace robustsim {

enum class DiagTest { gpu_check, intra_comm, inter_comm, bitwise_align };

/// Per-machine pass/fail outcome for each executed test.
struct DiagnosticVerdict {
  std::map<DiagTest, std::map<int, bool>> passed;

  std::vector<int> failing_machines() const;
  bool all_passed() const;
};

struct DiagnosisConfig {
  double test_false_negative_rate = 0.0;
  double sdc_diagnose_recall = 0.0;  // visibility of SDC to gpu/comm tests
  double align_recall = 0.7;         // bit-wise alignment test recall on SDC
  SimTimeMs diagnose_duration = 120 * kMsPerSecond;
  SimTimeMs align_duration = 60 * kMsPerSecond;
  SimTimeMs replay_step_duration = 120 * kMsPerSecond;  // per phase
  int replay_group_size = 0;  // 0 = derive from pp_size

  friend bool operator==(const DiagnosisConfig&,
                         const DiagnosisConfig&) = default;
};

/// Summary of one active fault as visible to stop-time tests.
struct ActiveFaultView {
  FaultKind kind = FaultKind::cuda_error;
  std::vector<int> machines;
};

/// Test ladder: gpu check, then intra-machine comm, then inter-machine comm.
/// Outcomes are ground-truthed by the active faults, thinned by the
/// configured false-negative rate. SDC visibility uses its own recall knob.
DiagnosticVerdict run_diagnose_ladder(std::span<const int> machines,
                                      std::span<const ActiveFaultView> faults,
                                      const DiagnosisConfig& config,
                                      SplitRng rng);

/// Bit-wise alignment test: one deterministic training step per machine with
/// output comparison. Catches SDC machines with probability `align_recall`.
DiagnosticVerdict run_align_test(std::span<const int> machines,
                                 std::span<const ActiveFaultView> faults,
                                 const DiagnosisConfig& config, SplitRng rng);

/// Dual-phase replay localization over z machines indexed 0..z-1.
///
/// Phase 1 partitions by floor(x/m) into n = z/m groups and replays each;
/// phase 2 re-partitions by x mod n. The suspect set is the intersection of
/// the two failing groups' congruences:
///
///   S = { x : floor(x/m) = a  and  x mod n = b }
///
/// |S| = 1 whenever m <= n; for m > n the set has floor(m/n) or ceil(m/n)
/// elements depending on alignment (see replay_cardinality_bound).
struct ReplayResult {
  int z = 0;
  int group_size = 0;   // m
  int group_count = 0;  // n
  int horizontal_group = 0;  // a
  int vertical_group = 0;    // b
  std::vector<int> suspects;
};

ReplayResult dual_phase_replay(int z, int m, int faulty);

/// The nominal suspect-set cardinality: 1 if m <= n, else ceil(m/n). Exact
/// when m <= n or n divides m; otherwise an upper bound.
int replay_cardinality_bound(int m, int n);

/// Group size for replay: the largest multiple of pp_size that divides z and
/// keeps m <= n; falls back to the largest divisor of z not exceeding
/// sqrt(z) when no pp_size multiple divides z.
int recommended_replay_group_size(int z, int pp_size);

/// Stop-time pipeline stages in escalation order.
enum class Stage {
  diagnose,
  reattempt,
  rollback,
  replay,
  resolved,
  escalated,
};

const char* stage_name(Stage stage);

enum class ResolutionLabel {
  evict_realtime,
  evict_diagnose,
  reattempt,
  rollback,
  replay,
  aggregation,
};

const char* resolution_label_name(ResolutionLabel label);

}  // namespace robustsim
