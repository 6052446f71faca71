// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "robustsim/diagnosis.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace robustsim {

std::vector<int> DiagnosticVerdict::failing_machines() const {
  std::set<int> failing;
  for (const auto& [test, outcomes] : passed) {
    for (const auto& [machine, ok] : outcomes) {
      if (!ok) {
        failing.insert(machine);
      }
    }
  }
  return std::vector<int>(failing.begin(), failing.end());
}

bool DiagnosticVerdict::all_passed() const {
  for (const auto& [test, outcomes] : passed) {
    for (const auto& [machine, ok] : outcomes) {
      if (!ok) {
        return false;
      }
    }
  }
  return true;
}

namespace {

bool fault_touches(const ActiveFaultView& fault, int machine) {
  return std::find(fault.machines.begin(), fault.machines.end(), machine) !=
         fault.machines.end();
}

}  // namespace

DiagnosticVerdict run_diagnose_ladder(std::span<const int> machines,
                                      std::span<const ActiveFaultView> faults,
                                      const DiagnosisConfig& config,
                                      SplitRng rng) {
  DiagnosticVerdict verdict;
  for (int machine : machines) {
    bool gpu_fail = false;
    bool intra_fail = false;
    bool inter_fail = false;
    for (const ActiveFaultView& fault : faults) {
      if (!fault_touches(fault, machine)) {
        continue;
      }
      if (fault.kind == FaultKind::sdc) {
        if (rng.bernoulli(config.sdc_diagnose_recall)) {
          gpu_fail = true;
        }
        continue;
      }
      if (gpu_test_detects(fault.kind)) {
        gpu_fail = true;
      }
      if (intra_comm_test_detects(fault.kind)) {
        intra_fail = true;
      }
      if (inter_comm_test_detects(fault.kind)) {
        inter_fail = true;
      }
    }
    if (config.test_false_negative_rate > 0.0) {
      if (gpu_fail && rng.bernoulli(config.test_false_negative_rate)) {
        gpu_fail = false;
      }
      if (intra_fail && rng.bernoulli(config.test_false_negative_rate)) {
        intra_fail = false;
      }
      if (inter_fail && rng.bernoulli(config.test_false_negative_rate)) {
        inter_fail = false;
      }
    }
    verdict.passed[DiagTest::gpu_check][machine] = !gpu_fail;
    verdict.passed[DiagTest::intra_comm][machine] = !intra_fail;
    verdict.passed[DiagTest::inter_comm][machine] = !inter_fail;
  }
  return verdict;
}

DiagnosticVerdict run_align_test(std::span<const int> machines,
                                 std::span<const ActiveFaultView> faults,
                                 const DiagnosisConfig& config, SplitRng rng) {
  DiagnosticVerdict verdict;
  for (int machine : machines) {
    bool fail = false;
    for (const ActiveFaultView& fault : faults) {
      if (fault.kind == FaultKind::sdc && fault_touches(fault, machine) &&
          rng.bernoulli(config.align_recall)) {
        fail = true;
      }
    }
    verdict.passed[DiagTest::bitwise_align][machine] = !fail;
  }
  return verdict;
}

ReplayResult dual_phase_replay(int z, int m, int faulty) {
  if (z < 1 || m < 1 || z % m != 0) {
    throw std::invalid_argument(
        "dual_phase_replay: group size must divide the machine count");
  }
  if (faulty < 0 || faulty >= z) {
    throw std::out_of_range("dual_phase_replay: faulty machine out of range");
  }
  const int n = z / m;
  ReplayResult result;
  result.z = z;
  result.group_size = m;
  result.group_count = n;
  result.horizontal_group = faulty / m;
  result.vertical_group = faulty % n;
  for (int x = 0; x < z; ++x) {
    if (x / m == result.horizontal_group && x % n == result.vertical_group) {
      result.suspects.push_back(x);
    }
  }
  return result;
}

int replay_cardinality_bound(int m, int n) {
  if (m <= n) {
    return 1;
  }
  return (m + n - 1) / n;
}

int recommended_replay_group_size(int z, int pp_size) {
  if (z < 1) {
    throw std::invalid_argument("recommended_replay_group_size: z must be >= 1");
  }
  int best = 0;
  if (pp_size >= 1) {
    for (int m = pp_size; m * m <= z; m += pp_size) {
      if (z % m == 0) {
        best = m;  // largest k*pp_size with m <= n
      }
    }
  }
  if (best == 0) {
    for (int m = 1; m * m <= z; ++m) {
      if (z % m == 0) {
        best = m;
      }
    }
  }
  return best;
}

const char* stage_name(Stage stage) {
  switch (stage) {
    case Stage::diagnose:
      return "diagnose";
    case Stage::reattempt:
      return "reattempt";
    case Stage::rollback:
      return "rollback";
    case Stage::replay:
      return "replay";
    case Stage::resolved:
      return "resolved";
    case Stage::escalated:
      return "escalated";
  }
  return "?";
}

const char* resolution_label_name(ResolutionLabel label) {
  switch (label) {
    case ResolutionLabel::evict_realtime:
      return "evict-realtime";
    case ResolutionLabel::evict_diagnose:
      return "evict-diagnose";
    case ResolutionLabel::reattempt:
      return "reattempt";
    case ResolutionLabel::rollback:
      return "rollback";
    case ResolutionLabel::replay:
      return "replay";
    case ResolutionLabel::aggregation:
      return "aggregation";
  }
  return "?";
}

}  // namespace robustsim
