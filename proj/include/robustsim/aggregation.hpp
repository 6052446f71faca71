// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robustsim/topology.hpp"

namespace robustsim {

enum class ProcessRole { trainer, dataloader, checkpointer };

const char* process_role_name(ProcessRole role);
std::optional<ProcessRole> process_role_from_name(const std::string& name);

struct StackEntry {
  ProcessRole role = ProcessRole::trainer;
  std::string signature;
};

/// Captured stacks, per machine. Signatures are compared after identifier
/// stripping so that healthy machines actually collapse into one group.
struct StackSnapshot {
  std::map<int, std::vector<StackEntry>> machines;
};

struct StackGrouping {
  // role-qualified normalized signature -> machines carrying it
  std::map<std::string, std::vector<int>> groups;
  std::vector<int> dominant;
  std::vector<int> outliers;
  double dominant_share = 0.0;
};

/// Removes per-machine identifiers from a stack frame: rank numbers, pid
/// numbers, hex addresses. "irecv(rank 13)" and "irecv(rank 5)" normalize to
/// the same string.
std::string strip_identifiers(std::string_view frame);

/// Exact string-equality grouping per process role. The largest group per
/// role is dominant (ties: all tied groups are dominant); outliers are the
/// union across roles of every machine in a non-dominant group. A uniform
/// snapshot yields no outliers.
StackGrouping cluster(const StackSnapshot& snapshot);

/// Machines to evict for the outliers: the machines of their shared parallel
/// group when one exists, otherwise the outlier machines themselves.
std::vector<int> isolate(const StackGrouping& grouping,
                         const ParallelTopology& topo);

/// One fail-slow round: the machine span (PP first, then DP, then TP;
/// lowest span index on ties) holding the most outliers, or nullopt when the
/// round has no outliers.
std::optional<std::vector<int>> flag_round(const StackGrouping& grouping,
                                           const ParallelTopology& topo);

/// Repeated-round degrader vote over the given snapshots (5 rounds at 10 s
/// spacing in the simulator). Returns the span with the highest cumulative
/// flag count, or nullopt when no round flagged anything.
std::optional<std::vector<int>> fail_slow_rounds(
    std::span<const StackSnapshot> rounds, const ParallelTopology& topo);

}  // namespace robustsim
