// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace robustsim {

enum class Axis { TP, PP, DP };

const char* axis_name(Axis axis);

/// Per-rank position in the 3D parallel decomposition.
struct RankCoord {
  int tp = 0;
  int pp = 0;
  int dp = 0;

  auto operator<=>(const RankCoord&) const = default;
};

/// Static geometry of a 3D-parallel job: axis sizes plus the rank-to-machine
/// packing. Rank layout is TP-fastest, then PP, then DP:
///
///   rank = dp * (pp_size * tp_size) + pp * tp_size + tp
///
/// Machines host `ranks_per_machine` consecutive ranks each.
class ParallelTopology {
 public:
  ParallelTopology(int tp_size, int pp_size, int dp_size,
                   int ranks_per_machine = 1);

  int tp_size() const { return tp_size_; }
  int pp_size() const { return pp_size_; }
  int dp_size() const { return dp_size_; }
  int ranks_per_machine() const { return ranks_per_machine_; }
  int rank_count() const { return rank_count_; }
  int machine_count() const { return machine_count_; }
  int axis_size(Axis axis) const;

  RankCoord rank_to_coord(int rank) const;
  int coord_to_rank(const RankCoord& coord) const;

  int machine_of(int rank) const;
  std::vector<int> ranks_on_machine(int machine) const;
  std::vector<int> machines_of_ranks(std::span<const int> ranks) const;

  std::string describe() const;

  friend bool operator==(const ParallelTopology&,
                         const ParallelTopology&) = default;

 private:
  void check_rank(int rank) const;
  void check_coord(const RankCoord& coord) const;

  int tp_size_;
  int pp_size_;
  int dp_size_;
  int ranks_per_machine_;
  int rank_count_;
  int machine_count_;
};

/// One parallel-group instance: ranks varying along `axis` with the other two
/// coordinates pinned by `base` (whose `axis` coordinate is normalized to 0).
struct GroupRef {
  Axis axis = Axis::TP;
  RankCoord base;

  auto operator<=>(const GroupRef&) const = default;
};

GroupRef group_of(int rank, Axis axis, const ParallelTopology& topo);

/// Members of a group instance, sorted ascending.
std::vector<int> group_members(const GroupRef& group,
                               const ParallelTopology& topo);

/// Machines hosting the group's members, sorted and deduplicated.
std::vector<int> group_machines(const GroupRef& group,
                                const ParallelTopology& topo);

/// All group instances on one axis, in deterministic (base-coordinate) order.
std::vector<GroupRef> groups_on_axis(Axis axis, const ParallelTopology& topo);

/// Distinct machine footprints of the axis' group instances, deduplicated and
/// in first-appearance order. The unit fail-slow round flagging counts over.
std::vector<std::vector<int>> machine_spans(Axis axis,
                                            const ParallelTopology& topo);

/// Smallest group instance whose machine footprint covers every machine
/// hosting an outlier rank. Ties on size prefer PP, then DP, then TP.
/// Returns nullopt when no single-axis instance covers the set; callers then
/// evict the outlier machines directly. With one rank per machine the
/// machine-footprint cover reduces to plain rank-set containment.
std::optional<GroupRef> shared_group(std::span<const int> outlier_ranks,
                                     const ParallelTopology& topo);

/// Checkpoint-exchange pairing over all ranks.
///
/// Primary rule (pp_size and dp_size even):
///   peer(tp, pp, dp) = (tp, pp ^ 1, (dp + dp_size/2) mod dp_size)
/// which is an involution, shares no TP/PP/DP group instance with the rank,
/// and exchanges whole machines. When the primary rule does not apply or
/// fails validation, a deterministic greedy machine-level matching is tried;
/// when no constraint-satisfying matching exists (single parallel group),
/// the plan degrades to neighboring-machine pairing (machine i <-> i XOR 1),
/// flagged via `neighbor_fallback`.
struct BackupPlan {
  std::vector<int> peer_of;  // indexed by rank
  bool neighbor_fallback = false;
};

BackupPlan plan_backups(const ParallelTopology& topo);

int backup_peer(int rank, const ParallelTopology& topo);

/// True when the pair violates none of the cross-group constraints: distinct
/// ranks sharing no TP, PP, or DP group instance.
bool cross_group_ok(int rank, int peer, const ParallelTopology& topo);

}  // namespace robustsim
