// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robustsim/time.hpp"
#include "robustsim/topology.hpp"

namespace robustsim {

enum class CkptPolicy { byterobust_async, memory_save, megatron_blocking };

const char* ckpt_policy_name(CkptPolicy policy);
std::optional<CkptPolicy> ckpt_policy_from_name(const std::string& name);

struct CkptDurations {
  double d2h_s = 5.0;
  double serialize_s = 2.0;
  double send_s = 3.0;
};

/// Per-step checkpoint outcome on the pipeline timeline. Times are absolute;
/// a skipped step saved nothing (async backpressure: both buffers busy when
/// the optimizer arrived, so the snapshot is dropped rather than stalling
/// training).
struct StepCkptRecord {
  std::int64_t step = 0;
  bool skipped = false;
  SimTimeMs stall = 0;
  SimTimeMs d2h_done = 0;
  SimTimeMs serialize_done = 0;
  SimTimeMs backup_done = 0;
};

/// Steady-state per-step stall added to training:
///   megatron-blocking: d2h + serialize, synchronous at the step boundary
///   memory-save:       max(0, d2h - compute) -- D2H overlapped with the
///                      next step's forward/backward, leftover blocks
///   byterobust-async:  max(0, d2h - compute) when a buffer is free at the
///                      optimizer, else 0 with the snapshot skipped
SimTimeMs step_stall(CkptPolicy policy, const CkptDurations& durations,
                     SimTimeMs compute_ms);

/// Incremental dual-buffer pipeline. Call on_step once per training step in
/// order; `work_start` is when the step's compute begins and `compute_ms` its
/// forward+backward+optimizer duration before any checkpoint stall.
class CkptTimeline {
 public:
  CkptTimeline(CkptPolicy policy, const CkptDurations& durations);

  StepCkptRecord on_step(std::int64_t step, SimTimeMs work_start,
                         SimTimeMs compute_ms);

  /// Steps whose checkpoint data is still in flight at `now` (dual-buffer
  /// invariant: never more than 2).
  int in_flight(SimTimeMs now) const;

 private:
  CkptPolicy policy_;
  SimTimeMs d2h_ms_;
  SimTimeMs serialize_ms_;
  SimTimeMs send_ms_;
  // release times of the two buffers, and host-pipeline availability
  SimTimeMs buffer_free_[2] = {0, 0};
  SimTimeMs serializer_free_ = 0;
  SimTimeMs sender_free_ = 0;
  std::vector<SimTimeMs> inflight_release_;
};

/// Which machines hold which steps. Completion times are global (all ranks
/// share the pipeline schedule); per-rank floors track machine replacement:
/// a freshly scheduled machine holds its own shards only from the step it
/// joined at, and a rank whose backup peer was replaced has backups only from
/// that step onward.
struct ShardLedger {
  explicit ShardLedger(int rank_count)
      : own_since(static_cast<std::size_t>(rank_count), 0),
        backup_since(static_cast<std::size_t>(rank_count), 0) {}

  std::map<std::int64_t, StepCkptRecord> records;
  std::vector<std::int64_t> own_since;
  std::vector<std::int64_t> backup_since;
  std::int64_t last_remote_step = -1;  // coarse remote tier, every N steps

  void record(const StepCkptRecord& rec) { records[rec.step] = rec; }
  void prune_before(std::int64_t step);
};

enum class ShardSource : std::uint8_t { own_copy, backup_copy };

struct RecoveryPoint {
  std::int64_t step = 0;
  std::vector<ShardSource> sources;  // per rank
  bool any_backup = false;
};

/// Latest step restorable after evicting `evicted_machines`: every rank's
/// shard must survive on its owner (serialized copy, owner alive) or on its
/// backup peer (backup stored, peer machine alive). Returns nullopt when no
/// in-memory step survives; callers fall back to the remote tier.
std::optional<RecoveryPoint> latest_recoverable(
    const ShardLedger& ledger, std::span<const int> evicted_machines,
    const ParallelTopology& topo, const BackupPlan& plan, SimTimeMs now);

}  // namespace robustsim
