// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "robustsim/ckptplan.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace robustsim {

const char* ckpt_policy_name(CkptPolicy policy) {
  switch (policy) {
    case CkptPolicy::byterobust_async:
      return "byterobust-async";
    case CkptPolicy::memory_save:
      return "memory-save";
    case CkptPolicy::megatron_blocking:
      return "megatron-blocking";
  }
  return "?";
}

std::optional<CkptPolicy> ckpt_policy_from_name(const std::string& name) {
  if (name == "byterobust-async") return CkptPolicy::byterobust_async;
  if (name == "memory-save") return CkptPolicy::memory_save;
  if (name == "megatron-blocking") return CkptPolicy::megatron_blocking;
  return std::nullopt;
}

namespace {

void check_durations(const CkptDurations& d) {
  if (d.d2h_s <= 0.0 || d.serialize_s <= 0.0 || d.send_s <= 0.0) {
    throw std::invalid_argument("checkpoint durations must be positive");
  }
}

}  // namespace

SimTimeMs step_stall(CkptPolicy policy, const CkptDurations& durations,
                     SimTimeMs compute_ms) {
  check_durations(durations);
  const SimTimeMs d2h = ms_from_s(durations.d2h_s);
  const SimTimeMs serialize = ms_from_s(durations.serialize_s);
  switch (policy) {
    case CkptPolicy::megatron_blocking:
      return d2h + serialize;
    case CkptPolicy::memory_save:
      return std::max<SimTimeMs>(0, d2h - compute_ms);
    case CkptPolicy::byterobust_async:
      return std::max<SimTimeMs>(0, d2h - compute_ms);
  }
  return 0;
}

CkptTimeline::CkptTimeline(CkptPolicy policy, const CkptDurations& durations)
    : policy_(policy),
      d2h_ms_(ms_from_s(durations.d2h_s)),
      serialize_ms_(ms_from_s(durations.serialize_s)),
      send_ms_(ms_from_s(durations.send_s)) {
  check_durations(durations);
}

StepCkptRecord CkptTimeline::on_step(std::int64_t step, SimTimeMs work_start,
                                     SimTimeMs compute_ms) {
  StepCkptRecord rec;
  rec.step = step;
  const SimTimeMs optimizer_ready = work_start + compute_ms;

  switch (policy_) {
    case CkptPolicy::megatron_blocking: {
      // Synchronous save at the step boundary; no backup send.
      rec.stall = d2h_ms_ + serialize_ms_;
      rec.d2h_done = optimizer_ready + d2h_ms_;
      rec.serialize_done = rec.d2h_done + serialize_ms_;
      rec.backup_done = 0;
      break;
    }
    case CkptPolicy::memory_save: {
      // D2H overlapped with compute, leftover blocks the optimizer; the peer
      // backup transfer rides behind serialization.
      rec.stall = std::max<SimTimeMs>(0, d2h_ms_ - compute_ms);
      rec.d2h_done = work_start + std::max(d2h_ms_, compute_ms);
      rec.serialize_done = rec.d2h_done + serialize_ms_;
      rec.backup_done = rec.serialize_done + send_ms_;
      break;
    }
    case CkptPolicy::byterobust_async: {
      const int slot = static_cast<int>(step & 1);
      if (buffer_free_[slot] > work_start) {
        // The buffer is still draining when this step begins: drop the
        // snapshot rather than letting the copy backlog block the optimizer.
        rec.skipped = true;
        rec.stall = 0;
        break;
      }
      const SimTimeMs d2h_start = work_start;
      rec.d2h_done = d2h_start + d2h_ms_;
      rec.stall = std::max<SimTimeMs>(0, rec.d2h_done - optimizer_ready);
      serializer_free_ = std::max(serializer_free_, rec.d2h_done);
      rec.serialize_done = serializer_free_ + serialize_ms_;
      serializer_free_ = rec.serialize_done;
      sender_free_ = std::max(sender_free_, rec.serialize_done);
      rec.backup_done = sender_free_ + send_ms_;
      sender_free_ = rec.backup_done;
      buffer_free_[slot] = rec.backup_done;  // buffer released after send
      break;
    }
  }

  if (!rec.skipped) {
    SimTimeMs release =
        std::max({rec.d2h_done, rec.serialize_done, rec.backup_done});
    inflight_release_.push_back(release);
    if (inflight_release_.size() > 8) {
      inflight_release_.erase(inflight_release_.begin());
    }
  }
  return rec;
}

int CkptTimeline::in_flight(SimTimeMs now) const {
  int count = 0;
  for (SimTimeMs release : inflight_release_) {
    if (release > now) {
      ++count;
    }
  }
  return count;
}

void ShardLedger::prune_before(std::int64_t step) {
  for (auto it = records.begin(); it != records.end();) {
    if (it->first < step) {
      it = records.erase(it);
    } else {
      ++it;
    }
  }
}

std::optional<RecoveryPoint> latest_recoverable(
    const ShardLedger& ledger, std::span<const int> evicted_machines,
    const ParallelTopology& topo, const BackupPlan& plan, SimTimeMs now) {
  std::set<int> evicted(evicted_machines.begin(), evicted_machines.end());

  for (auto it = ledger.records.rbegin(); it != ledger.records.rend(); ++it) {
    const std::int64_t step = it->first;
    const StepCkptRecord& rec = it->second;
    if (rec.skipped) {
      continue;
    }

    RecoveryPoint point;
    point.step = step;
    point.sources.resize(static_cast<std::size_t>(topo.rank_count()),
                         ShardSource::own_copy);
    bool ok = true;
    for (int rank = 0; rank < topo.rank_count() && ok; ++rank) {
      const std::size_t r = static_cast<std::size_t>(rank);
      const bool own_alive = !evicted.count(topo.machine_of(rank));
      const bool own_ready = step >= ledger.own_since[r] &&
                             rec.serialize_done > 0 &&
                             rec.serialize_done <= now;
      if (own_alive && own_ready) {
        point.sources[r] = ShardSource::own_copy;
        continue;
      }
      const int peer = plan.peer_of[r];
      const bool backup_alive = !evicted.count(topo.machine_of(peer));
      const bool backup_ready = step >= ledger.backup_since[r] &&
                                rec.backup_done > 0 && rec.backup_done <= now;
      if (backup_alive && backup_ready) {
        point.sources[r] = ShardSource::backup_copy;
        point.any_backup = true;
        continue;
      }
      ok = false;
    }
    if (ok) {
      return point;
    }
  }
  return std::nullopt;
}

}  // namespace robustsim
