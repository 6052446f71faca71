// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robustsim/time.hpp"

namespace robustsim {

/// P(X <= k) for X ~ Binomial(n, p), summed exactly via a multiplicative
/// pmf recurrence in log space. No normal approximation.
double binomial_cdf(int n, double p, int k);

/// Smallest pool size s with Binomial(machine_count, daily_fail_prob)
/// CDF(s) >= quantile.
int size_pool(int machine_count, double daily_fail_prob,
              double quantile = 0.99);

struct RecoveryParams {
  double wake_s = 30.0;            // warm standby activation
  double init_s = 600.0;           // fresh machine: schedule + pod init
  double restart_s = 60.0;         // in-place process restart
  double restore_s = 30.0;         // load in-memory checkpoint
  double remote_restore_s = 600.0;  // load remote-tier checkpoint
  double quarantine_s = 3600.0;    // over-evicted machine offline testing
  SimTimeMs lazy_update_window = 86400 * kMsPerSecond;

  friend bool operator==(const RecoveryParams&,
                         const RecoveryParams&) = default;
};

enum class RestartPolicy { requeue, reschedule, oracle, ours };

const char* restart_policy_name(RestartPolicy policy);
std::optional<RestartPolicy> restart_policy_from_name(const std::string& name);

/// Job teardown + whole-fleet reallocation overhead, linearly interpolated
/// between measured scale points (128..1024 machines, clamped outside).
double requeue_teardown_s(int scale_machines);

/// In-place hot-update restart time at scale, same interpolation.
double hot_update_restart_s(int scale_machines);

/// Scheduling time (failure localization to job resume) for one eviction
/// scenario under a restart policy:
///   requeue:    teardown(scale) + fleet pod init
///   reschedule: pod init for the evicted machines (parallel, one init)
///   oracle:     warm wake only (unlimited standbys)
///   ours:       warm wake when the pool covers the evictions, otherwise
///               the shortfall's fresh init gates the restart
double policy_downtime_s(RestartPolicy policy, int evictions, int pool_warm,
                         const RecoveryParams& params, int scale_machines);

/// Weighted-average scheduling time: eviction counts 1..P99 weighted by the
/// binomial mass (renormalized to 1 - catastrophic_mass), plus a catastrophic
/// scenario at fixed mass.
struct WasRow {
  int scale_machines = 0;
  int pool_size = 0;
  std::map<RestartPolicy, double> was_s;

  friend bool operator==(const WasRow&, const WasRow&) = default;
};

std::vector<WasRow> was_table(std::span<const int> scales,
                              double daily_fail_prob, double quantile,
                              const RecoveryParams& params,
                              std::span<const RestartPolicy> policies,
                              int catastrophic_evictions = 32,
                              double catastrophic_mass = 0.01);

enum class UpdateUrgency { urgent, lazy };

struct HotUpdate {
  std::string id;
  UpdateUrgency urgency = UpdateUrgency::lazy;
  SimTimeMs submitted_at = 0;
  std::string version;
  std::optional<SimTimeMs> applied_at;
};

enum class StandbyState { initializing, warm };

/// Warm-standby pool bookkeeping. Machine identities are owned by the
/// simulator; the pool tracks membership and state only.
class StandbyPool {
 public:
  explicit StandbyPool(int target) : target_(target) {}

  int target() const { return target_; }
  int warm_count() const;
  int initializing_count() const;
  int size() const { return static_cast<int>(members_.size()); }

  void add(int machine, StandbyState state);
  void mark_warm(int machine);
  /// Withdraws up to `count` warm machines, lowest id first.
  std::vector<int> withdraw_warm(int count);
  bool contains(int machine) const;

  const std::map<int, StandbyState>& members() const { return members_; }

 private:
  int target_;
  std::map<int, StandbyState> members_;
};

}  // namespace robustsim
