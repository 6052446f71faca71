// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "robustsim/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace robustsim {

double binomial_cdf(int n, double p, int k) {
  if (n < 0) {
    throw std::invalid_argument("binomial_cdf: n must be >= 0");
  }
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("binomial_cdf: p must be in [0, 1]");
  }
  if (k < 0) {
    return 0.0;
  }
  if (k >= n || p == 0.0) {
    return 1.0;
  }
  if (p == 1.0) {
    return 0.0;  // all n fail; CDF below n is zero (k < n here)
  }

  // pmf(0) in log space, then the stable term recurrence
  //   pmf(i+1) = pmf(i) * (n - i) / (i + 1) * p / (1 - p)
  // accumulated from the small leading terms upward.
  const double log_ratio = std::log(p) - std::log1p(-p);
  double log_term = static_cast<double>(n) * std::log1p(-p);
  double cdf = 0.0;
  for (int i = 0;; ++i) {
    cdf += std::exp(log_term);
    if (i == k) {
      break;
    }
    log_term += std::log(static_cast<double>(n - i)) -
                std::log(static_cast<double>(i + 1)) + log_ratio;
  }
  return std::min(cdf, 1.0);
}

int size_pool(int machine_count, double daily_fail_prob, double quantile) {
  if (machine_count < 1) {
    throw std::invalid_argument("size_pool: machine_count must be >= 1");
  }
  if (quantile <= 0.0 || quantile > 1.0) {
    throw std::invalid_argument("size_pool: quantile must be in (0, 1]");
  }
  for (int s = 0; s <= machine_count; ++s) {
    if (binomial_cdf(machine_count, daily_fail_prob, s) >= quantile) {
      return s;
    }
  }
  return machine_count;
}

const char* restart_policy_name(RestartPolicy policy) {
  switch (policy) {
    case RestartPolicy::requeue:
      return "requeue";
    case RestartPolicy::reschedule:
      return "reschedule";
    case RestartPolicy::oracle:
      return "oracle";
    case RestartPolicy::ours:
      return "ours";
  }
  return "?";
}

std::optional<RestartPolicy> restart_policy_from_name(
    const std::string& name) {
  if (name == "requeue") return RestartPolicy::requeue;
  if (name == "reschedule") return RestartPolicy::reschedule;
  if (name == "oracle") return RestartPolicy::oracle;
  if (name == "ours") return RestartPolicy::ours;
  return std::nullopt;
}

namespace {

double interpolate_scale(int scale, const double (&values)[4]) {
  static constexpr int kScales[4] = {128, 256, 512, 1024};
  if (scale <= kScales[0]) {
    return values[0];
  }
  if (scale >= kScales[3]) {
    return values[3];
  }
  for (int i = 0; i < 3; ++i) {
    if (scale <= kScales[i + 1]) {
      double t = static_cast<double>(scale - kScales[i]) /
                 static_cast<double>(kScales[i + 1] - kScales[i]);
      return values[i] + t * (values[i + 1] - values[i]);
    }
  }
  return values[3];
}

}  // namespace

double requeue_teardown_s(int scale_machines) {
  static constexpr double kMeasured[4] = {454.0, 545.0, 635.0, 768.0};
  return interpolate_scale(scale_machines, kMeasured);
}

double hot_update_restart_s(int scale_machines) {
  static constexpr double kMeasured[4] = {46.0, 51.0, 54.0, 65.0};
  return interpolate_scale(scale_machines, kMeasured);
}

double policy_downtime_s(RestartPolicy policy, int evictions, int pool_warm,
                         const RecoveryParams& params, int scale_machines) {
  if (evictions < 0) {
    throw std::invalid_argument("policy_downtime_s: negative eviction count");
  }
  switch (policy) {
    case RestartPolicy::requeue:
      return requeue_teardown_s(scale_machines) + params.init_s;
    case RestartPolicy::reschedule:
      return evictions > 0 ? params.init_s : 0.0;
    case RestartPolicy::oracle:
      return evictions > 0 ? params.wake_s : 0.0;
    case RestartPolicy::ours: {
      if (evictions == 0) {
        return 0.0;
      }
      if (evictions <= pool_warm) {
        return params.wake_s;
      }
      return std::max(params.wake_s, params.init_s);
    }
  }
  return 0.0;
}

std::vector<WasRow> was_table(std::span<const int> scales,
                              double daily_fail_prob, double quantile,
                              const RecoveryParams& params,
                              std::span<const RestartPolicy> policies,
                              int catastrophic_evictions,
                              double catastrophic_mass) {
  std::vector<WasRow> rows;
  for (int scale : scales) {
    WasRow row;
    row.scale_machines = scale;
    row.pool_size = size_pool(scale, daily_fail_prob, quantile);
    const int max_evictions = std::max(1, row.pool_size);

    // Scenario weights: binomial mass over 1..max_evictions renormalized to
    // (1 - catastrophic_mass); the catastrophic case carries fixed mass.
    std::vector<double> mass(static_cast<std::size_t>(max_evictions) + 1, 0.0);
    double total = 0.0;
    for (int k = 1; k <= max_evictions; ++k) {
      double pk = binomial_cdf(scale, daily_fail_prob, k) -
                  binomial_cdf(scale, daily_fail_prob, k - 1);
      mass[static_cast<std::size_t>(k)] = pk;
      total += pk;
    }

    for (RestartPolicy policy : policies) {
      double was = catastrophic_mass *
                   policy_downtime_s(policy, catastrophic_evictions,
                                     row.pool_size, params, scale);
      if (total > 0.0) {
        for (int k = 1; k <= max_evictions; ++k) {
          double w =
              (1.0 - catastrophic_mass) * mass[static_cast<std::size_t>(k)] / total;
          was += w * policy_downtime_s(policy, k, row.pool_size, params, scale);
        }
      }
      row.was_s[policy] = was;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

int StandbyPool::warm_count() const {
  int count = 0;
  for (const auto& [machine, state] : members_) {
    if (state == StandbyState::warm) {
      ++count;
    }
  }
  return count;
}

int StandbyPool::initializing_count() const {
  return size() - warm_count();
}

void StandbyPool::add(int machine, StandbyState state) {
  if (members_.count(machine)) {
    throw std::logic_error("StandbyPool: machine already pooled");
  }
  members_[machine] = state;
}

void StandbyPool::mark_warm(int machine) {
  auto it = members_.find(machine);
  if (it == members_.end()) {
    throw std::logic_error("StandbyPool: marking a machine not in the pool");
  }
  it->second = StandbyState::warm;
}

std::vector<int> StandbyPool::withdraw_warm(int count) {
  std::vector<int> taken;
  for (auto it = members_.begin();
       it != members_.end() && static_cast<int>(taken.size()) < count;) {
    if (it->second == StandbyState::warm) {
      taken.push_back(it->first);
      it = members_.erase(it);
    } else {
      ++it;
    }
  }
  return taken;
}

bool StandbyPool::contains(int machine) const {
  return members_.count(machine) > 0;
}

}  // namespace robustsim
