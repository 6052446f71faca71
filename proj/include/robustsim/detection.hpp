// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robustsim/fault.hpp"
#include "robustsim/time.hpp"

namespace robustsim {

/// Periodic health query: `threshold` consecutive positive polls confirm an
/// alert for the item.
struct InspectionRule {
  InspectionItem item = InspectionItem::nic;
  SimTimeMs interval = 30 * kMsPerSecond;
  int threshold = 1;

  friend bool operator==(const InspectionRule&,
                         const InspectionRule&) = default;
};

/// Defaults mirror production practice: network items polled at 30 s (switch
/// confirmed on the second consecutive hit), GPU items at 10 s, kernel events
/// at 2 s. PCIe/row-remapping/packet-loss are accepted in overrides but carry
/// no default rule.
std::vector<InspectionRule> default_inspection_rules();

enum class MetricName { loss, grad_norm, rdma_traffic, tensorcore_util };

enum class MetricRuleKind { nan_value, ratio_spike, zero_for, below_median };

struct MetricRule {
  MetricName metric = MetricName::loss;
  MetricRuleKind kind = MetricRuleKind::nan_value;
  double factor = 5.0;            // ratio_spike: trip at factor x median
                                  // below_median: trip below factor x median
  SimTimeMs window = 600 * kMsPerSecond;  // zero_for
  int consecutive = 3;            // below_median
  int median_window = 10;         // trailing samples for the median

  friend bool operator==(const MetricRule&, const MetricRule&) = default;
};

std::vector<MetricRule> default_metric_rules();

enum class AlertSource { inspection, log, metric, timeout };

struct Alert {
  SimTimeMs at = 0;
  AlertSource source = AlertSource::inspection;
  std::vector<int> machines;  // empty = job-level, unattributed
  std::optional<InspectionItem> item;
  std::optional<MetricName> metric;
  bool nan_symptom = false;
  bool silent_stall = false;  // timeout with no attributable evidence
  std::string module_tag;     // user-space error traceable to a code module
  std::string detail;
};

enum class ActionKind {
  evict_now,
  tolerate,
  stop_time,
  aggregation_trigger,
  rollback,
};

struct Action {
  ActionKind kind = ActionKind::tolerate;
  std::vector<int> machines;
  std::string module_tag;
};

struct DetectionConfig {
  bool inspections_enabled = true;
  bool metrics_enabled = true;
  std::vector<InspectionRule> inspection_rules = default_inspection_rules();
  std::vector<MetricRule> metric_rules = default_metric_rules();
  SimTimeMs metric_sample_interval = 60 * kMsPerSecond;
  SimTimeMs comm_timeout = 600 * kMsPerSecond;
  SimTimeMs log_latency = 15 * kMsPerSecond;
  int network_tolerate_count = 2;
  SimTimeMs network_tolerate_window = 300 * kMsPerSecond;

  friend bool operator==(const DetectionConfig&,
                         const DetectionConfig&) = default;
};

/// Pure mapping from a confirmed alert (plus bounded recent history) to the
/// controller action. Replaying the same alert stream yields the same actions.
Action classify(const Alert& alert, std::span<const Alert> history,
                const DetectionConfig& config);

/// Consecutive-hit counters for inspection confirmation, keyed by
/// (item, machine).
class InspectionState {
 public:
  /// Registers one poll observation; returns true when the consecutive count
  /// reaches the rule's threshold (and keeps returning true while the
  /// condition persists, so repeated alerts feed the tolerate logic).
  bool observe(const InspectionRule& rule, int machine, bool anomalous);

  void reset();

 private:
  std::map<std::pair<InspectionItem, int>, int> consecutive_;
};

/// Bounded per-metric sample window with rule evaluation.
class MetricState {
 public:
  /// Appends a sample and returns the rules tripped by it.
  std::vector<MetricRule> append(MetricName metric, SimTimeMs at, double value,
                                 std::span<const MetricRule> rules);

  void clear_metric(MetricName metric);

 private:
  struct Sample {
    SimTimeMs at;
    double value;
  };
  std::map<MetricName, std::deque<Sample>> samples_;
};

}  // namespace robustsim
