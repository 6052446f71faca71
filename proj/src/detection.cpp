// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "robustsim/detection.hpp"

#include <algorithm>
#include <cmath>

namespace robustsim {

std::vector<InspectionRule> default_inspection_rules() {
  return {
      {InspectionItem::nic, 30 * kMsPerSecond, 1},
      {InspectionItem::port, 30 * kMsPerSecond, 1},
      {InspectionItem::switch_fabric, 30 * kMsPerSecond, 2},
      {InspectionItem::gpu_driver, 10 * kMsPerSecond, 1},
      {InspectionItem::gpu_temp, 10 * kMsPerSecond, 1},
      {InspectionItem::gpu_lost, 10 * kMsPerSecond, 1},
      {InspectionItem::os_kernel, 2 * kMsPerSecond, 1},
  };
}

std::vector<MetricRule> default_metric_rules() {
  std::vector<MetricRule> rules;
  MetricRule nan_loss;
  nan_loss.metric = MetricName::loss;
  nan_loss.kind = MetricRuleKind::nan_value;
  rules.push_back(nan_loss);

  MetricRule loss_spike;
  loss_spike.metric = MetricName::loss;
  loss_spike.kind = MetricRuleKind::ratio_spike;
  loss_spike.factor = 5.0;
  rules.push_back(loss_spike);

  MetricRule grad_spike;
  grad_spike.metric = MetricName::grad_norm;
  grad_spike.kind = MetricRuleKind::ratio_spike;
  grad_spike.factor = 5.0;
  rules.push_back(grad_spike);

  MetricRule rdma_zero;
  rdma_zero.metric = MetricName::rdma_traffic;
  rdma_zero.kind = MetricRuleKind::zero_for;
  rdma_zero.window = 600 * kMsPerSecond;
  rules.push_back(rdma_zero);

  MetricRule tensorcore_low;
  tensorcore_low.metric = MetricName::tensorcore_util;
  tensorcore_low.kind = MetricRuleKind::below_median;
  tensorcore_low.factor = 0.5;
  tensorcore_low.consecutive = 3;
  tensorcore_low.median_window = 10;
  rules.push_back(tensorcore_low);

  return rules;
}

namespace {

bool is_network_item(InspectionItem item) {
  return item == InspectionItem::nic || item == InspectionItem::port ||
         item == InspectionItem::switch_fabric ||
         item == InspectionItem::packet_loss_rate;
}

bool is_high_confidence_item(InspectionItem item) {
  switch (item) {
    case InspectionItem::gpu_lost:
    case InspectionItem::gpu_driver:
    case InspectionItem::gpu_temp:
    case InspectionItem::os_kernel:
      return true;
    default:
      return false;
  }
}

}  // namespace

Action classify(const Alert& alert, std::span<const Alert> history,
                const DetectionConfig& config) {
  switch (alert.source) {
    case AlertSource::inspection: {
      if (!alert.item) {
        return {ActionKind::stop_time, alert.machines, {}};
      }
      if (is_high_confidence_item(*alert.item)) {
        return {ActionKind::evict_now, alert.machines, {}};
      }
      if (is_network_item(*alert.item)) {
        // Flapping-class: tolerate until repeats accumulate in the window.
        int count = 1;
        for (const Alert& prior : history) {
          if (prior.source == AlertSource::inspection && prior.item &&
              *prior.item == *alert.item && prior.machines == alert.machines &&
              prior.at < alert.at &&
              alert.at - prior.at <= config.network_tolerate_window) {
            ++count;
          }
        }
        if (count >= config.network_tolerate_count) {
          return {ActionKind::evict_now, alert.machines, {}};
        }
        return {ActionKind::tolerate, alert.machines, {}};
      }
      return {ActionKind::evict_now, alert.machines, {}};
    }
    case AlertSource::log: {
      if (!alert.module_tag.empty()) {
        return {ActionKind::rollback, alert.machines, alert.module_tag};
      }
      return {ActionKind::stop_time, alert.machines, {}};
    }
    case AlertSource::metric: {
      if (alert.metric == MetricName::rdma_traffic ||
          alert.metric == MetricName::tensorcore_util) {
        return {ActionKind::aggregation_trigger, {}, {}};
      }
      return {ActionKind::stop_time, {}, {}};
    }
    case AlertSource::timeout: {
      if (alert.silent_stall) {
        return {ActionKind::aggregation_trigger, {}, {}};
      }
      return {ActionKind::stop_time, alert.machines, {}};
    }
  }
  return {ActionKind::tolerate, {}, {}};
}

bool InspectionState::observe(const InspectionRule& rule, int machine,
                              bool anomalous) {
  auto key = std::make_pair(rule.item, machine);
  if (!anomalous) {
    consecutive_.erase(key);
    return false;
  }
  int count = ++consecutive_[key];
  return count >= rule.threshold;
}

void InspectionState::reset() { consecutive_.clear(); }

std::vector<MetricRule> MetricState::append(MetricName metric, SimTimeMs at,
                                            double value,
                                            std::span<const MetricRule> rules) {
  auto& window = samples_[metric];
  window.push_back({at, value});
  while (window.size() > 32) {
    window.pop_front();
  }

  std::vector<MetricRule> tripped;
  for (const MetricRule& rule : rules) {
    if (rule.metric != metric) {
      continue;
    }
    switch (rule.kind) {
      case MetricRuleKind::nan_value: {
        if (std::isnan(value)) {
          tripped.push_back(rule);
        }
        break;
      }
      case MetricRuleKind::ratio_spike: {
        // Median of the samples preceding the current one.
        std::vector<double> prior;
        for (std::size_t i = 0; i + 1 < window.size(); ++i) {
          prior.push_back(window[i].value);
        }
        if (prior.size() < static_cast<std::size_t>(rule.median_window)) {
          break;
        }
        std::vector<double> tail(prior.end() - rule.median_window,
                                 prior.end());
        std::nth_element(tail.begin(), tail.begin() + tail.size() / 2,
                         tail.end());
        double median = tail[tail.size() / 2];
        if (!std::isnan(value) && median > 0.0 &&
            value >= rule.factor * median) {
          tripped.push_back(rule);
        }
        break;
      }
      case MetricRuleKind::zero_for: {
        if (value != 0.0) {
          break;
        }
        // All samples covering the trailing window must be zero, and the
        // window must actually span the required duration.
        SimTimeMs oldest_zero = at;
        for (auto it = window.rbegin(); it != window.rend(); ++it) {
          if (it->value != 0.0) {
            break;
          }
          oldest_zero = it->at;
          if (at - oldest_zero >= rule.window) {
            break;
          }
        }
        if (at - oldest_zero >= rule.window) {
          tripped.push_back(rule);
        }
        break;
      }
      case MetricRuleKind::below_median: {
        const int need =
            rule.consecutive + rule.median_window;
        if (window.size() < static_cast<std::size_t>(need)) {
          break;
        }
        std::vector<double> med_src;
        for (std::size_t i = window.size() - static_cast<std::size_t>(need);
             i < window.size() - static_cast<std::size_t>(rule.consecutive);
             ++i) {
          med_src.push_back(window[i].value);
        }
        std::nth_element(med_src.begin(), med_src.begin() + med_src.size() / 2,
                         med_src.end());
        double median = med_src[med_src.size() / 2];
        if (median <= 0.0) {
          break;
        }
        bool all_below = true;
        for (std::size_t i = window.size() - static_cast<std::size_t>(rule.consecutive);
             i < window.size(); ++i) {
          if (std::isnan(window[i].value) ||
              window[i].value > rule.factor * median) {
            all_below = false;
            break;
          }
        }
        if (all_below) {
          tripped.push_back(rule);
        }
        break;
      }
    }
  }
  return tripped;
}

void MetricState::clear_metric(MetricName metric) { samples_.erase(metric); }

}  // namespace robustsim
