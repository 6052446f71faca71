// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "robustsim/detection.hpp"

#include <cmath>
#include <vector>

#include <doctest.h>

using namespace robustsim;

namespace {

Alert make_inspection_alert(SimTimeMs at, InspectionItem item, int machine) {
  Alert alert;
  alert.at = at;
  alert.source = AlertSource::inspection;
  alert.item = item;
  alert.machines = {machine};
  return alert;
}

}  // namespace

TEST_CASE("high-confidence machine faults evict immediately") {
  DetectionConfig config;
  Alert alert = make_inspection_alert(1000, InspectionItem::gpu_lost, 5);
  Action action = classify(alert, {}, config);
  CHECK(action.kind == ActionKind::evict_now);
  CHECK(action.machines == std::vector<int>{5});
}

TEST_CASE("network flapping is tolerated until it repeats in the window") {
  DetectionConfig config;
  Alert first = make_inspection_alert(30'000, InspectionItem::port, 3);
  CHECK(classify(first, {}, config).kind == ActionKind::tolerate);

  Alert second = make_inspection_alert(60'000, InspectionItem::port, 3);
  std::vector<Alert> history = {first};
  CHECK(classify(second, history, config).kind == ActionKind::evict_now);

  // Outside the 5-minute window the counter starts over.
  Alert late = make_inspection_alert(400'000, InspectionItem::port, 3);
  CHECK(classify(late, history, config).kind == ActionKind::tolerate);

  // A different machine does not share the tally.
  Alert other = make_inspection_alert(60'000, InspectionItem::port, 4);
  CHECK(classify(other, history, config).kind == ActionKind::tolerate);
}

TEST_CASE("log and metric alerts route to rollback/stop-time/aggregation") {
  DetectionConfig config;

  Alert traceable;
  traceable.source = AlertSource::log;
  traceable.module_tag = "fused_kernel";
  CHECK(classify(traceable, {}, config).kind == ActionKind::rollback);

  Alert crash;
  crash.source = AlertSource::log;
  CHECK(classify(crash, {}, config).kind == ActionKind::stop_time);

  Alert nan_alert;
  nan_alert.source = AlertSource::metric;
  nan_alert.metric = MetricName::loss;
  nan_alert.nan_symptom = true;
  CHECK(classify(nan_alert, {}, config).kind == ActionKind::stop_time);

  Alert rdma;
  rdma.source = AlertSource::metric;
  rdma.metric = MetricName::rdma_traffic;
  CHECK(classify(rdma, {}, config).kind == ActionKind::aggregation_trigger);

  Alert silent_timeout;
  silent_timeout.source = AlertSource::timeout;
  silent_timeout.silent_stall = true;
  CHECK(classify(silent_timeout, {}, config).kind ==
        ActionKind::aggregation_trigger);

  Alert noisy_timeout;
  noisy_timeout.source = AlertSource::timeout;
  noisy_timeout.silent_stall = false;
  CHECK(classify(noisy_timeout, {}, config).kind == ActionKind::stop_time);
}

TEST_CASE("classify is a pure function of alert and history") {
  DetectionConfig config;
  Alert alert = make_inspection_alert(90'000, InspectionItem::nic, 2);
  std::vector<Alert> history = {
      make_inspection_alert(30'000, InspectionItem::nic, 2)};
  Action first = classify(alert, history, config);
  Action second = classify(alert, history, config);
  CHECK(first.kind == second.kind);
  CHECK(first.machines == second.machines);
}

TEST_CASE("inspection confirmation needs the configured consecutive hits") {
  InspectionState state;
  InspectionRule rule{InspectionItem::switch_fabric, 30 * kMsPerSecond, 2};
  CHECK_FALSE(state.observe(rule, 3, true));
  CHECK(state.observe(rule, 3, true));
  CHECK(state.observe(rule, 3, true));  // keeps confirming while it persists

  // A clean poll resets the streak.
  CHECK_FALSE(state.observe(rule, 3, false));
  CHECK_FALSE(state.observe(rule, 3, true));
}

TEST_CASE("metric rules: nan, zero-for, spike, below-median") {
  std::vector<MetricRule> rules = default_metric_rules();
  MetricState state;

  SUBCASE("nan trips instantly") {
    auto tripped = state.append(MetricName::loss, 60'000,
                                std::nan(""), rules);
    REQUIRE(tripped.size() == 1);
    CHECK(tripped[0].kind == MetricRuleKind::nan_value);
  }

  SUBCASE("zero-for needs the full window of zeros") {
    SimTimeMs t = 0;
    std::vector<MetricRule> fired;
    for (int i = 0; i < 12; ++i) {
      t += 60'000;
      auto tripped = state.append(MetricName::rdma_traffic, t, 0.0, rules);
      for (const MetricRule& rule : tripped) {
        fired.push_back(rule);
      }
      if (i < 10) {
        CHECK(fired.empty());
      }
    }
    CHECK(!fired.empty());
  }

  SUBCASE("ratio spike against the trailing median") {
    SimTimeMs t = 0;
    for (int i = 0; i < 10; ++i) {
      t += 60'000;
      CHECK(state.append(MetricName::grad_norm, t, 1.0, rules).empty());
    }
    auto tripped = state.append(MetricName::grad_norm, t + 60'000, 6.0, rules);
    REQUIRE(tripped.size() == 1);
    CHECK(tripped[0].kind == MetricRuleKind::ratio_spike);
  }

  SUBCASE("tensorcore decline needs three consecutive low samples") {
    SimTimeMs t = 0;
    for (int i = 0; i < 10; ++i) {
      t += 60'000;
      CHECK(state.append(MetricName::tensorcore_util, t, 1.0, rules).empty());
    }
    t += 60'000;
    CHECK(state.append(MetricName::tensorcore_util, t, 0.4, rules).empty());
    t += 60'000;
    CHECK(state.append(MetricName::tensorcore_util, t, 0.4, rules).empty());
    t += 60'000;
    auto tripped = state.append(MetricName::tensorcore_util, t, 0.4, rules);
    REQUIRE(tripped.size() == 1);
    CHECK(tripped[0].kind == MetricRuleKind::below_median);
  }
}

TEST_CASE("default inspection rules carry the production intervals") {
  auto rules = default_inspection_rules();
  auto find = [&](InspectionItem item) -> const InspectionRule& {
    for (const InspectionRule& rule : rules) {
      if (rule.item == item) {
        return rule;
      }
    }
    FAIL("missing rule");
    return rules.front();
  };
  CHECK(find(InspectionItem::nic).interval == 30 * kMsPerSecond);
  CHECK(find(InspectionItem::switch_fabric).threshold == 2);
  CHECK(find(InspectionItem::gpu_lost).interval == 10 * kMsPerSecond);
  CHECK(find(InspectionItem::os_kernel).interval == 2 * kMsPerSecond);
}
