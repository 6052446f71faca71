// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "robustsim/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace robustsim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: " + path + ": " + what);
}

void expect_keys(const json& obj, const std::string& path,
                 const std::set<std::string>& allowed) {
  if (!obj.is_object()) {
    fail(path, "expected an object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      fail(path + "." + key, "unknown key");
    }
  }
}

template <typename T>
T get_or(const json& obj, const std::string& path, const char* key,
         T fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(path + "." + key, "wrong type");
  }
}

SimTimeMs get_seconds(const json& obj, const std::string& path,
                      const char* key, SimTimeMs fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  if (!obj.at(key).is_number()) {
    fail(path + "." + key, "expected seconds as a number");
  }
  return ms_from_s(obj.at(key).get<double>());
}

FaultEvent parse_fault(const json& obj, const std::string& path, int index) {
  expect_keys(obj, path,
              {"kind", "onset_s", "duration_s", "machines", "signatures",
               "slowdown", "visible_rounds", "nan_delay_s", "module",
               "introduced_in", "nan_symptom"});
  FaultEvent fault;
  fault.id = index;
  if (!obj.contains("kind")) {
    fail(path, "missing kind");
  }
  auto kind = fault_kind_from_name(obj.at("kind").get<std::string>());
  if (!kind) {
    fail(path + ".kind", "unknown fault kind '" +
                             obj.at("kind").get<std::string>() + "'");
  }
  fault.kind = *kind;
  fault.onset = get_seconds(obj, path, "onset_s", 0);
  if (obj.contains("duration_s") && !obj.at("duration_s").is_null()) {
    fault.duration = get_seconds(obj, path, "duration_s", 0);
  }
  fault.machines = get_or<std::vector<int>>(obj, path, "machines", {});
  if (obj.contains("signatures")) {
    const json& sigs = obj.at("signatures");
    if (!sigs.is_object()) {
      fail(path + ".signatures", "expected machine->string object");
    }
    for (const auto& [key, value] : sigs.items()) {
      fault.signatures[std::stoi(key)] = value.get<std::string>();
    }
  }
  fault.slowdown = get_or<double>(obj, path, "slowdown", 0.5);
  fault.visible_rounds =
      get_or<std::vector<int>>(obj, path, "visible_rounds", {});
  fault.nan_delay = get_seconds(obj, path, "nan_delay_s", fault.nan_delay);
  fault.module_tag = get_or<std::string>(obj, path, "module", "");
  fault.introduced_in = get_or<std::string>(obj, path, "introduced_in", "");
  fault.nan_symptom = get_or<bool>(obj, path, "nan_symptom", false);
  return fault;
}

json fault_to_json(const FaultEvent& fault) {
  json obj;
  obj["kind"] = fault_kind_name(fault.kind);
  obj["onset_s"] = s_from_ms(fault.onset);
  if (fault.duration) {
    obj["duration_s"] = s_from_ms(*fault.duration);
  }
  obj["machines"] = fault.machines;
  if (!fault.signatures.empty()) {
    json sigs = json::object();
    for (const auto& [machine, sig] : fault.signatures) {
      sigs[std::to_string(machine)] = sig;
    }
    obj["signatures"] = sigs;
  }
  if (fault.kind == FaultKind::fail_slow) {
    obj["slowdown"] = fault.slowdown;
    if (!fault.visible_rounds.empty()) {
      obj["visible_rounds"] = fault.visible_rounds;
    }
  }
  if (fault.kind == FaultKind::sdc) {
    obj["nan_delay_s"] = s_from_ms(fault.nan_delay);
  }
  if (!fault.module_tag.empty()) {
    obj["module"] = fault.module_tag;
  }
  if (!fault.introduced_in.empty()) {
    obj["introduced_in"] = fault.introduced_in;
  }
  if (fault.nan_symptom) {
    obj["nan_symptom"] = true;
  }
  return obj;
}

DetectionConfig parse_detection(const json& obj, const std::string& path) {
  expect_keys(obj, path,
              {"inspections_enabled", "metrics_enabled", "inspection_rules",
               "metric_rules", "metric_sample_s", "comm_timeout_s",
               "log_latency_s", "network_tolerate_count",
               "network_tolerate_window_s"});
  DetectionConfig config;
  config.inspections_enabled =
      get_or<bool>(obj, path, "inspections_enabled", true);
  config.metrics_enabled = get_or<bool>(obj, path, "metrics_enabled", true);
  config.metric_sample_interval =
      get_seconds(obj, path, "metric_sample_s", config.metric_sample_interval);
  config.comm_timeout =
      get_seconds(obj, path, "comm_timeout_s", config.comm_timeout);
  config.log_latency =
      get_seconds(obj, path, "log_latency_s", config.log_latency);
  config.network_tolerate_count =
      get_or<int>(obj, path, "network_tolerate_count", 2);
  config.network_tolerate_window = get_seconds(
      obj, path, "network_tolerate_window_s", config.network_tolerate_window);

  if (obj.contains("inspection_rules")) {
    config.inspection_rules.clear();
    int i = 0;
    for (const json& rule_obj : obj.at("inspection_rules")) {
      std::string rule_path =
          path + ".inspection_rules[" + std::to_string(i++) + "]";
      expect_keys(rule_obj, rule_path, {"item", "interval_s", "threshold"});
      InspectionRule rule;
      auto item = inspection_item_from_name(
          rule_obj.at("item").get<std::string>());
      if (!item) {
        fail(rule_path + ".item", "unknown inspection item");
      }
      rule.item = *item;
      rule.interval = get_seconds(rule_obj, rule_path, "interval_s",
                                  30 * kMsPerSecond);
      rule.threshold = get_or<int>(rule_obj, rule_path, "threshold", 1);
      config.inspection_rules.push_back(rule);
    }
  }
  if (obj.contains("metric_rules")) {
    config.metric_rules.clear();
    int i = 0;
    for (const json& rule_obj : obj.at("metric_rules")) {
      std::string rule_path =
          path + ".metric_rules[" + std::to_string(i++) + "]";
      expect_keys(rule_obj, rule_path,
                  {"metric", "rule", "factor", "window_s", "consecutive",
                   "median_window"});
      MetricRule rule;
      std::string metric = rule_obj.at("metric").get<std::string>();
      if (metric == "loss") {
        rule.metric = MetricName::loss;
      } else if (metric == "grad-norm") {
        rule.metric = MetricName::grad_norm;
      } else if (metric == "rdma-traffic") {
        rule.metric = MetricName::rdma_traffic;
      } else if (metric == "tensorcore-util") {
        rule.metric = MetricName::tensorcore_util;
      } else {
        fail(rule_path + ".metric", "unknown metric");
      }
      std::string kind = rule_obj.at("rule").get<std::string>();
      if (kind == "nan") {
        rule.kind = MetricRuleKind::nan_value;
      } else if (kind == "ratio-spike") {
        rule.kind = MetricRuleKind::ratio_spike;
      } else if (kind == "zero-for") {
        rule.kind = MetricRuleKind::zero_for;
      } else if (kind == "below-median") {
        rule.kind = MetricRuleKind::below_median;
      } else {
        fail(rule_path + ".rule", "unknown rule kind");
      }
      rule.factor = get_or<double>(rule_obj, rule_path, "factor", rule.factor);
      rule.window = get_seconds(rule_obj, rule_path, "window_s", rule.window);
      rule.consecutive =
          get_or<int>(rule_obj, rule_path, "consecutive", rule.consecutive);
      rule.median_window = get_or<int>(rule_obj, rule_path, "median_window",
                                       rule.median_window);
      config.metric_rules.push_back(rule);
    }
  }
  return config;
}

json detection_to_json(const DetectionConfig& config) {
  json obj;
  obj["inspections_enabled"] = config.inspections_enabled;
  obj["metrics_enabled"] = config.metrics_enabled;
  obj["metric_sample_s"] = s_from_ms(config.metric_sample_interval);
  obj["comm_timeout_s"] = s_from_ms(config.comm_timeout);
  obj["log_latency_s"] = s_from_ms(config.log_latency);
  obj["network_tolerate_count"] = config.network_tolerate_count;
  obj["network_tolerate_window_s"] = s_from_ms(config.network_tolerate_window);
  json rules = json::array();
  for (const InspectionRule& rule : config.inspection_rules) {
    json rule_obj;
    rule_obj["item"] = inspection_item_name(rule.item);
    rule_obj["interval_s"] = s_from_ms(rule.interval);
    rule_obj["threshold"] = rule.threshold;
    rules.push_back(rule_obj);
  }
  obj["inspection_rules"] = rules;
  json metric_rules = json::array();
  for (const MetricRule& rule : config.metric_rules) {
    json rule_obj;
    switch (rule.metric) {
      case MetricName::loss:
        rule_obj["metric"] = "loss";
        break;
      case MetricName::grad_norm:
        rule_obj["metric"] = "grad-norm";
        break;
      case MetricName::rdma_traffic:
        rule_obj["metric"] = "rdma-traffic";
        break;
      case MetricName::tensorcore_util:
        rule_obj["metric"] = "tensorcore-util";
        break;
    }
    switch (rule.kind) {
      case MetricRuleKind::nan_value:
        rule_obj["rule"] = "nan";
        break;
      case MetricRuleKind::ratio_spike:
        rule_obj["rule"] = "ratio-spike";
        break;
      case MetricRuleKind::zero_for:
        rule_obj["rule"] = "zero-for";
        break;
      case MetricRuleKind::below_median:
        rule_obj["rule"] = "below-median";
        break;
    }
    rule_obj["factor"] = rule.factor;
    rule_obj["window_s"] = s_from_ms(rule.window);
    rule_obj["consecutive"] = rule.consecutive;
    rule_obj["median_window"] = rule.median_window;
    metric_rules.push_back(rule_obj);
  }
  obj["metric_rules"] = metric_rules;
  return obj;
}

}  // namespace

void ScenarioConfig::validate() const {
  ParallelTopology topo = topology.build();  // throws on inconsistency
  if (horizon_steps < 0) {
    throw std::invalid_argument("config: horizon_steps: must be >= 0");
  }
  if (step_duration_s <= 0.0) {
    throw std::invalid_argument("config: step_duration_s: must be positive");
  }
  const SimTimeMs nominal_end = horizon_steps * step_duration_ms();
  int index = 0;
  for (const FaultEvent& fault : faults) {
    std::string path = "config: faults[" + std::to_string(index++) + "]";
    if (fault.onset < 0) {
      throw std::invalid_argument(path + ".onset_s: must be >= 0");
    }
    if (horizon_steps > 0 && fault.onset >= nominal_end) {
      throw std::invalid_argument(path +
                                  ".onset_s: beyond the nominal horizon");
    }
    if (fault.machines.empty() && fault.kind != FaultKind::nan_loss &&
        fault.kind != FaultKind::hdfs_error &&
        fault.kind != FaultKind::user_code_bug) {
      throw std::invalid_argument(path + ".machines: must name a machine");
    }
    for (int machine : fault.machines) {
      if (machine < 0 || machine >= topo.machine_count()) {
        throw std::invalid_argument(path + ".machines: machine " +
                                    std::to_string(machine) +
                                    " outside the topology");
      }
    }
    if (fault.kind == FaultKind::fail_slow &&
        (fault.slowdown <= 0.0 || fault.slowdown > 1.0)) {
      throw std::invalid_argument(path + ".slowdown: must be in (0, 1]");
    }
    if (fault.duration && *fault.duration <= 0) {
      throw std::invalid_argument(path + ".duration_s: must be positive");
    }
  }
  if (recovery.daily_fail_prob < 0.0 || recovery.daily_fail_prob > 1.0) {
    throw std::invalid_argument(
        "config: recovery.daily_fail_prob: must be in [0, 1]");
  }
  if (recovery.spare_machines < 0) {
    throw std::invalid_argument(
        "config: recovery.spare_machines: must be >= 0");
  }
  for (const UpdateSpec& update : recovery.updates) {
    if (update.version.empty()) {
      throw std::invalid_argument("config: recovery.updates: empty version");
    }
    if (update.at < 0) {
      throw std::invalid_argument("config: recovery.updates: negative time");
    }
  }
  if (checkpoint.durations.d2h_s <= 0.0 ||
      checkpoint.durations.serialize_s <= 0.0 ||
      checkpoint.durations.send_s <= 0.0) {
    throw std::invalid_argument(
        "config: checkpoint durations must be positive");
  }
  if (checkpoint.remote_interval_steps < 1) {
    throw std::invalid_argument(
        "config: checkpoint.remote_interval_steps: must be >= 1");
  }
  if (ettr_window <= 0) {
    throw std::invalid_argument("config: ettr_window_s: must be positive");
  }
}

ScenarioConfig scenario_from_json_string(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") +
                                e.what());
  }
  expect_keys(root, "config",
              {"topology", "horizon_steps", "step_duration_s", "seed",
               "initial_version", "faults", "detection", "diagnosis",
               "aggregation", "recovery", "checkpoint", "ettr_window_s"});

  ScenarioConfig config;
  if (root.contains("topology")) {
    const json& topo = root.at("topology");
    expect_keys(topo, "config.topology", {"tp", "pp", "dp",
                                          "ranks_per_machine"});
    config.topology.tp = get_or<int>(topo, "config.topology", "tp", 2);
    config.topology.pp = get_or<int>(topo, "config.topology", "pp", 2);
    config.topology.dp = get_or<int>(topo, "config.topology", "dp", 2);
    config.topology.ranks_per_machine =
        get_or<int>(topo, "config.topology", "ranks_per_machine", 1);
  }
  config.horizon_steps =
      get_or<std::int64_t>(root, "config", "horizon_steps", 1000);
  config.step_duration_s =
      get_or<double>(root, "config", "step_duration_s", 15.0);
  if (!root.contains("seed")) {
    throw std::invalid_argument("config: seed: required");
  }
  config.seed = root.at("seed").get<std::uint64_t>();
  config.initial_version =
      get_or<std::string>(root, "config", "initial_version", "v1");

  if (root.contains("faults")) {
    int i = 0;
    for (const json& fault_obj : root.at("faults")) {
      std::string path = "config.faults[" + std::to_string(i) + "]";
      config.faults.push_back(parse_fault(fault_obj, path, i));
      ++i;
    }
  }
  if (root.contains("detection")) {
    config.detection = parse_detection(root.at("detection"),
                                       "config.detection");
  }
  if (root.contains("diagnosis")) {
    const json& diag = root.at("diagnosis");
    const std::string path = "config.diagnosis";
    expect_keys(diag, path,
                {"test_false_negative_rate", "sdc_diagnose_recall",
                 "align_recall", "diagnose_duration_s", "align_duration_s",
                 "replay_step_s", "replay_group_size"});
    config.diagnosis.test_false_negative_rate =
        get_or<double>(diag, path, "test_false_negative_rate", 0.0);
    config.diagnosis.sdc_diagnose_recall =
        get_or<double>(diag, path, "sdc_diagnose_recall", 0.0);
    config.diagnosis.align_recall =
        get_or<double>(diag, path, "align_recall", 0.7);
    config.diagnosis.diagnose_duration = get_seconds(
        diag, path, "diagnose_duration_s", config.diagnosis.diagnose_duration);
    config.diagnosis.align_duration = get_seconds(
        diag, path, "align_duration_s", config.diagnosis.align_duration);
    config.diagnosis.replay_step_duration = get_seconds(
        diag, path, "replay_step_s", config.diagnosis.replay_step_duration);
    config.diagnosis.replay_group_size =
        get_or<int>(diag, path, "replay_group_size", 0);
  }
  if (root.contains("aggregation")) {
    const json& agg = root.at("aggregation");
    const std::string path = "config.aggregation";
    expect_keys(agg, path,
                {"snapshot_capture_s", "fail_slow_rounds", "round_spacing_s"});
    config.aggregation.snapshot_capture = get_seconds(
        agg, path, "snapshot_capture_s", config.aggregation.snapshot_capture);
    config.aggregation.fail_slow_rounds =
        get_or<int>(agg, path, "fail_slow_rounds", 5);
    config.aggregation.round_spacing = get_seconds(
        agg, path, "round_spacing_s", config.aggregation.round_spacing);
  }
  if (root.contains("recovery")) {
    const json& rec = root.at("recovery");
    const std::string path = "config.recovery";
    expect_keys(rec, path,
                {"daily_fail_prob", "pool_quantile", "pool_target",
                 "spare_machines", "wake_s", "init_s", "restart_s",
                 "restore_s", "remote_restore_s", "quarantine_s",
                 "lazy_update_window_s", "updates"});
    config.recovery.daily_fail_prob =
        get_or<double>(rec, path, "daily_fail_prob", 0.001);
    config.recovery.pool_quantile =
        get_or<double>(rec, path, "pool_quantile", 0.99);
    config.recovery.pool_target = get_or<int>(rec, path, "pool_target", -1);
    config.recovery.spare_machines =
        get_or<int>(rec, path, "spare_machines", 64);
    config.recovery.params.wake_s = get_or<double>(rec, path, "wake_s", 30.0);
    config.recovery.params.init_s = get_or<double>(rec, path, "init_s", 600.0);
    config.recovery.params.restart_s =
        get_or<double>(rec, path, "restart_s", 60.0);
    config.recovery.params.restore_s =
        get_or<double>(rec, path, "restore_s", 30.0);
    config.recovery.params.remote_restore_s =
        get_or<double>(rec, path, "remote_restore_s", 600.0);
    config.recovery.params.quarantine_s =
        get_or<double>(rec, path, "quarantine_s", 3600.0);
    config.recovery.params.lazy_update_window =
        get_seconds(rec, path, "lazy_update_window_s",
                    config.recovery.params.lazy_update_window);
    if (rec.contains("updates")) {
      int i = 0;
      for (const json& upd : rec.at("updates")) {
        std::string upd_path = path + ".updates[" + std::to_string(i++) + "]";
        expect_keys(upd, upd_path, {"id", "at_s", "urgency", "version"});
        UpdateSpec spec;
        spec.id = get_or<std::string>(upd, upd_path, "id",
                                      "u" + std::to_string(i));
        spec.at = get_seconds(upd, upd_path, "at_s", 0);
        std::string urgency =
            get_or<std::string>(upd, upd_path, "urgency", "lazy");
        if (urgency == "urgent") {
          spec.urgency = UpdateUrgency::urgent;
        } else if (urgency == "lazy") {
          spec.urgency = UpdateUrgency::lazy;
        } else {
          fail(upd_path + ".urgency", "expected 'urgent' or 'lazy'");
        }
        if (!upd.contains("version")) {
          fail(upd_path, "missing version");
        }
        spec.version = upd.at("version").get<std::string>();
        config.recovery.updates.push_back(spec);
      }
    }
  }
  if (root.contains("checkpoint")) {
    const json& ckpt = root.at("checkpoint");
    const std::string path = "config.checkpoint";
    expect_keys(ckpt, path,
                {"policy", "d2h_s", "serialize_s", "send_s",
                 "remote_interval_steps"});
    if (ckpt.contains("policy")) {
      auto policy =
          ckpt_policy_from_name(ckpt.at("policy").get<std::string>());
      if (!policy) {
        fail(path + ".policy", "unknown checkpoint policy");
      }
      config.checkpoint.policy = *policy;
    }
    config.checkpoint.durations.d2h_s =
        get_or<double>(ckpt, path, "d2h_s", 5.0);
    config.checkpoint.durations.serialize_s =
        get_or<double>(ckpt, path, "serialize_s", 2.0);
    config.checkpoint.durations.send_s =
        get_or<double>(ckpt, path, "send_s", 3.0);
    config.checkpoint.remote_interval_steps =
        get_or<std::int64_t>(ckpt, path, "remote_interval_steps", 100);
  }
  config.ettr_window =
      get_seconds(root, "config", "ettr_window_s", config.ettr_window);

  config.validate();
  return config;
}

ScenarioConfig scenario_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return scenario_from_json_string(buffer.str());
}

std::string scenario_to_json_string(const ScenarioConfig& config) {
  json root;
  root["topology"] = {{"tp", config.topology.tp},
                      {"pp", config.topology.pp},
                      {"dp", config.topology.dp},
                      {"ranks_per_machine", config.topology.ranks_per_machine}};
  root["horizon_steps"] = config.horizon_steps;
  root["step_duration_s"] = config.step_duration_s;
  root["seed"] = config.seed;
  root["initial_version"] = config.initial_version;
  json faults = json::array();
  for (const FaultEvent& fault : config.faults) {
    faults.push_back(fault_to_json(fault));
  }
  root["faults"] = faults;
  root["detection"] = detection_to_json(config.detection);
  root["diagnosis"] = {
      {"test_false_negative_rate", config.diagnosis.test_false_negative_rate},
      {"sdc_diagnose_recall", config.diagnosis.sdc_diagnose_recall},
      {"align_recall", config.diagnosis.align_recall},
      {"diagnose_duration_s", s_from_ms(config.diagnosis.diagnose_duration)},
      {"align_duration_s", s_from_ms(config.diagnosis.align_duration)},
      {"replay_step_s", s_from_ms(config.diagnosis.replay_step_duration)},
      {"replay_group_size", config.diagnosis.replay_group_size}};
  root["aggregation"] = {
      {"snapshot_capture_s", s_from_ms(config.aggregation.snapshot_capture)},
      {"fail_slow_rounds", config.aggregation.fail_slow_rounds},
      {"round_spacing_s", s_from_ms(config.aggregation.round_spacing)}};
  json updates = json::array();
  for (const UpdateSpec& update : config.recovery.updates) {
    updates.push_back({{"id", update.id},
                       {"at_s", s_from_ms(update.at)},
                       {"urgency", update.urgency == UpdateUrgency::urgent
                                       ? "urgent"
                                       : "lazy"},
                       {"version", update.version}});
  }
  root["recovery"] = {
      {"daily_fail_prob", config.recovery.daily_fail_prob},
      {"pool_quantile", config.recovery.pool_quantile},
      {"pool_target", config.recovery.pool_target},
      {"spare_machines", config.recovery.spare_machines},
      {"wake_s", config.recovery.params.wake_s},
      {"init_s", config.recovery.params.init_s},
      {"restart_s", config.recovery.params.restart_s},
      {"restore_s", config.recovery.params.restore_s},
      {"remote_restore_s", config.recovery.params.remote_restore_s},
      {"quarantine_s", config.recovery.params.quarantine_s},
      {"lazy_update_window_s",
       s_from_ms(config.recovery.params.lazy_update_window)},
      {"updates", updates}};
  root["checkpoint"] = {
      {"policy", ckpt_policy_name(config.checkpoint.policy)},
      {"d2h_s", config.checkpoint.durations.d2h_s},
      {"serialize_s", config.checkpoint.durations.serialize_s},
      {"send_s", config.checkpoint.durations.send_s},
      {"remote_interval_steps", config.checkpoint.remote_interval_steps}};
  root["ettr_window_s"] = s_from_ms(config.ettr_window);
  return root.dump(2) + "\n";
}

SnapshotFixture snapshot_fixture_from_json_string(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("fixture: invalid JSON: ") +
                                e.what());
  }
  expect_keys(root, "fixture", {"topology", "machines"});
  SnapshotFixture fixture;
  const json& topo = root.at("topology");
  expect_keys(topo, "fixture.topology", {"tp", "pp", "dp",
                                         "ranks_per_machine"});
  fixture.topology.tp = get_or<int>(topo, "fixture.topology", "tp", 2);
  fixture.topology.pp = get_or<int>(topo, "fixture.topology", "pp", 2);
  fixture.topology.dp = get_or<int>(topo, "fixture.topology", "dp", 2);
  fixture.topology.ranks_per_machine =
      get_or<int>(topo, "fixture.topology", "ranks_per_machine", 1);

  const json& machines = root.at("machines");
  if (!machines.is_object()) {
    throw std::invalid_argument("fixture: machines: expected an object");
  }
  for (const auto& [key, entries] : machines.items()) {
    int machine = std::stoi(key);
    for (const json& entry : entries) {
      expect_keys(entry, "fixture.machines." + key, {"role", "sig"});
      StackEntry stack_entry;
      auto role = process_role_from_name(entry.at("role").get<std::string>());
      if (!role) {
        throw std::invalid_argument("fixture: machines." + key +
                                    ": unknown role");
      }
      stack_entry.role = *role;
      stack_entry.signature = entry.at("sig").get<std::string>();
      fixture.snapshot.machines[machine].push_back(stack_entry);
    }
  }
  return fixture;
}

SnapshotFixture snapshot_fixture_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("fixture: cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return snapshot_fixture_from_json_string(buffer.str());
}

std::string snapshot_fixture_to_json_string(const SnapshotFixture& fixture) {
  json root;
  root["topology"] = {
      {"tp", fixture.topology.tp},
      {"pp", fixture.topology.pp},
      {"dp", fixture.topology.dp},
      {"ranks_per_machine", fixture.topology.ranks_per_machine}};
  json machines = json::object();
  for (const auto& [machine, entries] : fixture.snapshot.machines) {
    json list = json::array();
    for (const StackEntry& entry : entries) {
      list.push_back({{"role", process_role_name(entry.role)},
                      {"sig", entry.signature}});
    }
    machines[std::to_string(machine)] = list;
  }
  root["machines"] = machines;
  return root.dump(2) + "\n";
}

}  // namespace robustsim
