// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "robustsim/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace robustsim {

namespace {

using nlohmann::json;

json ledger_to_json(const MetricsLedger& ledger) {
  json segments = json::array();
  for (const Segment& seg : ledger.segments()) {
    segments.push_back(
        {{"start_ms", seg.start},
         {"end_ms", seg.end},
         {"class", segment_class_name(seg.cls)}});
  }
  return segments;
}

SegmentClass segment_class_from_name(const std::string& name) {
  for (SegmentClass cls :
       {SegmentClass::productive, SegmentClass::detection,
        SegmentClass::localization, SegmentClass::failover,
        SegmentClass::recompute, SegmentClass::ckpt_stall,
        SegmentClass::degraded}) {
    if (name == segment_class_name(cls)) {
      return cls;
    }
  }
  throw std::invalid_argument("report: unknown segment class '" + name + "'");
}

json ettr_to_json(const std::vector<EttrPoint>& series) {
  json out = json::array();
  for (const EttrPoint& point : series) {
    out.push_back({{"at_ms", point.at}, {"ratio", point.ratio}});
  }
  return out;
}

std::vector<EttrPoint> ettr_from_json(const json& arr) {
  std::vector<EttrPoint> series;
  for (const json& obj : arr) {
    series.push_back({obj.at("at_ms").get<SimTimeMs>(),
                      obj.at("ratio").get<double>()});
  }
  return series;
}

}  // namespace

std::string report_to_json_string(const SimReport& report) {
  json root;
  root["final_state"] = report.final_state;
  root["end_time_ms"] = report.end_time;
  root["steps_completed"] = report.steps_completed;
  root["final_cumulative_ettr"] = report.final_cumulative_ettr;
  root["ledger"] = ledger_to_json(report.ledger);

  json incidents = json::array();
  for (const IncidentCase& incident : report.incidents) {
    incidents.push_back({{"id", incident.id},
                         {"fault_ids", incident.fault_ids},
                         {"onset_ms", incident.onset},
                         {"detected_at_ms", incident.detected_at},
                         {"localized_at_ms", incident.localized_at},
                         {"resumed_at_ms", incident.resumed_at},
                         {"path", incident.path},
                         {"evicted", incident.evicted},
                         {"resolution", incident.resolution},
                         {"escalated", incident.escalated}});
  }
  root["incidents"] = incidents;

  json alerts = json::array();
  for (const AlertRecord& alert : report.alerts) {
    alerts.push_back({{"at_ms", alert.at},
                      {"source", alert.source},
                      {"what", alert.what},
                      {"machines", alert.machines},
                      {"fault_id", alert.fault_id},
                      {"action", alert.action}});
  }
  root["alerts"] = alerts;

  json updates = json::array();
  for (const UpdateRecord& update : report.updates) {
    updates.push_back({{"id", update.id},
                       {"urgency", update.urgency},
                       {"submitted_at_ms", update.submitted_at},
                       {"applied_at_ms", update.applied_at},
                       {"applied_via", update.applied_via}});
  }
  root["updates"] = updates;

  json machines = json::array();
  for (const MachineRecord& machine : report.machines) {
    machines.push_back({{"id", machine.id},
                        {"health", machine.health},
                        {"slot", machine.slot}});
  }
  root["machines"] = machines;

  root["ettr_cumulative"] = ettr_to_json(report.ettr_cumulative);
  root["ettr_sliding"] = ettr_to_json(report.ettr_sliding);
  root["resolution_breakdown"] = report.resolution_breakdown;
  root["trace"] = report.trace;

  json was = json::array();
  for (const WasRow& row : report.was) {
    json policies = json::object();
    for (const auto& [policy, seconds] : row.was_s) {
      policies[restart_policy_name(policy)] = seconds;
    }
    was.push_back({{"scale_machines", row.scale_machines},
                   {"pool_size", row.pool_size},
                   {"was_s", policies}});
  }
  root["was"] = was;
  return root.dump(2) + "\n";
}

SimReport report_from_json_string(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("report: invalid JSON: ") +
                                e.what());
  }
  SimReport report;
  report.final_state = root.at("final_state").get<std::string>();
  report.end_time = root.at("end_time_ms").get<SimTimeMs>();
  report.steps_completed = root.at("steps_completed").get<std::int64_t>();
  report.final_cumulative_ettr =
      root.at("final_cumulative_ettr").get<double>();

  std::vector<Segment> segments;
  for (const json& seg : root.at("ledger")) {
    segments.push_back(
        {seg.at("start_ms").get<SimTimeMs>(), seg.at("end_ms").get<SimTimeMs>(),
         segment_class_from_name(seg.at("class").get<std::string>())});
  }
  report.ledger.set_segments(std::move(segments));

  for (const json& obj : root.at("incidents")) {
    IncidentCase incident;
    incident.id = obj.at("id").get<int>();
    incident.fault_ids = obj.at("fault_ids").get<std::vector<int>>();
    incident.onset = obj.at("onset_ms").get<SimTimeMs>();
    incident.detected_at = obj.at("detected_at_ms").get<SimTimeMs>();
    incident.localized_at = obj.at("localized_at_ms").get<SimTimeMs>();
    incident.resumed_at = obj.at("resumed_at_ms").get<SimTimeMs>();
    incident.path = obj.at("path").get<std::vector<std::string>>();
    incident.evicted = obj.at("evicted").get<std::vector<int>>();
    incident.resolution = obj.at("resolution").get<std::string>();
    incident.escalated = obj.at("escalated").get<bool>();
    report.incidents.push_back(std::move(incident));
  }

  for (const json& obj : root.at("alerts")) {
    AlertRecord alert;
    alert.at = obj.at("at_ms").get<SimTimeMs>();
    alert.source = obj.at("source").get<std::string>();
    alert.what = obj.at("what").get<std::string>();
    alert.machines = obj.at("machines").get<std::vector<int>>();
    alert.fault_id = obj.at("fault_id").get<int>();
    alert.action = obj.at("action").get<std::string>();
    report.alerts.push_back(std::move(alert));
  }

  for (const json& obj : root.at("updates")) {
    UpdateRecord update;
    update.id = obj.at("id").get<std::string>();
    update.urgency = obj.at("urgency").get<std::string>();
    update.submitted_at = obj.at("submitted_at_ms").get<SimTimeMs>();
    update.applied_at = obj.at("applied_at_ms").get<SimTimeMs>();
    update.applied_via = obj.at("applied_via").get<std::string>();
    report.updates.push_back(std::move(update));
  }

  for (const json& obj : root.at("machines")) {
    MachineRecord machine;
    machine.id = obj.at("id").get<int>();
    machine.health = obj.at("health").get<std::string>();
    machine.slot = obj.at("slot").get<int>();
    report.machines.push_back(std::move(machine));
  }

  report.ettr_cumulative = ettr_from_json(root.at("ettr_cumulative"));
  report.ettr_sliding = ettr_from_json(root.at("ettr_sliding"));
  report.resolution_breakdown =
      root.at("resolution_breakdown").get<std::map<std::string, int>>();
  report.trace = root.at("trace").get<std::vector<std::string>>();

  for (const json& obj : root.at("was")) {
    WasRow row;
    row.scale_machines = obj.at("scale_machines").get<int>();
    row.pool_size = obj.at("pool_size").get<int>();
    for (const auto& [name, seconds] : obj.at("was_s").items()) {
      auto policy = restart_policy_from_name(name);
      if (!policy) {
        throw std::invalid_argument("report: unknown policy '" + name + "'");
      }
      row.was_s[*policy] = seconds.get<double>();
    }
    report.was.push_back(std::move(row));
  }
  return report;
}

SimReport report_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("report: cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return report_from_json_string(buffer.str());
}

std::string render_report_text(const SimReport& report) {
  std::ostringstream os;
  os << "final state:      " << report.final_state << "\n";
  os << "end time:         " << std::fixed << std::setprecision(1)
     << s_from_ms(report.end_time) << " s\n";
  os << "steps completed:  " << report.steps_completed << "\n";
  os << "cumulative ETTR:  " << std::setprecision(4)
     << report.final_cumulative_ettr << "\n";

  os << "time breakdown:\n";
  for (SegmentClass cls :
       {SegmentClass::productive, SegmentClass::detection,
        SegmentClass::localization, SegmentClass::failover,
        SegmentClass::recompute, SegmentClass::ckpt_stall,
        SegmentClass::degraded}) {
    SimTimeMs total = report.ledger.total(cls);
    if (total > 0) {
      os << "  " << std::left << std::setw(13) << segment_class_name(cls)
         << std::right << std::setprecision(1) << s_from_ms(total) << " s\n";
    }
  }

  os << "incidents:        " << report.incidents.size() << "\n";
  for (const IncidentCase& incident : report.incidents) {
    os << "  #" << incident.id << " onset=" << std::setprecision(1)
       << s_from_ms(incident.onset)
       << "s detected=" << s_from_ms(incident.detected_at) << "s path=[";
    for (std::size_t i = 0; i < incident.path.size(); ++i) {
      os << (i ? " " : "") << incident.path[i];
    }
    os << "] evicted={";
    for (std::size_t i = 0; i < incident.evicted.size(); ++i) {
      os << (i ? "," : "") << incident.evicted[i];
    }
    os << "} resolution=" << incident.resolution << "\n";
  }

  if (!report.resolution_breakdown.empty()) {
    os << "resolution breakdown:\n";
    for (const auto& [label, count] : report.resolution_breakdown) {
      os << "  " << std::left << std::setw(16) << label << std::right << count
         << "\n";
    }
  }

  if (!report.was.empty()) {
    os << "weighted-average scheduling time (s):\n";
    os << "  scale  pool";
    for (const auto& [policy, seconds] : report.was.front().was_s) {
      os << "  " << std::setw(10) << restart_policy_name(policy);
    }
    os << "\n";
    for (const WasRow& row : report.was) {
      os << "  " << std::setw(5) << row.scale_machines << "  " << std::setw(4)
         << row.pool_size;
      for (const auto& [policy, seconds] : row.was_s) {
        os << "  " << std::setw(10) << std::setprecision(2) << seconds;
      }
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace robustsim
