// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "robustsim/metrics.hpp"
#include "robustsim/recovery.hpp"
#include "robustsim/time.hpp"

namespace robustsim {

struct AlertRecord {
  SimTimeMs at = 0;
  std::string source;  // inspection | log | metric | timeout
  std::string what;    // item, metric, or symptom
  std::vector<int> machines;
  int fault_id = -1;
  std::string action;

  friend bool operator==(const AlertRecord&, const AlertRecord&) = default;
};

/// Lifecycle record of one handled incident: when it was detected, which
/// stages the controller walked, what got evicted, and how it ended.
struct IncidentCase {
  int id = 0;
  std::vector<int> fault_ids;
  SimTimeMs onset = 0;
  SimTimeMs detected_at = 0;
  SimTimeMs localized_at = 0;
  SimTimeMs resumed_at = 0;
  std::vector<std::string> path;  // stage labels, in order
  std::vector<int> evicted;
  std::string resolution;  // resolution label, or "escalated"
  bool escalated = false;

  friend bool operator==(const IncidentCase&, const IncidentCase&) = default;
};

struct UpdateRecord {
  std::string id;
  std::string urgency;  // urgent | lazy
  SimTimeMs submitted_at = 0;
  SimTimeMs applied_at = -1;  // -1 = never applied
  std::string applied_via;    // urgent-submit | failover | window-expiry

  friend bool operator==(const UpdateRecord&, const UpdateRecord&) = default;
};

struct MachineRecord {
  int id = -1;
  std::string health;
  int slot = -1;

  friend bool operator==(const MachineRecord&, const MachineRecord&) = default;
};

struct SimReport {
  std::string final_state;  // completed | escalated | capacity-exhausted
  SimTimeMs end_time = 0;
  std::int64_t steps_completed = 0;
  double final_cumulative_ettr = 1.0;
  MetricsLedger ledger;
  std::vector<IncidentCase> incidents;
  std::vector<AlertRecord> alerts;
  std::vector<UpdateRecord> updates;
  std::vector<MachineRecord> machines;
  std::vector<EttrPoint> ettr_cumulative;
  std::vector<EttrPoint> ettr_sliding;
  std::map<std::string, int> resolution_breakdown;
  std::vector<std::string> trace;
  std::vector<WasRow> was;  // filled by sweep runs only

  friend bool operator==(const SimReport&, const SimReport&) = default;
};

std::string report_to_json_string(const SimReport& report);
SimReport report_from_json_string(const std::string& text);
SimReport report_from_file(const std::string& path);

/// Human-readable rendering for the CLI `report` subcommand.
std::string render_report_text(const SimReport& report);

}  // namespace robustsim
